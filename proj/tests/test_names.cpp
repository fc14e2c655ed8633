#include <doctest.h>

#include "tcn/names.hpp"

using namespace tcn;

TEST_CASE("parse and render round-trip") {
    auto n = ContentName::parse("/data/ndo/chunks/00001");
    REQUIRE(n.components.size() == 4);
    CHECK(n.components[0] == "data");
    CHECK(n.render() == "/data/ndo/chunks/00001");
    CHECK(ContentName::parse(n.render()) == n);

    CHECK(ContentName::parse("/").components.empty());
    CHECK(ContentName::parse("").components.empty());
    CHECK(ContentName::parse("a/b") == ContentName::parse("/a/b"));
}

TEST_CASE("prefix relation") {
    auto root = ContentName::parse("/data/ndo");
    CHECK(root.is_prefix_of(ContentName::parse("/data/ndo/x")));
    CHECK(root.is_prefix_of(root));
    CHECK_FALSE(root.is_prefix_of(ContentName::parse("/data")));
    CHECK_FALSE(root.is_prefix_of(ContentName::parse("/data/other/x")));
    CHECK(ContentName{}.is_prefix_of(root));
}

TEST_CASE("element names carry ndo, id hex and version") {
    Hash256 id = sha256(std::string_view("el"));
    auto n = element_content_name("/data/ndo", id, 7);
    CHECK(n.render() == "/data/ndo/" + to_hex(id) + "/7");
    auto p = parse_element_name(n);
    REQUIRE(p.has_value());
    CHECK(p->ndo_name == "/data/ndo");
    CHECK(p->id == id);
    CHECK(p->version == 7);

    // version component is optional
    auto short_name = ContentName::parse("/data/ndo/" + to_hex(id));
    auto ps = parse_element_name(short_name);
    REQUIRE(ps.has_value());
    CHECK_FALSE(ps->version.has_value());

    CHECK_FALSE(parse_element_name(ContentName::parse("/data/ndo/nothex/7")).has_value());
}

TEST_CASE("tip names") {
    auto n = tip_content_name("/data/ndo", 3, true);
    CHECK(n.render() == "/data/ndo/3");
    CHECK(n.freshness_required);
    auto p = parse_tip_name(n);
    REQUIRE(p.has_value());
    CHECK(p->ndo_name == "/data/ndo");
    CHECK(p->version == 3);
    CHECK_FALSE(parse_tip_name(ContentName::parse("/data/ndo/abc")).has_value());
}

TEST_CASE("discovery names") {
    auto n = sync_partner_name("/data/ndo", 42);
    CHECK(n.render() == "/data/ndo/42/findsyncpartner");
    auto p = parse_sync_partner_name(n);
    REQUIRE(p.has_value());
    CHECK(p->tangle_name == "/data/ndo");
    CHECK(p->nonce == 42);
    CHECK_FALSE(parse_sync_partner_name(ContentName::parse("/data/ndo/42/other")).has_value());
}

TEST_CASE("sync tunnel names") {
    auto r = sync_tunnel_prefix("/data/ndo", 9, 'r');
    CHECK(r.render() == "/data/ndo/sync/9/r");
    auto i = sync_tunnel_prefix("/data/ndo", 9, 'i');
    CHECK(i.render() == "/data/ndo/sync/9/i");

    ContentName full = r;
    full.components.push_back("confirm");
    full.components.push_back("2");
    auto p = parse_sync_tunnel_name(full);
    REQUIRE(p.has_value());
    CHECK(p->ndo_name == "/data/ndo");
    CHECK(p->nonce == 9);
    CHECK(p->dir == 'r');
    CHECK(p->verb == "confirm");
    CHECK(p->rest == std::vector<std::string>{"2"});
    CHECK(p->r_prefix == r);
    CHECK(p->i_prefix == i);

    CHECK(parse_sync_tunnel_name(r).has_value()); // bare prefix, empty verb
    CHECK_FALSE(parse_sync_tunnel_name(ContentName::parse("/data/ndo/9/r")).has_value());
    CHECK_FALSE(parse_sync_tunnel_name(ContentName::parse("/data/ndo/sync/x/r")).has_value());
}
