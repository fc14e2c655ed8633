#include <doctest.h>

#include <map>
#include <vector>

#include "tcn/forwarder.hpp"
#include "tcn/sync_wire.hpp"

using namespace tcn;

namespace {

struct Harness {
    Rng rng{77};
    Forwarder fwd;
    std::vector<std::pair<int, Packet>> sent;

    explicit Harness(Forwarder::Config cfg = {}) : fwd("nodeX", cfg, &rng) {
        fwd.send = [this](int face, Packet&& p) { sent.emplace_back(face, std::move(p)); };
    }

    std::size_t interests_out() const {
        std::size_t n = 0;
        for (const auto& [f, p] : sent)
            if (std::holds_alternative<Interest>(p)) ++n;
        return n;
    }
    std::vector<int> data_faces() const {
        std::vector<int> out;
        for (const auto& [f, p] : sent)
            if (std::holds_alternative<DataPacket>(p)) out.push_back(f);
        return out;
    }
};

Interest make_interest(const std::string& name, std::uint64_t nonce, bool mbf = false) {
    Interest i;
    i.name = ContentName::parse(name);
    i.nonce = nonce;
    i.must_be_fresh = mbf;
    return i;
}

DataPacket make_data(const std::string& name, std::uint64_t payload = 100,
                     PayloadKind kind = PayloadKind::Generic) {
    DataPacket d;
    d.name = ContentName::parse(name);
    d.kind = kind;
    d.virtual_payload_bytes = payload;
    return d;
}

} // namespace

TEST_CASE("PIT aggregates repeat interests and fans the data out") {
    Harness h;
    h.fwd.install_route(ContentName::parse("/a"), 9, kNeverExpires);

    h.fwd.on_interest(make_interest("/a/b", 1), 1, 0.0);
    h.fwd.on_interest(make_interest("/a/b", 2), 2, 0.1);
    CHECK(h.interests_out() == 1);
    CHECK(h.fwd.counters().pit_aggregated == 1);

    h.fwd.on_data(make_data("/a/b"), 9, 0.2);
    auto faces = h.data_faces();
    REQUIRE(faces.size() == 2);
    CHECK(std::set<int>(faces.begin(), faces.end()) == std::set<int>{1, 2});
    // satisfied once; a second copy is unsolicited
    h.fwd.on_data(make_data("/a/b"), 9, 0.3);
    CHECK(h.fwd.counters().drops_unsolicited == 1);
}

TEST_CASE("duplicate nonces and exhausted hop budgets are dropped") {
    Harness h;
    h.fwd.install_route(ContentName::parse("/a"), 9, kNeverExpires);

    h.fwd.on_interest(make_interest("/a/b", 5), 1, 0.0);
    h.fwd.on_interest(make_interest("/a/b", 5), 2, 0.1);
    CHECK(h.fwd.counters().drops_duplicate_nonce == 1);
    CHECK(h.interests_out() == 1);

    Interest tired = make_interest("/a/c", 6);
    tired.hop_budget = 1;
    h.fwd.on_interest(tired, 1, 0.2);
    CHECK(h.interests_out() == 1); // not forwarded
}

TEST_CASE("content store answers repeats and tracks LRU") {
    Forwarder::Config cfg;
    cfg.cs_capacity = 2;
    Harness h(cfg);
    h.fwd.install_route(ContentName::parse("/a"), 9, kNeverExpires);

    h.fwd.on_interest(make_interest("/a/1", 1), 1, 0.0);
    h.fwd.on_data(make_data("/a/1"), 9, 0.1);
    h.sent.clear();
    h.fwd.on_interest(make_interest("/a/1", 2), 2, 0.2);
    CHECK(h.fwd.counters().cs_hits == 1);
    CHECK(h.interests_out() == 0);
    CHECK(h.data_faces() == std::vector<int>{2});

    // fill beyond capacity; /a/1 was touched most recently after /a/2 insert
    h.fwd.on_interest(make_interest("/a/2", 3), 1, 0.3);
    h.fwd.on_data(make_data("/a/2"), 9, 0.4);
    h.fwd.on_interest(make_interest("/a/3", 4), 1, 0.5);
    h.fwd.on_data(make_data("/a/3"), 9, 0.6);
    CHECK(h.fwd.cs_size() == 2);
    h.sent.clear();
    h.fwd.on_interest(make_interest("/a/1", 5), 1, 0.7); // evicted, re-forwarded
    CHECK(h.interests_out() == 1);
}

TEST_CASE("must-be-fresh never hits zero-freshness cache entries") {
    Harness h;
    h.fwd.install_route(ContentName::parse("/a"), 9, kNeverExpires);

    DataPacket d = make_data("/a/tip");
    d.freshness_s = 0;
    h.fwd.on_interest(make_interest("/a/tip", 1), 1, 0.0);
    h.fwd.on_data(d, 9, 0.1);
    h.sent.clear();

    h.fwd.on_interest(make_interest("/a/tip", 2, true), 1, 0.2);
    CHECK(h.fwd.counters().cs_hits == 0);
    CHECK(h.interests_out() == 1); // forwarded upstream instead

    // without the freshness flag the cached copy is fine
    h.fwd.on_interest(make_interest("/a/tip", 3), 2, 0.3);
    CHECK(h.fwd.counters().cs_hits == 1);
}

TEST_CASE("longest prefix match with TTL and face exclusion") {
    Harness h;
    h.fwd.install_route(ContentName::parse("/a"), 1, kNeverExpires);
    h.fwd.install_route(ContentName::parse("/a/b"), 2, kNeverExpires);
    h.fwd.install_route(ContentName::parse("/a/b/c"), 3, 5.0);

    CHECK(h.fwd.longest_prefix_match(ContentName::parse("/a/b/c/d"), 99, 0.0) == 3);
    CHECK(h.fwd.longest_prefix_match(ContentName::parse("/a/b/c/d"), 99, 6.0) == 2);
    CHECK(h.fwd.longest_prefix_match(ContentName::parse("/a/b/c/d"), 2, 6.0) == 1);
    CHECK(h.fwd.longest_prefix_match(ContentName::parse("/a/x"), 99, 0.0) == 1);
    CHECK_FALSE(h.fwd.longest_prefix_match(ContentName::parse("/z"), 99, 0.0).has_value());

    h.fwd.expire_routes(6.0);
    CHECK(h.fwd.fib().size() == 2);
}

TEST_CASE("offer data installs provisional tunnel routes on the return path") {
    Harness h;
    h.fwd.install_route(ContentName::parse("/d/x"), 9, kNeverExpires);
    // a pending findsyncpartner interest from face 4
    h.fwd.on_interest(make_interest("/d/x/7/findsyncpartner", 7), 4, 0.0);

    SyncOffer offer;
    offer.ndo_name = "/d/x";
    offer.nonce = 7;
    offer.responder_id = "nodeR";
    offer.provisional_ttl_s = 5.0;
    DataPacket d = make_data("/d/x/7/findsyncpartner", 0, PayloadKind::SyncControl);
    d.bytes = offer.encode();
    d.freshness_s = 0;
    h.fwd.on_data(d, 9, 0.5);

    ContentName r = sync_tunnel_prefix("/d/x", 7, 'r');
    ContentName i = sync_tunnel_prefix("/d/x", 7, 'i');
    std::map<std::string, FibEntry> by_prefix;
    for (const auto& e : h.fwd.fib()) by_prefix[e.prefix.render() + "#" +
                                                std::to_string(e.face)] = e;
    REQUIRE(by_prefix.count(r.render() + "#9"));
    REQUIRE(by_prefix.count(i.render() + "#4"));
    CHECK(by_prefix.at(r.render() + "#9").provisional);
    CHECK(by_prefix.at(r.render() + "#9").expires_at == doctest::Approx(5.5));

    // confirm flips both provisional, a heartbeat later extends them
    ContentName confirm = r;
    confirm.components.push_back("confirm");
    confirm.components.push_back("1");
    h.fwd.on_interest(make_interest(confirm.render(), 8), 4, 1.0);
    for (const auto& e : h.fwd.fib())
        if (e.prefix == r || e.prefix == i) {
            CHECK_FALSE(e.provisional);
            CHECK(e.expires_at == doctest::Approx(1.0 + h.fwd.config().sync_route_ttl_s));
        }

    ContentName hb = i;
    hb.components.push_back("heartbeat");
    h.fwd.on_interest(make_interest(hb.render(), 9), 9, 10.0);
    for (const auto& e : h.fwd.fib())
        if (e.prefix == r || e.prefix == i)
            CHECK(e.expires_at == doctest::Approx(10.0 + h.fwd.config().sync_route_ttl_s));
}

TEST_CASE("special interest hook consumes before the content store") {
    Harness h;
    h.fwd.cs_insert(make_data("/a/b"), 0.0);
    int hits = 0;
    h.fwd.special_interest = [&](const Interest& i, int, double) {
        if (i.name == ContentName::parse("/a/b")) {
            ++hits;
            return true;
        }
        return false;
    };
    h.fwd.on_interest(make_interest("/a/b", 1), 1, 0.1);
    CHECK(hits == 1);
    CHECK(h.fwd.counters().cs_hits == 0);
}

TEST_CASE("MST verification rule acks once the chunk is verified") {
    Harness h;
    Rng grng(3);
    TangleGraph g = TangleGraph::genesis(
        "/d/x", ChunkRef{"/d/x/genesis", sha256(std::string_view("")), 0}, "producer");
    ElementId gid = g.insertion_order()[0];
    ChunkRef c1{"/d/x/chunks/0", sha256(std::string_view("payload")), 1000};
    ElementId c1id = g.append_core(c1, gid, "producer", grng);

    std::vector<ElementId> announced;
    h.fwd.on_acks_appended = [&](const std::string&, const std::vector<ElementId>& ids) {
        announced.insert(announced.end(), ids.begin(), ids.end());
    };
    h.fwd.mst_track(TangleGraph("/d/x"));
    h.fwd.store_in_mst("/d/x", g.element(gid));
    h.fwd.store_in_mst("/d/x", g.element(c1id));

    TangleGraph* mine = h.fwd.mst_find("/d/x");
    REQUIRE(mine != nullptr);
    CHECK(mine->size() == 2);
    CHECK(mine->verification_degree(c1id) == 0); // chunk not verified yet
    CHECK(announced.empty());

    SUBCASE("matching chunk hash triggers the deferred ack") {
        auto acks = h.fwd.note_chunk_seen(c1.chunk_name, c1.chunk_hash);
        CHECK(acks.size() == 1);
        CHECK(mine->verification_degree(c1id) == 1);
        CHECK(announced == acks);
    }

    SUBCASE("mismatching chunk hash counts a verification failure") {
        h.fwd.note_chunk_seen(c1.chunk_name, sha256(std::string_view("wrong")));
        CHECK(h.fwd.counters().verification_failures == 1);
        CHECK(mine->verification_degree(c1id) == 0);
    }

    SUBCASE("chunk seen before the core acks immediately") {
        ChunkRef c2{"/d/x/chunks/1", sha256(std::string_view("more")), 1000};
        ElementId c2id = g.append_core(c2, c1id, "producer", grng);
        h.fwd.note_chunk_seen(c1.chunk_name, c1.chunk_hash);
        h.fwd.note_chunk_seen(c2.chunk_name, c2.chunk_hash);
        auto acks = h.fwd.store_in_mst("/d/x", g.element(c2id));
        CHECK(acks.size() == 1);
        CHECK(mine->verification_degree(c2id) == 1);
    }
}

TEST_CASE("out-of-order elements wait in the pending pool") {
    Harness h;
    Rng grng(4);
    TangleGraph g = TangleGraph::genesis(
        "/d/x", ChunkRef{"/d/x/genesis", sha256(std::string_view("")), 0}, "producer");
    ElementId gid = g.insertion_order()[0];
    ChunkRef c1{"/d/x/chunks/0", sha256(std::string_view("a")), 1000};
    ElementId c1id = g.append_core(c1, gid, "producer", grng);
    ChunkRef c2{"/d/x/chunks/1", sha256(std::string_view("b")), 1000};
    ElementId c2id = g.append_core(c2, c1id, "producer", grng);

    h.fwd.mst_track(TangleGraph("/d/x"));
    h.fwd.store_in_mst("/d/x", g.element(c2id)); // refs unknown, pooled
    h.fwd.store_in_mst("/d/x", g.element(c1id)); // still missing genesis
    CHECK(h.fwd.mst_find("/d/x")->size() == 0);
    h.fwd.store_in_mst("/d/x", g.element(gid)); // drains the whole chain
    CHECK(h.fwd.mst_find("/d/x")->size() == 3);
    h.fwd.mst_find("/d/x")->validate();
}
