#include <doctest.h>

#include "tcn/flic.hpp"

using namespace tcn;

namespace {

std::vector<ChunkRef> chunk_list(const std::string& ndo, int n, int salt = 0) {
    std::vector<ChunkRef> out;
    for (int i = 0; i < n; ++i) {
        std::string name = ndo + "/chunks/" + std::to_string(i);
        out.push_back({name, sha256(name + "#" + std::to_string(salt)), 51200});
    }
    return out;
}

} // namespace

TEST_CASE("tree shape for 246 chunks at fanout 16") {
    auto m = flic_build("/d/x", chunk_list("/d/x", 246), 16);
    // 16 leaf nodes under one root
    CHECK(m.total_nodes() == 17);
    CHECK(m.depth == 2);
    CHECK(m.nodes[0].node_name == "/d/x/flic/0/0");
    CHECK(m.nodes[0].entries.size() == 16);
    for (const auto& e : m.nodes[0].entries) CHECK(e.is_manifest);

    std::size_t leaf_entries = 0;
    for (std::size_t i = 1; i < m.nodes.size(); ++i) {
        for (const auto& e : m.nodes[i].entries) {
            CHECK_FALSE(e.is_manifest);
            ++leaf_entries;
        }
    }
    CHECK(leaf_entries == 246);
    CHECK(m.total_bytes > 0);
}

TEST_CASE("degenerate and multi-level shapes") {
    auto single = flic_build("/d/x", chunk_list("/d/x", 5), 16);
    CHECK(single.total_nodes() == 1);
    CHECK(single.depth == 1);
    CHECK(single.nodes[0].entries.size() == 5);

    // 9 chunks at fanout 2: 5 leaves, 3 mid, 2, 1 root
    auto deep = flic_build("/d/x", chunk_list("/d/x", 9), 2);
    CHECK(deep.depth == 4);
    CHECK(deep.total_nodes() == 11);

    CHECK_THROWS(flic_build("/d/x", {}, 16));
    CHECK_THROWS(flic_build("/d/x", chunk_list("/d/x", 4), 1));
}

TEST_CASE("parent entries commit to child encodings") {
    auto m = flic_build("/d/x", chunk_list("/d/x", 40), 16);
    REQUIRE(m.total_nodes() == 4);
    // root entry i names child node i+1 with its content hash
    for (std::size_t i = 0; i < m.nodes[0].entries.size(); ++i) {
        const auto& e = m.nodes[0].entries[i];
        const auto& child = m.nodes[i + 1];
        CHECK(e.hash == child.content_hash());
        CHECK(e.identifier == child.node_name + "/" + to_hex(e.hash));
        CHECK(flic_identifier_to_fetch_name(e.identifier) == child.node_name);
    }
}

TEST_CASE("rebuild bumps the generation and re-transfers everything") {
    auto chunks = chunk_list("/d/x", 40);
    auto m = flic_build("/d/x", chunks, 16);

    auto changed = chunks;
    changed[3].chunk_hash = sha256(std::string_view("new content"));
    auto r = flic_rebuild(m, changed);
    CHECK(r.manifest.generation == 1);
    CHECK(r.bytes_transferred == r.manifest.total_bytes);
    // generation is part of every node name, so nothing is cache-reusable
    CHECK(r.manifest.nodes[0].node_name == "/d/x/flic/1/0");
    for (const auto& n : r.manifest.nodes)
        CHECK(n.node_name.find("/flic/1/") != std::string::npos);
    CHECK(r.manifest.nodes[0].content_hash() != m.nodes[0].content_hash());
}

TEST_CASE("identical inputs give identical trees") {
    auto a = flic_build("/d/x", chunk_list("/d/x", 33), 8);
    auto b = flic_build("/d/x", chunk_list("/d/x", 33), 8);
    REQUIRE(a.total_nodes() == b.total_nodes());
    for (std::size_t i = 0; i < a.nodes.size(); ++i)
        CHECK(a.nodes[i].encode() == b.nodes[i].encode());
}

TEST_CASE("node encode and decode round-trip") {
    auto m = flic_build("/d/x", chunk_list("/d/x", 20), 16);
    for (const auto& node : m.nodes) {
        auto bytes = node.encode();
        auto back = flic_decode_node(bytes);
        REQUIRE(back.has_value());
        CHECK(back->node_name == node.node_name);
        CHECK(back->signature == node.signature);
        REQUIRE(back->entries.size() == node.entries.size());
        for (std::size_t i = 0; i < node.entries.size(); ++i) {
            CHECK(back->entries[i].identifier == node.entries[i].identifier);
            CHECK(back->entries[i].hash == node.entries[i].hash);
            CHECK(back->entries[i].is_manifest == node.entries[i].is_manifest);
        }
        CHECK(back->encode() == bytes);

        auto truncated = bytes;
        truncated.resize(truncated.size() / 2);
        CHECK_FALSE(flic_decode_node(truncated).has_value());
    }
}

TEST_CASE("chunk identifiers are hash-qualified") {
    ChunkRef c{"/d/x/chunks/7", sha256(std::string_view("c")), 51200};
    auto id = flic_chunk_identifier(c);
    CHECK(id == "/d/x/chunks/7/" + to_hex(c.chunk_hash));
    CHECK(flic_identifier_to_fetch_name(id) == "/d/x/chunks/7");
}

TEST_CASE("root naming helper") {
    CHECK(flic_root_name("/d/x", 0) == "/d/x/flic/0/0");
    CHECK(flic_root_name("/d/x", 12) == "/d/x/flic/12/0");
}

TEST_CASE("tangle update cost is the bare delta encodings") {
    CoreElement core;
    core.ndo_name = "/d/x";
    core.chunk = {"/d/x/chunks/0", sha256(std::string_view("v2")), 51200};
    core.version = 1;
    core.primary_ref = sha256(std::string_view("prev"));
    core.secondary_ref = sha256(std::string_view("other"));
    core.origin = "node0";
    Element e = core;
    sign_element(e);
    std::uint64_t one = tangle_update_bytes({e});
    CHECK(one == canonical_encode(e).size());
    CHECK(tangle_update_bytes({e, e}) == 2 * one);
    CHECK(tangle_update_bytes({}) == 0);
}
