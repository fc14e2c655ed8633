#include "tcn/flic.hpp"

#include <span>
#include <stdexcept>

namespace tcn {

namespace {

constexpr std::uint8_t kTypeFlicNode = 0x03;

std::vector<std::uint8_t> encode_node_payload(const FlicNode& node) {
    Encoder enc;
    enc.put_u8(kWireVersion);
    enc.put_u8(kTypeFlicNode);
    enc.put_field(node.node_name);
    enc.put_u64_field(node.entries.size());
    for (const auto& e : node.entries) {
        enc.put_u8(e.is_manifest ? 1 : 0);
        enc.put_field(e.identifier);
        enc.put_field(std::span<const std::uint8_t>(e.hash.data(), e.hash.size()));
        enc.put_field(std::span<const std::uint8_t>(e.signature.data(), e.signature.size()));
    }
    return enc.take();
}

std::vector<std::uint8_t> mock_sign_bytes(std::span<const std::uint8_t> payload) {
    Hash256 h = sha256(payload);
    return std::vector<std::uint8_t>(h.begin(), h.end());
}

} // namespace

std::vector<std::uint8_t> FlicNode::encode() const {
    auto payload = encode_node_payload(*this);
    Encoder full;
    full.put_field(std::span<const std::uint8_t>(payload.data(), payload.size()));
    full.put_field(std::span<const std::uint8_t>(signature.data(), signature.size()));
    return full.take();
}

Hash256 FlicNode::content_hash() const {
    auto bytes = encode();
    return sha256(std::span<const std::uint8_t>(bytes.data(), bytes.size()));
}

std::optional<FlicNode> flic_decode_node(std::span<const std::uint8_t> bytes) {
    try {
        Decoder outer(bytes);
        auto payload = outer.get_field();
        auto signature = outer.get_field();
        if (!outer.done()) return std::nullopt;

        Decoder dec(std::span<const std::uint8_t>(payload.data(), payload.size()));
        if (dec.get_u8() != kWireVersion) return std::nullopt;
        if (dec.get_u8() != kTypeFlicNode) return std::nullopt;
        FlicNode node;
        node.node_name = dec.get_string_field();
        auto n = dec.get_u64_field();
        if (!n) return std::nullopt;
        for (std::uint64_t i = 0; i < *n; ++i) {
            FlicEntry e;
            e.is_manifest = dec.get_u8() != 0;
            e.identifier = dec.get_string_field();
            auto h = dec.get_field();
            if (h.size() != 32) return std::nullopt;
            std::copy(h.begin(), h.end(), e.hash.begin());
            e.signature = dec.get_field();
            node.entries.push_back(std::move(e));
        }
        if (!dec.done()) return std::nullopt;
        node.signature = std::move(signature);
        return node;
    } catch (const WireError&) {
        return std::nullopt;
    }
}

std::string flic_root_name(const std::string& ndo_name, std::uint64_t generation) {
    return ndo_name + "/flic/" + std::to_string(generation) + "/0";
}

std::string flic_chunk_identifier(const ChunkRef& chunk) {
    return chunk.chunk_name + "/" + to_hex(chunk.chunk_hash);
}

std::string flic_identifier_to_fetch_name(const std::string& identifier) {
    auto pos = identifier.rfind('/');
    if (pos == std::string::npos) return identifier;
    return identifier.substr(0, pos);
}

FlicManifest flic_build(const std::string& ndo_name, const std::vector<ChunkRef>& chunks,
                        std::uint32_t fanout, std::uint64_t generation) {
    if (fanout < 2) throw std::invalid_argument("flic_build: fanout must be >= 2");
    if (chunks.empty()) throw std::invalid_argument("flic_build: empty chunk list");

    FlicManifest m;
    m.ndo_name = ndo_name;
    m.generation = generation;
    m.fanout = fanout;

    auto make_node = [&](std::vector<FlicEntry> entries) {
        FlicNode node;
        node.entries = std::move(entries);
        return node;
    };

    // Bottom level: chunk entries grouped fanout at a time.
    std::vector<FlicNode> level;
    for (std::size_t i = 0; i < chunks.size(); i += fanout) {
        std::vector<FlicEntry> entries;
        for (std::size_t j = i; j < std::min(chunks.size(), i + fanout); ++j) {
            FlicEntry e;
            e.identifier = flic_chunk_identifier(chunks[j]);
            e.hash = chunks[j].chunk_hash;
            std::vector<std::uint8_t> sig_input(e.identifier.begin(), e.identifier.end());
            sig_input.insert(sig_input.end(), e.hash.begin(), e.hash.end());
            e.signature = mock_sign_bytes(std::span<const std::uint8_t>(sig_input));
            entries.push_back(std::move(e));
        }
        level.push_back(make_node(std::move(entries)));
    }

    std::vector<std::vector<FlicNode>> levels;
    levels.push_back(std::move(level));
    while (levels.back().size() > 1) {
        std::vector<FlicNode> next;
        const auto& below = levels.back();
        for (std::size_t i = 0; i < below.size(); i += fanout) {
            std::vector<FlicEntry> entries;
            entries.reserve(std::min<std::size_t>(fanout, below.size() - i));
            // names and hashes filled in once node names are assigned
            for (std::size_t j = i; j < std::min(below.size(), i + fanout); ++j) {
                FlicEntry e;
                e.is_manifest = true;
                entries.push_back(std::move(e));
            }
            next.push_back(make_node(std::move(entries)));
        }
        levels.push_back(std::move(next));
    }

    // Assign names top-down (root is index 0), then fill manifest entries
    // bottom-up so hashes cover finished child encodings.
    std::size_t index = 0;
    for (auto lit = levels.rbegin(); lit != levels.rend(); ++lit)
        for (auto& node : *lit)
            node.node_name = ndo_name + "/flic/" + std::to_string(generation) + "/" +
                             std::to_string(index++);

    for (std::size_t li = 0; li + 1 < levels.size(); ++li) {
        auto& children = levels[li];
        auto& parents = levels[li + 1];
        // finish children signatures first
        for (auto& child : children) {
            auto payload = encode_node_payload(child);
            child.signature = mock_sign_bytes(std::span<const std::uint8_t>(payload));
        }
        for (std::size_t p = 0; p < parents.size(); ++p) {
            for (std::size_t c = 0; c < parents[p].entries.size(); ++c) {
                const FlicNode& child = children[p * m.fanout + c];
                FlicEntry& e = parents[p].entries[c];
                Hash256 h = child.content_hash();
                e.identifier = child.node_name + "/" + to_hex(h);
                e.hash = h;
                std::vector<std::uint8_t> sig_input(e.identifier.begin(), e.identifier.end());
                sig_input.insert(sig_input.end(), e.hash.begin(), e.hash.end());
                e.signature = mock_sign_bytes(std::span<const std::uint8_t>(sig_input));
            }
        }
    }
    {
        auto& top = levels.back();
        for (auto& node : top) {
            auto payload = encode_node_payload(node);
            node.signature = mock_sign_bytes(std::span<const std::uint8_t>(payload));
        }
    }

    m.depth = static_cast<std::uint32_t>(levels.size());
    for (auto lit = levels.rbegin(); lit != levels.rend(); ++lit)
        for (auto& node : *lit) m.nodes.push_back(std::move(node));
    for (const auto& node : m.nodes) m.total_bytes += node.encode().size();
    return m;
}

FlicRebuildResult flic_rebuild(const FlicManifest& old, const std::vector<ChunkRef>& new_chunks) {
    FlicRebuildResult r;
    r.manifest = flic_build(old.ndo_name, new_chunks, old.fanout, old.generation + 1);
    r.bytes_transferred = r.manifest.total_bytes;
    return r;
}

std::uint64_t tangle_update_bytes(const std::vector<Element>& delta_elements) {
    std::uint64_t total = 0;
    for (const auto& e : delta_elements) total += canonical_encode(e).size();
    return total;
}

} // namespace tcn
