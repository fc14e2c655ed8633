#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tcn/element.hpp"
#include "tcn/names.hpp"
#include "tcn/wire.hpp"

namespace tcn {

// Baseline tree manifest. Entries couple a unique, hash-qualified content
// identifier with the raw digest and a per-entry signature; any change to
// the NDO rebuilds the whole tree under fresh identifiers.
struct FlicEntry {
    std::string identifier; // <name>/<hex digest>
    Hash256 hash{};
    std::vector<std::uint8_t> signature;
    bool is_manifest = false;
};

struct FlicNode {
    std::string node_name;
    std::vector<FlicEntry> entries;
    std::vector<std::uint8_t> signature;

    std::vector<std::uint8_t> encode() const;
    Hash256 content_hash() const;
};

struct FlicManifest {
    std::string ndo_name;
    std::uint64_t generation = 0;
    std::uint32_t fanout = 16;
    // nodes[0] is the root; children follow level by level.
    std::vector<FlicNode> nodes;
    std::uint64_t total_bytes = 0;
    std::uint32_t depth = 0;

    std::size_t total_nodes() const { return nodes.size(); }
};

inline constexpr std::uint32_t kDefaultFlicFanout = 16;

FlicManifest flic_build(const std::string& ndo_name, const std::vector<ChunkRef>& chunks,
                        std::uint32_t fanout = kDefaultFlicFanout, std::uint64_t generation = 0);

// Full re-creation on change: a brand-new tree under a bumped generation.
// bytes_transferred is the whole new manifest, fetched entirely by consumers.
struct FlicRebuildResult {
    FlicManifest manifest;
    std::uint64_t bytes_transferred = 0;
};
FlicRebuildResult flic_rebuild(const FlicManifest& old, const std::vector<ChunkRef>& new_chunks);

// Manifest cost of a Tangle update: just the delta element encodings.
std::uint64_t tangle_update_bytes(const std::vector<Element>& delta_elements);

std::optional<FlicNode> flic_decode_node(std::span<const std::uint8_t> bytes);

// <ndo>/flic/<generation>/0
std::string flic_root_name(const std::string& ndo_name, std::uint64_t generation);

// The identifier carried in a FLIC entry for a chunk; strips back to the
// plain chunk name for fetching.
std::string flic_chunk_identifier(const ChunkRef& chunk);
std::string flic_identifier_to_fetch_name(const std::string& identifier);

} // namespace tcn
