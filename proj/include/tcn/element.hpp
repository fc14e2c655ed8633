#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tcn/hash.hpp"

namespace tcn {

// Content hash of an element's canonical encoding. Equal encodings give
// equal ids; a collision is treated as fatal.
using ElementId = Hash256;

struct ChunkRef {
    std::string chunk_name;
    Hash256 chunk_hash{};
    std::uint64_t size_bytes = 0;

    friend bool operator==(const ChunkRef&, const ChunkRef&) = default;
};

// A core element carries one chunk's name, hash and version plus the two
// predecessor pointers. Genesis is the only element with both refs absent.
struct CoreElement {
    std::string ndo_name;
    ChunkRef chunk;
    std::uint64_t version = 0;
    std::optional<ElementId> primary_ref;
    std::optional<ElementId> secondary_ref;
    std::string origin;
    std::vector<std::uint8_t> signature;

    friend bool operator==(const CoreElement&, const CoreElement&) = default;
};

// An acknowledgement element: one node attesting it verified a core
// element. acked_ref is the semantic edge (counts toward verification
// degree), random_ref points at one randomly chosen other element.
struct AckElement {
    std::string ndo_name;
    ElementId acked_ref{};
    ElementId random_ref{};
    std::string origin;
    std::vector<std::uint8_t> signature;

    friend bool operator==(const AckElement&, const AckElement&) = default;
};

using Element = std::variant<CoreElement, AckElement>;

inline bool is_core(const Element& e) { return std::holds_alternative<CoreElement>(e); }
inline bool is_ack(const Element& e) { return std::holds_alternative<AckElement>(e); }

inline const std::string& origin_of(const Element& e) {
    return std::visit([](const auto& x) -> const std::string& { return x.origin; }, e);
}

inline const std::string& ndo_name_of(const Element& e) {
    return std::visit([](const auto& x) -> const std::string& { return x.ndo_name; }, e);
}

} // namespace tcn
