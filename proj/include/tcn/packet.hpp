#pragma once

#include <cstdint>
#include <limits>
#include <variant>
#include <vector>

#include "tcn/hash.hpp"
#include "tcn/names.hpp"

namespace tcn {

enum class PayloadKind : std::uint8_t {
    Generic = 0,
    Chunk,
    TangleElement,
    FlicNode,
    TipInfo,
    SyncControl,
};

struct Interest {
    ContentName name;
    std::uint64_t nonce = 0;
    bool must_be_fresh = false;
    int hop_budget = 64;
    std::vector<std::uint8_t> params;

    std::size_t wire_size() const {
        return 8 + name.render().size() + params.size();
    }
};

inline constexpr double kNeverExpires = std::numeric_limits<double>::infinity();

struct DataPacket {
    ContentName name;
    PayloadKind kind = PayloadKind::Generic;
    std::vector<std::uint8_t> bytes;         // real payload (elements, manifests, control)
    std::uint64_t virtual_payload_bytes = 0; // simulated bulk payload (chunks)
    Hash256 content_hash{};
    std::vector<std::uint8_t> signature;
    double freshness_s = kNeverExpires; // 0 = never fresh in caches

    std::size_t wire_size() const {
        return 16 + name.render().size() + bytes.size() + virtual_payload_bytes +
               signature.size();
    }
};

using Packet = std::variant<Interest, DataPacket>;

inline std::size_t packet_wire_size(const Packet& p) {
    return std::visit([](const auto& x) { return x.wire_size(); }, p);
}

} // namespace tcn
