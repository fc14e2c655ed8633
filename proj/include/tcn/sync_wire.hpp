#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tcn/element.hpp"

namespace tcn {

// Control message carried by the offer data packet answering a
// findsyncpartner interest. Every forwarder on the return path installs
// provisional tunnel routes from it.
struct SyncOffer {
    std::string ndo_name;
    std::uint64_t nonce = 0;
    std::string responder_id;
    double provisional_ttl_s = 5.0;

    std::vector<std::uint8_t> encode() const;
    static std::optional<SyncOffer> decode(std::span<const std::uint8_t> bytes);
};

// Tip answer: current version (generation for the baseline arm) and the
// current tip element ids.
struct TipInfoMsg {
    std::string ndo_name;
    std::uint64_t version = 0;
    std::vector<ElementId> tips;

    std::vector<std::uint8_t> encode() const;
    static std::optional<TipInfoMsg> decode(std::span<const std::uint8_t> bytes);
};

// Push notification over a session tunnel: new version, tips, and any
// coalesced small elements (acknowledgements) inline.
struct NotifyMsg {
    std::string ndo_name;
    std::uint64_t version = 0;
    std::vector<ElementId> tips;
    std::vector<std::vector<std::uint8_t>> elements;

    std::vector<std::uint8_t> encode() const;
    static std::optional<NotifyMsg> decode(std::span<const std::uint8_t> bytes);
};

// Batch of element encodings served for one published version, so a
// catching-up replica fetches a version's delta in one round trip.
struct ElementBundle {
    std::vector<std::vector<std::uint8_t>> elements;

    std::vector<std::uint8_t> encode() const;
    static std::optional<ElementBundle> decode(std::span<const std::uint8_t> bytes);
};

} // namespace tcn
