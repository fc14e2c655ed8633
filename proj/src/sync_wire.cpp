#include "tcn/sync_wire.hpp"

#include "tcn/wire.hpp"

namespace tcn {
namespace {

constexpr std::uint8_t kMsgOffer = 0x10;
constexpr std::uint8_t kMsgTipInfo = 0x11;
constexpr std::uint8_t kMsgNotify = 0x12;
constexpr std::uint8_t kMsgBundle = 0x13;

void put_hash_list(Encoder& enc, const std::vector<ElementId>& ids) {
    enc.put_u64_field(ids.size());
    for (const auto& id : ids) enc.put_field(std::span<const std::uint8_t>(id.data(), id.size()));
}

bool get_hash_list(Decoder& dec, std::vector<ElementId>& out) {
    auto n = dec.get_u64_field();
    if (!n) return false;
    for (std::uint64_t i = 0; i < *n; ++i) {
        auto f = dec.get_field();
        if (f.size() != 32) return false;
        ElementId id;
        std::copy(f.begin(), f.end(), id.begin());
        out.push_back(id);
    }
    return true;
}

void put_blob_list(Encoder& enc, const std::vector<std::vector<std::uint8_t>>& blobs) {
    enc.put_u64_field(blobs.size());
    for (const auto& b : blobs) enc.put_field(std::span<const std::uint8_t>(b.data(), b.size()));
}

bool get_blob_list(Decoder& dec, std::vector<std::vector<std::uint8_t>>& out) {
    auto n = dec.get_u64_field();
    if (!n) return false;
    for (std::uint64_t i = 0; i < *n; ++i) out.push_back(dec.get_field());
    return true;
}

} // namespace

std::vector<std::uint8_t> SyncOffer::encode() const {
    Encoder enc;
    enc.put_u8(kMsgOffer);
    enc.put_field(ndo_name);
    enc.put_u64_field(nonce);
    enc.put_field(responder_id);
    enc.put_u64_field(static_cast<std::uint64_t>(provisional_ttl_s * 1000.0));
    return enc.take();
}

std::optional<SyncOffer> SyncOffer::decode(std::span<const std::uint8_t> bytes) {
    try {
        Decoder dec(bytes);
        if (dec.get_u8() != kMsgOffer) return std::nullopt;
        SyncOffer out;
        out.ndo_name = dec.get_string_field();
        auto nonce = dec.get_u64_field();
        if (!nonce) return std::nullopt;
        out.nonce = *nonce;
        out.responder_id = dec.get_string_field();
        auto ttl_ms = dec.get_u64_field();
        if (!ttl_ms) return std::nullopt;
        out.provisional_ttl_s = static_cast<double>(*ttl_ms) / 1000.0;
        return out;
    } catch (const WireError&) {
        return std::nullopt;
    }
}

std::vector<std::uint8_t> TipInfoMsg::encode() const {
    Encoder enc;
    enc.put_u8(kMsgTipInfo);
    enc.put_field(ndo_name);
    enc.put_u64_field(version);
    put_hash_list(enc, tips);
    return enc.take();
}

std::optional<TipInfoMsg> TipInfoMsg::decode(std::span<const std::uint8_t> bytes) {
    try {
        Decoder dec(bytes);
        if (dec.get_u8() != kMsgTipInfo) return std::nullopt;
        TipInfoMsg out;
        out.ndo_name = dec.get_string_field();
        auto v = dec.get_u64_field();
        if (!v) return std::nullopt;
        out.version = *v;
        if (!get_hash_list(dec, out.tips)) return std::nullopt;
        return out;
    } catch (const WireError&) {
        return std::nullopt;
    }
}

std::vector<std::uint8_t> NotifyMsg::encode() const {
    Encoder enc;
    enc.put_u8(kMsgNotify);
    enc.put_field(ndo_name);
    enc.put_u64_field(version);
    put_hash_list(enc, tips);
    put_blob_list(enc, elements);
    return enc.take();
}

std::optional<NotifyMsg> NotifyMsg::decode(std::span<const std::uint8_t> bytes) {
    try {
        Decoder dec(bytes);
        if (dec.get_u8() != kMsgNotify) return std::nullopt;
        NotifyMsg out;
        out.ndo_name = dec.get_string_field();
        auto v = dec.get_u64_field();
        if (!v) return std::nullopt;
        out.version = *v;
        if (!get_hash_list(dec, out.tips)) return std::nullopt;
        if (!get_blob_list(dec, out.elements)) return std::nullopt;
        return out;
    } catch (const WireError&) {
        return std::nullopt;
    }
}

std::vector<std::uint8_t> ElementBundle::encode() const {
    Encoder enc;
    enc.put_u8(kMsgBundle);
    put_blob_list(enc, elements);
    return enc.take();
}

std::optional<ElementBundle> ElementBundle::decode(std::span<const std::uint8_t> bytes) {
    try {
        Decoder dec(bytes);
        if (dec.get_u8() != kMsgBundle) return std::nullopt;
        ElementBundle out;
        if (!get_blob_list(dec, out.elements)) return std::nullopt;
        return out;
    } catch (const WireError&) {
        return std::nullopt;
    }
}

} // namespace tcn
