#include "tcn/wire.hpp"

#include "tcn/hash.hpp"

namespace tcn {

void Encoder::put_len(std::uint32_t n) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>((n >> (8 * i)) & 0xff));
}

void Encoder::put_field(std::span<const std::uint8_t> bytes) {
    put_len(static_cast<std::uint32_t>(bytes.size()));
    buf_.insert(buf_.end(), bytes.begin(), bytes.end());
}

void Encoder::put_field(std::string_view s) {
    put_field(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(s.data()),
                                            s.size()));
}

void Encoder::put_u64_field(std::uint64_t v) {
    std::uint8_t b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>((v >> (8 * i)) & 0xff);
    put_field(std::span<const std::uint8_t>(b, 8));
}

std::uint8_t Decoder::get_u8() {
    if (pos_ + 1 > data_.size()) throw WireError("truncated element");
    return data_[pos_++];
}

std::uint32_t Decoder::get_len() {
    if (pos_ + 4 > data_.size()) throw WireError("truncated length prefix");
    std::uint32_t n = 0;
    for (int i = 0; i < 4; ++i) n |= static_cast<std::uint32_t>(data_[pos_++]) << (8 * i);
    return n;
}

std::vector<std::uint8_t> Decoder::get_field() {
    std::uint32_t n = get_len();
    if (pos_ + n > data_.size()) throw WireError("truncated field");
    std::vector<std::uint8_t> out(data_.begin() + pos_, data_.begin() + pos_ + n);
    pos_ += n;
    return out;
}

std::string Decoder::get_string_field() {
    auto f = get_field();
    return std::string(f.begin(), f.end());
}

std::optional<std::uint64_t> Decoder::get_u64_field() {
    auto f = get_field();
    if (f.empty()) return std::nullopt;
    if (f.size() != 8) throw WireError("bad u64 field length");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(f[i]) << (8 * i);
    return v;
}

namespace {

void put_ref(Encoder& enc, const std::optional<ElementId>& ref) {
    if (ref)
        enc.put_field(std::span<const std::uint8_t>(ref->data(), ref->size()));
    else
        enc.put_absent();
}

std::optional<ElementId> get_ref(Decoder& dec) {
    auto f = dec.get_field();
    if (f.empty()) return std::nullopt;
    if (f.size() != 32) throw WireError("bad reference length");
    ElementId id{};
    std::copy(f.begin(), f.end(), id.begin());
    return id;
}

std::vector<std::uint8_t> encode_impl(const Element& e, bool with_signature) {
    Encoder enc;
    enc.put_u8(kWireVersion);
    if (const auto* core = std::get_if<CoreElement>(&e)) {
        enc.put_u8(kTypeCore);
        enc.put_field(core->ndo_name);
        enc.put_field(core->chunk.chunk_name);
        enc.put_field(std::span<const std::uint8_t>(core->chunk.chunk_hash.data(), 32));
        enc.put_u64_field(core->version);
        put_ref(enc, core->primary_ref);
        put_ref(enc, core->secondary_ref);
        enc.put_field(core->origin);
        enc.put_u64_field(core->chunk.size_bytes);
        if (with_signature)
            enc.put_field(std::span<const std::uint8_t>(core->signature.data(),
                                                        core->signature.size()));
        else
            enc.put_absent();
    } else {
        const auto& ack = std::get<AckElement>(e);
        enc.put_u8(kTypeAck);
        enc.put_field(ack.ndo_name);
        enc.put_absent(); // no chunk name
        enc.put_absent(); // no chunk hash
        enc.put_absent(); // no version
        put_ref(enc, std::optional<ElementId>(ack.acked_ref));
        put_ref(enc, std::optional<ElementId>(ack.random_ref));
        enc.put_field(ack.origin);
        enc.put_absent(); // no chunk size
        if (with_signature)
            enc.put_field(
                std::span<const std::uint8_t>(ack.signature.data(), ack.signature.size()));
        else
            enc.put_absent();
    }
    return enc.take();
}

} // namespace

std::vector<std::uint8_t> canonical_encode(const Element& e) { return encode_impl(e, true); }

std::vector<std::uint8_t> signing_payload(const Element& e) { return encode_impl(e, false); }

Element decode_element(std::span<const std::uint8_t> bytes) {
    Decoder dec(bytes);
    if (dec.get_u8() != kWireVersion) throw WireError("unknown wire version");
    std::uint8_t type = dec.get_u8();
    std::string ndo = dec.get_string_field();
    std::string chunk_name = dec.get_string_field();
    auto chunk_hash_f = dec.get_field();
    auto version = dec.get_u64_field();
    auto ref1 = get_ref(dec);
    auto ref2 = get_ref(dec);
    std::string origin = dec.get_string_field();
    auto chunk_size = dec.get_u64_field();
    auto signature = dec.get_field();
    if (!dec.done()) throw WireError("trailing bytes after element");

    if (type == kTypeCore) {
        if (chunk_hash_f.size() != 32) throw WireError("bad chunk hash length");
        CoreElement core;
        core.ndo_name = std::move(ndo);
        core.chunk.chunk_name = std::move(chunk_name);
        std::copy(chunk_hash_f.begin(), chunk_hash_f.end(), core.chunk.chunk_hash.begin());
        if (!version) throw WireError("core element missing version");
        core.version = *version;
        core.primary_ref = ref1;
        core.secondary_ref = ref2;
        core.origin = std::move(origin);
        core.chunk.size_bytes = chunk_size.value_or(0);
        core.signature = std::move(signature);
        return core;
    }
    if (type == kTypeAck) {
        if (!chunk_name.empty() || !chunk_hash_f.empty() || version || chunk_size)
            throw WireError("ack element with chunk fields");
        if (!ref1 || !ref2) throw WireError("ack element missing references");
        AckElement ack;
        ack.ndo_name = std::move(ndo);
        ack.acked_ref = *ref1;
        ack.random_ref = *ref2;
        ack.origin = std::move(origin);
        ack.signature = std::move(signature);
        return ack;
    }
    throw WireError("unknown element type tag");
}

ElementId element_id(const Element& e) {
    auto bytes = canonical_encode(e);
    return sha256(std::span<const std::uint8_t>(bytes.data(), bytes.size()));
}

std::vector<std::uint8_t> MockSignatureScheme::sign(const std::string& origin,
                                                    std::span<const std::uint8_t> payload) const {
    std::vector<std::uint8_t> buf(origin.begin(), origin.end());
    buf.insert(buf.end(), payload.begin(), payload.end());
    Hash256 h = sha256(std::span<const std::uint8_t>(buf.data(), buf.size()));
    return std::vector<std::uint8_t>(h.begin(), h.end());
}

bool MockSignatureScheme::verify(const std::string& origin,
                                 std::span<const std::uint8_t> payload,
                                 std::span<const std::uint8_t> signature) const {
    auto expect = sign(origin, payload);
    return signature.size() == expect.size() &&
           std::equal(signature.begin(), signature.end(), expect.begin());
}

const SignatureScheme& mock_signature_scheme() {
    static MockSignatureScheme scheme;
    return scheme;
}

void sign_element(Element& e, const SignatureScheme& scheme) {
    auto payload = signing_payload(e);
    auto sig = scheme.sign(origin_of(e), std::span<const std::uint8_t>(payload));
    std::visit([&](auto& x) { x.signature = std::move(sig); }, e);
}

bool verify_element_signature(const Element& e, const SignatureScheme& scheme) {
    auto payload = signing_payload(e);
    const auto& sig = std::visit([](const auto& x) -> const std::vector<std::uint8_t>& {
        return x.signature;
    }, e);
    return scheme.verify(origin_of(e), std::span<const std::uint8_t>(payload),
                         std::span<const std::uint8_t>(sig));
}

} // namespace tcn
