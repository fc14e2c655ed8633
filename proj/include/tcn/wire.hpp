#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tcn/element.hpp"

namespace tcn {

// Normative on-disk / on-wire element format: version byte 0x01, a one
// byte type tag, then length-prefixed fields in fixed order (ndo name,
// chunk name, chunk hash, version, primary/acked ref, secondary/random
// ref, origin, signature). ABSENT fields encode as length 0.
inline constexpr std::uint8_t kWireVersion = 0x01;
inline constexpr std::uint8_t kTypeCore = 0x01;
inline constexpr std::uint8_t kTypeAck = 0x02;

struct WireError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Encoder {
  public:
    void put_u8(std::uint8_t v) { buf_.push_back(v); }
    void put_field(std::span<const std::uint8_t> bytes);
    void put_field(std::string_view s);
    void put_absent() { put_len(0); }
    void put_u64_field(std::uint64_t v);

    std::vector<std::uint8_t> take() { return std::move(buf_); }
    const std::vector<std::uint8_t>& bytes() const { return buf_; }

  private:
    void put_len(std::uint32_t n);
    std::vector<std::uint8_t> buf_;
};

class Decoder {
  public:
    explicit Decoder(std::span<const std::uint8_t> data) : data_(data) {}

    std::uint8_t get_u8();
    std::vector<std::uint8_t> get_field();
    std::string get_string_field();
    // ABSENT (length 0) yields nullopt.
    std::optional<std::uint64_t> get_u64_field();
    bool done() const { return pos_ == data_.size(); }

  private:
    std::uint32_t get_len();
    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

std::vector<std::uint8_t> canonical_encode(const Element& e);
Element decode_element(std::span<const std::uint8_t> bytes);

ElementId element_id(const Element& e);

// Pluggable signature scheme. The default is a deterministic mock:
// sign(origin, payload) = sha256(origin || payload).
class SignatureScheme {
  public:
    virtual ~SignatureScheme() = default;
    virtual std::vector<std::uint8_t> sign(const std::string& origin,
                                           std::span<const std::uint8_t> payload) const = 0;
    virtual bool verify(const std::string& origin, std::span<const std::uint8_t> payload,
                        std::span<const std::uint8_t> signature) const = 0;
};

class MockSignatureScheme final : public SignatureScheme {
  public:
    std::vector<std::uint8_t> sign(const std::string& origin,
                                   std::span<const std::uint8_t> payload) const override;
    bool verify(const std::string& origin, std::span<const std::uint8_t> payload,
                std::span<const std::uint8_t> signature) const override;
};

const SignatureScheme& mock_signature_scheme();

// Encoding of the element with an empty signature field; what gets signed.
std::vector<std::uint8_t> signing_payload(const Element& e);

void sign_element(Element& e, const SignatureScheme& scheme = mock_signature_scheme());
bool verify_element_signature(const Element& e,
                              const SignatureScheme& scheme = mock_signature_scheme());

} // namespace tcn
