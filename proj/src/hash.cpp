#include "tcn/hash.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace tcn {

Hash256 sha256(std::span<const std::uint8_t> data) {
    Hash256 out{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
        len != out.size()) {
        throw std::runtime_error("sha256: digest failure");
    }
    return out;
}

Hash256 sha256(std::string_view data) {
    return sha256(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
}

std::string to_hex(const Hash256& h) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    s.reserve(64);
    for (std::uint8_t b : h) {
        s.push_back(digits[b >> 4]);
        s.push_back(digits[b & 0xf]);
    }
    return s;
}

static int hex_val(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

std::optional<Hash256> from_hex(std::string_view hex) {
    if (hex.size() != 64) return std::nullopt;
    Hash256 h{};
    for (size_t i = 0; i < 32; ++i) {
        int hi = hex_val(hex[2 * i]);
        int lo = hex_val(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) return std::nullopt;
        h[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return h;
}

} // namespace tcn
