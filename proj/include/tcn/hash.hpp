#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tcn {

using Hash256 = std::array<std::uint8_t, 32>;

Hash256 sha256(std::span<const std::uint8_t> data);
Hash256 sha256(std::string_view data);

std::string to_hex(const Hash256& h);
std::optional<Hash256> from_hex(std::string_view hex);

} // namespace tcn
