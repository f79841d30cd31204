#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace noveltyrank {

/// Lower-case hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

std::uint32_t crc32(std::span<const std::uint8_t> bytes);

}  // namespace noveltyrank
