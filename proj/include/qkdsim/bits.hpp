#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qkdsim {

// One element per bit, each 0 or 1.
using Bits = std::vector<std::uint8_t>;
using Bytes = std::vector<std::uint8_t>;

// "0110" <-> {0,1,1,0}. Throws std::invalid_argument on any other character.
Bits parse_bits(std::string_view text);
std::string format_bits(std::span<const std::uint8_t> bits);

// MSB-first within each byte.
Bits bytes_to_bits(std::span<const std::uint8_t> bytes);
// bits.size() must be a multiple of 8.
Bytes bits_to_bytes(std::span<const std::uint8_t> bits);

std::string to_hex(std::span<const std::uint8_t> bytes);

}  // namespace qkdsim
