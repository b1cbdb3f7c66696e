#include "qkdsim/bits.hpp"

#include <stdexcept>

namespace qkdsim {

Bits parse_bits(std::string_view text) {
    Bits out;
    out.reserve(text.size());
    for (char c : text) {
        if (c != '0' && c != '1') throw std::invalid_argument("parse_bits: expected only '0' and '1'");
        out.push_back(static_cast<std::uint8_t>(c - '0'));
    }
    return out;
}

std::string format_bits(std::span<const std::uint8_t> bits) {
    std::string s;
    s.reserve(bits.size());
    for (auto b : bits) s.push_back(b ? '1' : '0');
    return s;
}

Bits bytes_to_bits(std::span<const std::uint8_t> bytes) {
    Bits out;
    out.reserve(bytes.size() * 8);
    for (auto byte : bytes)
        for (int k = 7; k >= 0; --k) out.push_back(static_cast<std::uint8_t>((byte >> k) & 1U));
    return out;
}

Bytes bits_to_bytes(std::span<const std::uint8_t> bits) {
    if (bits.size() % 8 != 0) throw std::invalid_argument("bits_to_bytes: length must be a multiple of 8");
    Bytes out(bits.size() / 8, 0);
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) out[i / 8] |= static_cast<std::uint8_t>(0x80U >> (i % 8));
    return out;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string s;
    s.reserve(bytes.size() * 2);
    for (auto b : bytes) {
        s.push_back(kDigits[b >> 4]);
        s.push_back(kDigits[b & 0xF]);
    }
    return s;
}

}  // namespace qkdsim
