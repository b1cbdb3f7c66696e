#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "qkdsim/bits.hpp"
#include "qkdsim/random.hpp"

namespace qkdsim::auth {

struct SymmetricKey {
    std::array<std::uint8_t, 16> bytes{};

    static SymmetricKey random(RandomStream& rng);
    auto operator<=>(const SymmetricKey&) const = default;
};

struct EncryptedBlock {
    Bytes ciphertext;
    std::uint64_t tag = 0;

    bool operator==(const EncryptedBlock&) const = default;
};

// Pluggable symmetric encryption seam. decrypt() returns nullopt when the
// integrity tag does not verify.
class Cipher {
public:
    virtual ~Cipher() = default;
    virtual std::string name() const = 0;
    virtual EncryptedBlock encrypt(const SymmetricKey& key, std::span<const std::uint8_t> plaintext) const = 0;
    virtual std::optional<Bytes> decrypt(const SymmetricKey& key, const EncryptedBlock& block) const = 0;
};

// Deliberately insecure, deterministic toy cipher: a SplitMix-derived
// keystream XORed onto the plaintext, with a 64-bit keyed checksum chained
// through the same mixer over the ciphertext. Any change to a ciphertext of
// unchanged length always changes the tag, because every chaining step is
// a bijection.
class MixerCipher final : public Cipher {
public:
    std::string name() const override { return "mixer-toy"; }
    EncryptedBlock encrypt(const SymmetricKey& key, std::span<const std::uint8_t> plaintext) const override;
    std::optional<Bytes> decrypt(const SymmetricKey& key, const EncryptedBlock& block) const override;

    static std::uint64_t keyed_checksum(const SymmetricKey& key, std::span<const std::uint8_t> ciphertext);
};

const Cipher& default_cipher();

EncryptedBlock encrypt(const SymmetricKey& key, std::span<const std::uint8_t> plaintext);
std::optional<Bytes> decrypt(const SymmetricKey& key, const EncryptedBlock& block);

}  // namespace qkdsim::auth
