#include "qkdsim/cipher.hpp"

#include "qkdsim/mixer.hpp"

namespace qkdsim::auth {
namespace {

constexpr std::uint64_t kStreamDomain = 0x53545245414d0001ULL;  // "STREAM"
constexpr std::uint64_t kTagDomain = 0x5441470000000002ULL;     // "TAG"

std::uint64_t load_be64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | p[i];
    return v;
}

std::pair<std::uint64_t, std::uint64_t> key_words(const SymmetricKey& key) {
    return {load_be64(key.bytes.data()), load_be64(key.bytes.data() + 8)};
}

Bytes xor_keystream(const SymmetricKey& key, std::span<const std::uint8_t> in) {
    const auto [k0, k1] = key_words(key);
    const std::uint64_t stream_seed = mix(k0, k1 ^ kStreamDomain);
    Bytes out(in.begin(), in.end());
    for (std::size_t i = 0; i < out.size(); i += 8) {
        const std::uint64_t word = mix(stream_seed, i / 8);
        for (std::size_t b = 0; b < 8 && i + b < out.size(); ++b)
            out[i + b] ^= static_cast<std::uint8_t>(word >> (56 - 8 * b));
    }
    return out;
}

}  // namespace

SymmetricKey SymmetricKey::random(RandomStream& rng) {
    SymmetricKey k;
    for (std::size_t w = 0; w < 2; ++w) {
        const std::uint64_t v = rng.next_u64();
        for (std::size_t b = 0; b < 8; ++b) k.bytes[w * 8 + b] = static_cast<std::uint8_t>(v >> (56 - 8 * b));
    }
    return k;
}

std::uint64_t MixerCipher::keyed_checksum(const SymmetricKey& key, std::span<const std::uint8_t> ciphertext) {
    const auto [k0, k1] = key_words(key);
    std::uint64_t h = mix(k0 ^ kTagDomain, k1);
    for (std::size_t i = 0; i < ciphertext.size(); i += 8) {
        std::uint64_t chunk = 0;
        for (std::size_t b = 0; b < 8; ++b)
            chunk = (chunk << 8) | (i + b < ciphertext.size() ? ciphertext[i + b] : 0U);
        h = mix64(h ^ chunk);
    }
    return mix64(h ^ static_cast<std::uint64_t>(ciphertext.size()));
}

EncryptedBlock MixerCipher::encrypt(const SymmetricKey& key, std::span<const std::uint8_t> plaintext) const {
    EncryptedBlock block;
    block.ciphertext = xor_keystream(key, plaintext);
    block.tag = keyed_checksum(key, block.ciphertext);
    return block;
}

std::optional<Bytes> MixerCipher::decrypt(const SymmetricKey& key, const EncryptedBlock& block) const {
    if (keyed_checksum(key, block.ciphertext) != block.tag) return std::nullopt;
    return xor_keystream(key, block.ciphertext);
}

const Cipher& default_cipher() {
    static const MixerCipher cipher;
    return cipher;
}

EncryptedBlock encrypt(const SymmetricKey& key, std::span<const std::uint8_t> plaintext) {
    return default_cipher().encrypt(key, plaintext);
}

std::optional<Bytes> decrypt(const SymmetricKey& key, const EncryptedBlock& block) {
    return default_cipher().decrypt(key, block);
}

}  // namespace qkdsim::auth
