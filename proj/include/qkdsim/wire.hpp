#pragma once

// Byte-exact encoding of the classical protocol fields.
//
// Every field is written as a 2-byte big-endian length followed by that many
// content bytes. Content encodings:
//   party id         UTF-8 bytes, 1..32
//   nonce, timestamp 8-byte big-endian unsigned integer
//   symmetric key    16 raw bytes
//   encrypted block  ciphertext bytes followed by the 8-byte big-endian tag
// Records are the fields concatenated in protocol order, with no framing.
// The full layout is documented in docs/wire_format.md.

#include <compare>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "qkdsim/bits.hpp"
#include "qkdsim/cipher.hpp"

namespace qkdsim::auth {

class WireError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class PartyId {
public:
    // 1..32 bytes; throws std::invalid_argument otherwise.
    explicit PartyId(std::string id);

    const std::string& str() const noexcept { return id_; }
    auto operator<=>(const PartyId&) const = default;

private:
    std::string id_;
};

struct Nonce {
    std::uint64_t value = 0;
    auto operator<=>(const Nonce&) const = default;
};

struct Timestamp {
    std::uint64_t millis = 0;
    auto operator<=>(const Timestamp&) const = default;
};

class FieldWriter {
public:
    FieldWriter& raw(std::span<const std::uint8_t> content);
    FieldWriter& id(const PartyId& id);
    FieldWriter& u64(std::uint64_t v);
    FieldWriter& nonce(Nonce n) { return u64(n.value); }
    FieldWriter& timestamp(Timestamp t) { return u64(t.millis); }
    FieldWriter& key(const SymmetricKey& k);
    FieldWriter& block(const EncryptedBlock& b);

    const Bytes& bytes() const noexcept { return out_; }
    Bytes take() { return std::move(out_); }

private:
    Bytes out_;
};

// Throws WireError on truncated or malformed input.
class FieldReader {
public:
    explicit FieldReader(std::span<const std::uint8_t> in) : in_(in) {}

    std::span<const std::uint8_t> raw();
    PartyId id();
    std::uint64_t u64();
    Nonce nonce() { return Nonce{u64()}; }
    Timestamp timestamp() { return Timestamp{u64()}; }
    SymmetricKey key();
    EncryptedBlock block();

    bool at_end() const noexcept { return pos_ == in_.size(); }
    void expect_end() const;

private:
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

// ---- encrypted payloads ----

// Sealed by Bob for the KDC: ID_A || N_a || T_b
struct KdcRequest {
    PartyId id_a;
    Nonce n_a;
    Timestamp t_b;
    bool operator==(const KdcRequest&) const = default;
};

// Sealed by the KDC for Alice: ID_B || N_a || K_s || T_b
struct AlicePackage {
    PartyId id_b;
    Nonce n_a;
    SymmetricKey k_s;
    Timestamp t_b;
    bool operator==(const AlicePackage&) const = default;
};

// Sealed by the KDC for Bob and forwarded by Alice: ID_A || K_s || T_b
struct Ticket {
    PartyId id_a;
    SymmetricKey k_s;
    Timestamp t_b;
    bool operator==(const Ticket&) const = default;
};

Bytes serialize(const KdcRequest& r);
Bytes serialize(const AlicePackage& p);
Bytes serialize(const Ticket& t);
KdcRequest parse_kdc_request(std::span<const std::uint8_t> bytes);
AlicePackage parse_alice_package(std::span<const std::uint8_t> bytes);
Ticket parse_ticket(std::span<const std::uint8_t> bytes);
// E_Ks[N_b] plaintext: a single nonce field.
Bytes serialize_nonce(Nonce n);
Nonce parse_nonce(std::span<const std::uint8_t> bytes);

// ---- message classical fields ----

// 1. A -> B: ID_A || N_a
struct Step1Fields {
    PartyId id_a;
    Nonce n_a;
    bool operator==(const Step1Fields&) const = default;
};

// 2. B -> KDC: ID_B || N_b || E_Kb[ID_A || N_a || T_b]
struct Step2Fields {
    PartyId id_b;
    Nonce n_b;
    EncryptedBlock kdc_request;
    bool operator==(const Step2Fields&) const = default;
};

// 3. KDC -> A: E_Ka[ID_B || N_a || K_s || T_b] || E_Kb[ID_A || K_s || T_b] || N_b
struct Step3Fields {
    EncryptedBlock alice_package;
    EncryptedBlock ticket;
    Nonce n_b;
    bool operator==(const Step3Fields&) const = default;
};

// 4. A -> B: E_Kb[ID_A || K_s || T_b] || E_Ks[N_b]
struct Step4Fields {
    EncryptedBlock ticket;
    EncryptedBlock nonce_proof;
    bool operator==(const Step4Fields&) const = default;
};

using ClassicalFields = std::variant<Step1Fields, Step2Fields, Step3Fields, Step4Fields>;

int step_of(const ClassicalFields& f);
Bytes serialize(const ClassicalFields& f);
ClassicalFields parse_fields(int step, std::span<const std::uint8_t> bytes);

}  // namespace qkdsim::auth
