#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qkdsim/bits.hpp"
#include "qkdsim/cipher.hpp"
#include "qkdsim/quantum.hpp"
#include "qkdsim/random.hpp"
#include "qkdsim/wire.hpp"

namespace qkdsim::auth {

// ---- classical <-> qubit conversion ----

// Each bit becomes `redundancy` consecutive copies of |bit>.
std::vector<StateVector> q_encode(std::span<const std::uint8_t> bits, std::size_t redundancy);

struct QDecoded {
    Bits bits;
    // Set when an even-sized group tied; tied groups decode as 0.
    bool degenerate = false;
};

// Rectilinear measurement of every state, then a per-group majority vote.
// Throws std::invalid_argument if the length is not a multiple of redundancy.
QDecoded q_decode(std::span<const StateVector> states, std::size_t redundancy, RandomStream& rng);

// ---- freshness ----

struct ClockPolicy {
    std::uint64_t window_millis = 30000;
    bool fresh(Timestamp stamped, Timestamp now) const noexcept;
};

// Permanent record of (issuer, nonce) pairs already consumed.
class NonceCache {
public:
    bool contains(const PartyId& issuer, Nonce n) const;
    // Returns false when the pair was already present.
    bool insert(const PartyId& issuer, Nonce n);
    std::size_t size() const noexcept { return seen_.size(); }

private:
    std::set<std::pair<std::string, std::uint64_t>> seen_;
};

// ---- verification outcomes ----

enum class Rejection {
    integrity,
    replayed_nonce,
    stale_timestamp,
    id_mismatch,
    nonce_mismatch,
    unknown_party,
    malformed,
    missing_payload,
    kdc_unreachable,
    duplicate_event,
    no_response,
};

std::string to_string(Rejection r);
std::optional<Rejection> parse_rejection(std::string_view name);

struct VerificationOutcome {
    bool accepted = true;
    Rejection reason = Rejection::malformed;
    std::string detail;

    static VerificationOutcome accept() { return {}; }
    static VerificationOutcome reject(Rejection r, std::string detail = {}) { return {false, r, std::move(detail)}; }
};

// ---- messages ----

struct AuthMessage {
    int step = 1;
    ClassicalFields fields = Step1Fields{PartyId("?"), Nonce{}};
    std::vector<StateVector> qubit_payload;
    std::vector<StateVector> q_encoded_header;
};

// Wraps classical fields and a payload: the header is
// q_encode(bytes_to_bits(serialize(fields)), redundancy).
AuthMessage assemble(ClassicalFields fields, std::vector<StateVector> payload, std::size_t redundancy);

// Everything a sender may need. Which members are required depends on the
// step; build_message lists every missing one in its exception.
struct MessageContext {
    std::optional<PartyId> id_a;
    std::optional<PartyId> id_b;
    std::optional<Nonce> n_a;
    std::optional<Nonce> n_b;
    std::optional<Timestamp> t_b;
    std::optional<SymmetricKey> k_a;
    std::optional<SymmetricKey> k_b;
    std::optional<SymmetricKey> k_s;
    std::optional<EncryptedBlock> ticket;  // forwarded unchanged in step 4
    std::vector<StateVector> payload;
    std::size_t redundancy = 1;
    const Cipher* cipher = &default_cipher();
};

class MissingContext : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

AuthMessage build_message(int step, const MessageContext& ctx);

// The verifying party's view.
struct VerifyContext {
    std::optional<PartyId> self;
    std::optional<PartyId> expected_peer;
    std::optional<SymmetricKey> long_term_key;
    // Long-term keys by party, used by the KDC.
    const std::map<PartyId, SymmetricKey>* directory = nullptr;
    Timestamp now;
    ClockPolicy policy;
    NonceCache* cache = nullptr;
    std::optional<Nonce> issued_nonce;
    std::size_t redundancy = 1;
    const Cipher* cipher = &default_cipher();
    RandomStream* rng = nullptr;  // drives header measurement
};

// What the verifier learned from an accepted message.
struct Verified {
    VerificationOutcome outcome;
    std::optional<ClassicalFields> fields;  // as decoded from the qubit header
    std::optional<PartyId> peer;
    std::optional<Nonce> peer_nonce;
    std::optional<SymmetricKey> session_key;
    std::optional<Timestamp> t_b;
    std::optional<EncryptedBlock> ticket;
    std::optional<KdcRequest> kdc_request;
};

// Step 1 at Bob, step 2 at the KDC, step 3 at Alice, step 4 at Bob. The
// receiver reads the classical fields back out of the qubit header. On
// acceptance the relevant nonce is recorded in ctx.cache.
Verified verify_message(int step, const AuthMessage& msg, const VerifyContext& ctx);

struct KdcContext {
    PartyId self{"kdc"};
    std::map<PartyId, SymmetricKey> directory;
    Timestamp now;
    ClockPolicy policy;
    NonceCache* cache = nullptr;
    std::size_t redundancy = 1;
    const Cipher* cipher = &default_cipher();
    RandomStream* rng = nullptr;  // session keys and header measurement
};

struct KdcIssue {
    VerificationOutcome outcome;
    std::optional<Step3Fields> fields;
    std::optional<SymmetricKey> session_key;
    std::optional<PartyId> id_a;
};

KdcIssue kdc_issue_session(const AuthMessage& msg2, const KdcContext& kdc);

}  // namespace qkdsim::auth
