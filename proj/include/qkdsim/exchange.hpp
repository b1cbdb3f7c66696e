#pragma once

// Event-driven run of the four-message authenticated three-stage exchange.
//
// Message 1 carries U_A(X), messages 2 and 3 carry U_B U_A(X) relayed through
// the KDC untouched, message 4 carries U_B(X). With relay_pass2_via_kdc off,
// pass 2 travels B -> A as a bare quantum pass and messages 2 and 3 carry no
// payload.

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "qkdsim/auth.hpp"
#include "qkdsim/party.hpp"
#include "qkdsim/random.hpp"
#include "qkdsim/three_stage.hpp"

namespace qkdsim::auth {

struct ExchangeConfig {
    PartyId alice{"alice"};
    PartyId bob{"bob"};
    PartyId kdc{"kdc"};
    Bits message;
    int qubits_per_unit = 1;
    std::size_t redundancy = 1;
    ClockPolicy policy;
    std::int64_t alice_skew_millis = 0;
    std::int64_t bob_skew_millis = 0;
    std::int64_t kdc_skew_millis = 0;
    std::uint64_t hop_millis = 5;
    bool kdc_available = true;
    bool relay_pass2_via_kdc = true;

    std::vector<std::string> validate() const;
};

enum class TransitKind { auth_message, quantum_pass };

std::string to_string(TransitKind k);

struct Transit {
    TransitKind kind = TransitKind::auth_message;
    int step = 0;        // 1..4 for auth messages, 0 for a bare quantum pass
    int pass_index = 0;  // 0 when no payload rides along
    Role sender = Role::alice;
    Role receiver = Role::bob;
    AuthMessage message;              // auth messages only
    std::vector<StateVector> states;  // bare quantum passes only
    bool injected = false;

    const std::vector<StateVector>& payload() const {
        return kind == TransitKind::auth_message ? message.qubit_payload : states;
    }
};

class LinkAdversary {
public:
    struct Action {
        bool capture = false;          // the original is not delivered
        std::vector<Transit> inject;   // delivered next, in order
    };

    virtual ~LinkAdversary() = default;
    // Called once for every honest transmission before delivery.
    virtual Action intercept(const Transit& t) = 0;
};

class ExchangeObserver {
public:
    virtual ~ExchangeObserver() = default;
    virtual void on_transit(const Transit& t, bool captured) = 0;
};

struct AuthReport {
    bool aborted = false;
    std::optional<int> abort_step;
    std::optional<Rejection> abort_reason;
    std::string abort_detail;
    std::optional<Bits> recovered;
    std::optional<SymmetricKey> alice_session_key;
    std::optional<SymmetricKey> bob_session_key;
    // Payload as it entered and left the KDC (relay mode only).
    std::vector<StateVector> kdc_payload_in;
    std::vector<StateVector> kdc_payload_out;
    std::vector<Transit> delivered;  // honest and injected transits actually received
};

struct PartyState {
    PartyId id;
    SymmetricKey long_term;
    NonceCache cache;
    RandomStream rng;
    std::int64_t skew_millis = 0;
};

// Persistent parties across sessions: long-term keys, nonce caches, random
// streams and the shared simulated clock survive between runs.
class AuthWorld {
public:
    AuthWorld(ExchangeConfig config, std::uint64_t seed);

    const ExchangeConfig& config() const noexcept { return config_; }
    ExchangeConfig& config() noexcept { return config_; }

    std::uint64_t clock_millis() const noexcept { return clock_; }
    void advance(std::uint64_t millis) noexcept { clock_ += millis; }
    Timestamp now_for(const PartyState& p) const noexcept;

    PartyState& alice() noexcept { return alice_; }
    PartyState& bob() noexcept { return bob_; }
    PartyState& kdc() noexcept { return kdc_; }
    const std::map<PartyId, SymmetricKey>& directory() const noexcept { return directory_; }

    // One complete session. Secrets are drawn from the parties' streams.
    AuthReport run(LinkAdversary* adversary = nullptr, ExchangeObserver* observer = nullptr);

private:
    ExchangeConfig config_;
    std::uint64_t clock_ = 0;
    PartyState alice_;
    PartyState bob_;
    PartyState kdc_;
    std::map<PartyId, SymmetricKey> directory_;
};

// Fresh world, single session.
AuthReport run_authenticated_exchange(const ExchangeConfig& config, std::uint64_t seed,
                                      LinkAdversary* adversary = nullptr, ExchangeObserver* observer = nullptr);

}  // namespace qkdsim::auth
