#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qkdsim/auth.hpp"
#include "qkdsim/bb84.hpp"
#include "qkdsim/exchange.hpp"
#include "qkdsim/party.hpp"

namespace qkdsim::harness {

enum class Protocol { bb84, three_stage, three_stage_auth };
enum class AdversaryKind { none, intercept_resend, beam_splitting, mitm, replay };
enum class EventKind { quantum_pass, auth_message, classical_announcement };

std::string to_string(Protocol p);
std::string to_string(AdversaryKind a);
std::string to_string(EventKind k);
std::optional<Protocol> parse_protocol(std::string_view s);
std::optional<AdversaryKind> parse_adversary_kind(std::string_view s);

struct AdversaryPolicy {
    AdversaryKind kind = AdversaryKind::none;
    // mitm: the junk payload Eve forwards to Bob; all zeros when empty.
    Bits fake_bits;
    // replay: which authenticated message is captured and re-sent.
    int replay_step = 4;
    // replay: simulated time between the recorded session and the attacked one.
    std::uint64_t replay_delay_millis = 1000;
    // replay: duplicate within the live session instead of a later session.
    bool replay_same_session = false;
};

struct ScenarioConfig {
    Protocol protocol = Protocol::three_stage;
    AdversaryPolicy adversary;
    std::uint64_t seed = 1;
    // Explicit message; when empty, message_length random bits are drawn.
    Bits message;
    std::size_t message_length = 8;
    int qubits_per_unit = 1;
    bb84::Config bb84;       // seed and adversary are taken from the scenario
    auth::ExchangeConfig auth;  // message and qubits_per_unit likewise

    // Every violated constraint, empty when valid.
    std::vector<std::string> validate() const;
};

class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    std::vector<std::string> problems_;
};

struct ChannelEvent {
    std::uint64_t seq = 0;
    int session = 1;
    Role sender = Role::alice;
    Role receiver = Role::bob;
    EventKind kind = EventKind::quantum_pass;
    int step = 0;        // authenticated message number, 0 otherwise
    int pass_index = 0;  // three-stage pass carried, 0 otherwise
    bool captured = false;  // taken off the channel by Eve
    bool injected = false;  // placed on the channel by Eve
    // Serialized classical fields (hex) for auth messages, announcement text
    // otherwise.
    std::string content;
    std::vector<StateVector> states;  // payload qubits
    std::optional<auth::AuthMessage> message;
    std::uint64_t digest = 0;
};

std::uint64_t event_digest(const ChannelEvent& e);

struct Bb84Metrics {
    std::uint64_t n_pulses = 0;
    std::uint64_t detected_pulses = 0;
    std::uint64_t sifted_length = 0;
    std::uint64_t sample_size = 0;
    std::uint64_t key_length = 0;
    bool qber_degenerate = false;
};

struct ScenarioReport {
    Protocol protocol = Protocol::three_stage;
    AdversaryKind adversary = AdversaryKind::none;
    std::uint64_t seed = 0;
    bool aborted = false;
    std::optional<int> abort_step;
    std::optional<std::string> abort_reason;
    std::string abort_detail;
    std::optional<double> qber;
    std::optional<double> sift_rate;
    std::optional<double> eve_known_fraction;
    // Lowest fidelity between Eve's copy of a payload unit and Alice's.
    std::optional<double> eve_payload_fidelity;
    Bits sent_bits;
    std::optional<Bits> recovered_bits;
    std::optional<Bits> eve_recovered_bits;
    // Payload entering and leaving the KDC was bit-identical.
    std::optional<bool> kdc_blind;
    std::optional<Bb84Metrics> bb84;
    std::vector<ChannelEvent> transcript;
};

// Throws ConfigError before anything runs when the config is invalid.
ScenarioReport run_scenario(const ScenarioConfig& config);

struct MetricSummary {
    std::size_t count = 0;
    double mean = 0.0;
    double std_error = 0.0;
};

struct BatchReport {
    std::uint64_t master_seed = 0;
    std::size_t trials = 0;
    std::size_t detections = 0;      // trials that aborted
    std::size_t recovered_exact = 0; // trials where Bob's bits equal Alice's
    std::optional<MetricSummary> qber;
    std::optional<MetricSummary> sift_rate;
    std::optional<MetricSummary> eve_known_fraction;
    std::optional<MetricSummary> eve_payload_fidelity;
    std::vector<ScenarioReport> rows;  // in trial order, transcripts dropped
};

// Seed of trial i in a batch: mix(master_seed, i).
std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t trial);

// Throws ConfigError for an invalid config or trials == 0.
BatchReport run_batch(const ScenarioConfig& config, std::size_t trials);

// Copy of the latest captured auth message of `target_step` from a recorded
// transcript, re-addressed as an Eve injection. nullopt if none was recorded.
std::optional<ChannelEvent> replay_adversary(const std::vector<ChannelEvent>& fragment, int target_step);

}  // namespace qkdsim::harness
