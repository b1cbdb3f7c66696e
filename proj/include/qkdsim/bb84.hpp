#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qkdsim/bits.hpp"
#include "qkdsim/quantum.hpp"
#include "qkdsim/random.hpp"

namespace qkdsim::bb84 {

// A weak-laser emission: `photon_count` photons sharing one polarization
// state. A count of zero is a vacuum pulse that Bob never detects.
struct Pulse {
    std::uint64_t photon_count = 1;
    StateVector state = make_state(0, Basis::rectilinear);
    int origin_bit = 0;
    Basis origin_basis = Basis::rectilinear;
};

enum class Adversary { none, intercept_resend, beam_splitting };

std::string to_string(Adversary a);
std::optional<Adversary> parse_adversary(std::string_view name);

struct Config {
    std::uint64_t n_pulses = 100000;
    // Mean photon number of the Poisson source; 0 selects an ideal
    // single-photon source.
    double mean_photon_number = 0.0;
    double sample_fraction = 0.5;
    double qber_abort_threshold = 0.11;
    Adversary adversary = Adversary::none;
    std::uint64_t seed = 0;

    // Every violated constraint, empty when valid.
    std::vector<std::string> validate() const;
};

struct Report {
    std::uint64_t n_pulses = 0;
    std::uint64_t detected_pulses = 0;
    std::uint64_t sifted_length = 0;
    double sift_rate = 0.0;
    std::uint64_t sample_size = 0;
    double qber = 0.0;
    bool qber_degenerate = false;
    double eve_known_fraction = 0.0;
    bool aborted = false;
    // Keys after the sampled positions have been disclosed and removed.
    Bits alice_key;
    Bits bob_key;
};

struct AlicePreparation {
    Bits bits;
    std::vector<Basis> bases;
    std::vector<Pulse> pulses;
};

struct BobMeasurement {
    std::vector<Basis> bases;
    Bits outcomes;              // 0 where undetected
    std::vector<bool> detected;
};

struct SiftResult {
    Bits alice_key;
    Bits bob_key;
    std::vector<std::size_t> kept_positions;  // 0-based pulse indices
};

struct QberEstimate {
    double qber = 0.0;
    bool degenerate = false;  // empty keys: nothing to compare
    std::vector<std::size_t> sampled_positions;  // indices into the sifted key, ascending
    Bits remaining_alice;
    Bits remaining_bob;
};

struct InterceptResend {
    std::vector<Pulse> forwarded;
    Bits eve_bits;                 // 0 for vacuum pulses
    std::vector<Basis> eve_bases;
    std::vector<bool> eve_measured;
};

struct BeamSplit {
    std::vector<Pulse> forwarded;
    std::vector<std::optional<StateVector>> eve_stored;
};

// Photon count of one emission: 1 when mu == 0, otherwise Poisson(mu).
std::uint64_t pulse_multiplicity(double mu, RandomStream& rng);

// P(count >= 2 | count >= 1) for a Poisson(mu) source, mu > 0.
double multiphoton_fraction(double mu);

AlicePreparation alice_prepare(const Config& config, RandomStream& rng);
// Prepares pulses for caller-chosen bits and bases.
AlicePreparation alice_prepare(std::span<const std::uint8_t> bits, std::span<const Basis> bases, double mu,
                               RandomStream& rng);

BobMeasurement bob_measure(std::span<const Pulse> pulses, RandomStream& rng);
// Measures with caller-chosen bases; `bases` must match `pulses` in length.
BobMeasurement bob_measure(std::span<const Pulse> pulses, std::span<const Basis> bases, RandomStream& rng);

SiftResult sift(std::span<const Basis> alice_bases, std::span<const Basis> bob_bases,
                std::span<const std::uint8_t> alice_bits, std::span<const std::uint8_t> bob_outcomes,
                const std::vector<bool>& detected);

QberEstimate estimate_qber(std::span<const std::uint8_t> alice_key, std::span<const std::uint8_t> bob_key,
                           double sample_fraction, RandomStream& rng);

InterceptResend attack_intercept_resend(std::span<const Pulse> pulses, RandomStream& rng);
BeamSplit attack_beam_splitting(std::span<const Pulse> pulses);

// Everything one run produced; the harness turns this into transcript events.
struct Run {
    Config config;
    AlicePreparation alice;
    std::optional<InterceptResend> intercept;
    std::optional<BeamSplit> split;
    std::vector<Pulse> delivered;  // what reached Bob
    BobMeasurement bob;
    SiftResult sifted;
    // Per sifted position: Eve's bit, or -1 where she holds no information.
    std::vector<int> eve_sifted_bits;
    QberEstimate estimate;
    Report report;
};

Run simulate(const Config& config);
Report run_bb84(const Config& config);

}  // namespace qkdsim::bb84
