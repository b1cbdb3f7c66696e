#include "qkdsim/bb84.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qkdsim::bb84 {
namespace {

// Sub-stream indices split off the run seed, one per actor.
constexpr std::uint64_t kAliceStream = 1;
constexpr std::uint64_t kEveStream = 2;
constexpr std::uint64_t kBobStream = 3;
constexpr std::uint64_t kSampleStream = 4;

Basis random_basis(RandomStream& rng) { return rng.bit() ? Basis::diagonal : Basis::rectilinear; }

Pulse make_pulse(int bit, Basis basis, std::uint64_t count) {
    return Pulse{count, make_state(bit, basis), bit, basis};
}

}  // namespace

std::string to_string(Adversary a) {
    switch (a) {
        case Adversary::none: return "none";
        case Adversary::intercept_resend: return "intercept_resend";
        case Adversary::beam_splitting: return "beam_splitting";
    }
    return "unknown";
}

std::optional<Adversary> parse_adversary(std::string_view name) {
    if (name == "none") return Adversary::none;
    if (name == "intercept_resend") return Adversary::intercept_resend;
    if (name == "beam_splitting") return Adversary::beam_splitting;
    return std::nullopt;
}

std::vector<std::string> Config::validate() const {
    std::vector<std::string> errors;
    if (n_pulses == 0) errors.emplace_back("bb84.n_pulses must be positive");
    if (!(mean_photon_number >= 0.0) || mean_photon_number > 100.0)
        errors.emplace_back("bb84.mean_photon_number must be in [0, 100]");
    if (!(sample_fraction > 0.0 && sample_fraction < 1.0))
        errors.emplace_back("bb84.sample_fraction must be in (0, 1)");
    if (!(qber_abort_threshold > 0.0 && qber_abort_threshold < 1.0))
        errors.emplace_back("bb84.qber_abort_threshold must be in (0, 1)");
    return errors;
}

std::uint64_t pulse_multiplicity(double mu, RandomStream& rng) {
    if (!(mu >= 0.0)) throw std::invalid_argument("pulse_multiplicity: mu must be >= 0");
    if (mu == 0.0) return 1;
    return rng.poisson(mu);
}

double multiphoton_fraction(double mu) {
    if (!(mu > 0.0)) throw std::invalid_argument("multiphoton_fraction: mu must be > 0");
    const double p0 = std::exp(-mu);
    return (1.0 - p0 - mu * p0) / (1.0 - p0);
}

AlicePreparation alice_prepare(const Config& config, RandomStream& rng) {
    AlicePreparation prep;
    prep.bits.reserve(config.n_pulses);
    prep.bases.reserve(config.n_pulses);
    prep.pulses.reserve(config.n_pulses);
    for (std::uint64_t i = 0; i < config.n_pulses; ++i) {
        const int bit = rng.bit();
        const Basis basis = random_basis(rng);
        prep.bits.push_back(static_cast<std::uint8_t>(bit));
        prep.bases.push_back(basis);
        prep.pulses.push_back(make_pulse(bit, basis, pulse_multiplicity(config.mean_photon_number, rng)));
    }
    return prep;
}

AlicePreparation alice_prepare(std::span<const std::uint8_t> bits, std::span<const Basis> bases, double mu,
                               RandomStream& rng) {
    if (bits.size() != bases.size()) throw std::invalid_argument("alice_prepare: bits and bases differ in length");
    AlicePreparation prep;
    prep.bits.assign(bits.begin(), bits.end());
    prep.bases.assign(bases.begin(), bases.end());
    for (std::size_t i = 0; i < bits.size(); ++i)
        prep.pulses.push_back(make_pulse(bits[i], bases[i], pulse_multiplicity(mu, rng)));
    return prep;
}

BobMeasurement bob_measure(std::span<const Pulse> pulses, RandomStream& rng) {
    std::vector<Basis> bases;
    bases.reserve(pulses.size());
    for (std::size_t i = 0; i < pulses.size(); ++i) bases.push_back(random_basis(rng));
    return bob_measure(pulses, bases, rng);
}

BobMeasurement bob_measure(std::span<const Pulse> pulses, std::span<const Basis> bases, RandomStream& rng) {
    if (bases.size() != pulses.size()) throw std::invalid_argument("bob_measure: one basis per pulse required");
    BobMeasurement m;
    m.bases.assign(bases.begin(), bases.end());
    m.outcomes.assign(pulses.size(), 0);
    m.detected.assign(pulses.size(), false);
    for (std::size_t i = 0; i < pulses.size(); ++i) {
        if (pulses[i].photon_count == 0) continue;
        // All photons of a pulse share one state; a single click is recorded.
        m.outcomes[i] = static_cast<std::uint8_t>(measure(pulses[i].state, bases[i], rng).first);
        m.detected[i] = true;
    }
    return m;
}

SiftResult sift(std::span<const Basis> alice_bases, std::span<const Basis> bob_bases,
                std::span<const std::uint8_t> alice_bits, std::span<const std::uint8_t> bob_outcomes,
                const std::vector<bool>& detected) {
    const std::size_t n = alice_bases.size();
    if (bob_bases.size() != n || alice_bits.size() != n || bob_outcomes.size() != n || detected.size() != n)
        throw std::invalid_argument("sift: input sequences differ in length");
    SiftResult r;
    for (std::size_t i = 0; i < n; ++i) {
        if (!detected[i] || alice_bases[i] != bob_bases[i]) continue;
        r.kept_positions.push_back(i);
        r.alice_key.push_back(alice_bits[i]);
        r.bob_key.push_back(bob_outcomes[i]);
    }
    return r;
}

QberEstimate estimate_qber(std::span<const std::uint8_t> alice_key, std::span<const std::uint8_t> bob_key,
                           double sample_fraction, RandomStream& rng) {
    if (alice_key.size() != bob_key.size()) throw std::invalid_argument("estimate_qber: keys differ in length");
    if (!(sample_fraction > 0.0 && sample_fraction < 1.0))
        throw std::invalid_argument("estimate_qber: sample_fraction must be in (0, 1)");
    QberEstimate est;
    const std::size_t n = alice_key.size();
    if (n == 0) {
        est.degenerate = true;
        return est;
    }
    const auto sample = static_cast<std::size_t>(std::ceil(sample_fraction * static_cast<double>(n)));

    // Partial Fisher-Yates: the first `sample` slots become the disclosed set.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t i = 0; i < sample; ++i) std::swap(order[i], order[i + rng.below(n - i)]);
    est.sampled_positions.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(sample));
    std::sort(est.sampled_positions.begin(), est.sampled_positions.end());

    std::vector<bool> disclosed(n, false);
    std::size_t errors = 0;
    for (auto p : est.sampled_positions) {
        disclosed[p] = true;
        if (alice_key[p] != bob_key[p]) ++errors;
    }
    est.qber = static_cast<double>(errors) / static_cast<double>(sample);
    for (std::size_t i = 0; i < n; ++i) {
        if (disclosed[i]) continue;
        est.remaining_alice.push_back(alice_key[i]);
        est.remaining_bob.push_back(bob_key[i]);
    }
    return est;
}

InterceptResend attack_intercept_resend(std::span<const Pulse> pulses, RandomStream& rng) {
    InterceptResend r;
    r.forwarded.reserve(pulses.size());
    for (const auto& p : pulses) {
        const Basis basis = random_basis(rng);
        r.eve_bases.push_back(basis);
        if (p.photon_count == 0) {
            r.eve_bits.push_back(0);
            r.eve_measured.push_back(false);
            r.forwarded.push_back(p);
            continue;
        }
        const int bit = measure(p.state, basis, rng).first;
        r.eve_bits.push_back(static_cast<std::uint8_t>(bit));
        r.eve_measured.push_back(true);
        // The resent pulse keeps the photon count but carries Eve's state.
        Pulse fresh{p.photon_count, make_state(bit, basis), p.origin_bit, p.origin_basis};
        r.forwarded.push_back(std::move(fresh));
    }
    return r;
}

BeamSplit attack_beam_splitting(std::span<const Pulse> pulses) {
    BeamSplit r;
    r.forwarded.reserve(pulses.size());
    r.eve_stored.reserve(pulses.size());
    for (const auto& p : pulses) {
        Pulse out = p;
        if (p.photon_count >= 2) {
            r.eve_stored.emplace_back(p.state);
            out.photon_count -= 1;
        } else {
            r.eve_stored.emplace_back(std::nullopt);
        }
        r.forwarded.push_back(std::move(out));
    }
    return r;
}

Run simulate(const Config& config) {
    if (auto errors = config.validate(); !errors.empty()) throw std::invalid_argument(errors.front());

    const RandomStream root(config.seed);
    RandomStream alice_rng = root.split(kAliceStream);
    RandomStream eve_rng = root.split(kEveStream);
    RandomStream bob_rng = root.split(kBobStream);
    RandomStream sample_rng = root.split(kSampleStream);

    Run run;
    run.config = config;
    run.alice = alice_prepare(config, alice_rng);

    switch (config.adversary) {
        case Adversary::none:
            run.delivered = run.alice.pulses;
            break;
        case Adversary::intercept_resend:
            run.intercept = attack_intercept_resend(run.alice.pulses, eve_rng);
            run.delivered = run.intercept->forwarded;
            break;
        case Adversary::beam_splitting:
            run.split = attack_beam_splitting(run.alice.pulses);
            run.delivered = run.split->forwarded;
            break;
    }

    run.bob = bob_measure(run.delivered, bob_rng);
    run.sifted = sift(run.alice.bases, run.bob.bases, run.alice.bits, run.bob.outcomes, run.bob.detected);

    // Bases of kept positions are public; Eve uses them here.
    run.eve_sifted_bits.assign(run.sifted.kept_positions.size(), -1);
    for (std::size_t k = 0; k < run.sifted.kept_positions.size(); ++k) {
        const std::size_t i = run.sifted.kept_positions[k];
        if (run.intercept && run.intercept->eve_measured[i] && run.intercept->eve_bases[i] == run.alice.bases[i]) {
            run.eve_sifted_bits[k] = run.intercept->eve_bits[i];
        } else if (run.split && run.split->eve_stored[i]) {
            run.eve_sifted_bits[k] = measure(*run.split->eve_stored[i], run.alice.bases[i], eve_rng).first;
        }
    }

    run.estimate = estimate_qber(run.sifted.alice_key, run.sifted.bob_key, config.sample_fraction, sample_rng);

    Report& rep = run.report;
    rep.n_pulses = config.n_pulses;
    rep.detected_pulses = static_cast<std::uint64_t>(std::count(run.bob.detected.begin(), run.bob.detected.end(), true));
    rep.sifted_length = run.sifted.kept_positions.size();
    rep.sift_rate = rep.detected_pulses ? static_cast<double>(rep.sifted_length) / static_cast<double>(rep.detected_pulses) : 0.0;
    rep.sample_size = run.estimate.sampled_positions.size();
    rep.qber = run.estimate.qber;
    rep.qber_degenerate = run.estimate.degenerate;
    const auto known = std::count_if(run.eve_sifted_bits.begin(), run.eve_sifted_bits.end(), [](int b) { return b >= 0; });
    rep.eve_known_fraction = rep.sifted_length ? static_cast<double>(known) / static_cast<double>(rep.sifted_length) : 0.0;
    rep.aborted = rep.qber > config.qber_abort_threshold;
    rep.alice_key = run.estimate.remaining_alice;
    rep.bob_key = run.estimate.remaining_bob;
    return run;
}

Report run_bb84(const Config& config) { return simulate(config).report; }

}  // namespace qkdsim::bb84
