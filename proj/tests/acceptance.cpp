// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "qkdsim/bb84.hpp"
#include "qkdsim/config.hpp"
#include "qkdsim/exchange.hpp"
#include "qkdsim/harness.hpp"
#include "qkdsim/quantum.hpp"
#include "qkdsim/report.hpp"
#include "qkdsim/three_stage.hpp"
#include "test_support.hpp"

using namespace qkdsim;
namespace ts = qkdsim::test_support;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

// Records the first failure only; `detail` then explains it.
class Check {
public:
    void expect(bool ok, const std::string& what) {
        if (!ok && out_.pass) {
            out_.pass = false;
            out_.detail = what;
        }
    }
    void note(const std::string& s) {
        if (out_.pass) out_.detail = s;
    }
    Outcome done() const { return out_; }

private:
    Outcome out_;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

std::vector<Basis> bases(const std::string& s) {
    std::vector<Basis> out;
    for (char c : s) out.push_back(parse_basis(c));
    return out;
}

Outcome golden_example() {
    Check c;
    const auto alice_bases = bases("+XX++X+");
    const auto bob_bases = bases("++X+XX+");
    const std::string photons = "-\\/||/-";
    Bits bits;
    for (std::size_t i = 0; i < photons.size(); ++i) {
        const auto [bit, basis] = decode_polarization(parse_polarization(photons[i]));
        c.expect(basis == alice_bases[i], "photon symbol disagrees with Alice's basis");
        bits.push_back(static_cast<std::uint8_t>(bit));
    }
    RandomStream alice_rng(0), bob_rng(0);
    const auto prep = bb84::alice_prepare(bits, alice_bases, 0.0, alice_rng);
    const auto meas = bb84::bob_measure(prep.pulses, bob_bases, bob_rng);
    const auto s = bb84::sift(prep.bases, meas.bases, prep.bits, meas.outcomes, meas.detected);
    std::vector<std::size_t> kept;
    for (auto p : s.kept_positions) kept.push_back(p + 1);
    c.expect(kept == std::vector<std::size_t>{1, 3, 4, 6, 7}, "kept positions differ from {1,3,4,6,7}");
    c.expect(format_bits(s.alice_key) == "00100", "Alice key " + format_bits(s.alice_key) + " != 00100");
    c.expect(format_bits(s.bob_key) == "00100", "Bob key " + format_bits(s.bob_key) + " != 00100");
    c.note("kept {1,3,4,6,7}, key 00100");
    return c.done();
}

bb84::Report bb84_run(bb84::Adversary adv, double mu, std::uint64_t seed) {
    bb84::Config cfg;
    cfg.n_pulses = 100000;
    cfg.mean_photon_number = mu;
    cfg.adversary = adv;
    cfg.seed = seed;
    return bb84::run_bb84(cfg);
}

Outcome sift_rate() {
    Check c;
    const auto r = bb84_run(bb84::Adversary::none, 0.0, 1);
    c.expect(r.sift_rate >= 0.49 && r.sift_rate <= 0.51, fmt("sift_rate %.5f outside [0.49, 0.51]", r.sift_rate));
    c.expect(r.qber == 0.0 && !r.qber_degenerate, fmt("qber %.5f != 0", r.qber));
    c.note(fmt("sift_rate %.5f, qber %g", r.sift_rate, r.qber));
    return c.done();
}

// Expected error rate on sifted positions when Eve measures every photon in
// a uniformly random basis and resends what she saw.
double intercept_resend_oracle() {
    double err = 0.0;
    for (int alice_basis = 0; alice_basis < 2; ++alice_basis)
        for (int bit = 0; bit < 2; ++bit)
            for (int eve_basis = 0; eve_basis < 2; ++eve_basis)
                for (int eve_bit = 0; eve_bit < 2; ++eve_bit) {
                    const double p_eve = eve_basis == alice_basis ? (eve_bit == bit ? 1.0 : 0.0) : 0.5;
                    // Bob measures in Alice's basis (sifted positions only).
                    const double p_wrong = eve_basis == alice_basis ? (eve_bit != bit ? 1.0 : 0.0) : 0.5;
                    err += 0.125 * p_eve * p_wrong;
                }
    return err;
}

Outcome intercept_resend() {
    Check c;
    const double oracle = intercept_resend_oracle();
    c.expect(std::abs(oracle - 0.25) < 1e-15, fmt("enumerated oracle %.6f != 0.25", oracle));
    const auto r = bb84_run(bb84::Adversary::intercept_resend, 0.0, 42);
    c.expect(r.qber >= 0.24 && r.qber <= 0.26, fmt("qber %.5f outside [0.24, 0.26]", r.qber));
    c.expect(r.aborted, "not aborted at threshold 0.11");
    c.note(fmt("qber %.5f (oracle %.2f), aborted", r.qber, oracle));
    return c.done();
}

double poisson_multiphoton_conditional(double mu) {
    // P(n >= 2 | n >= 1) for n ~ Poisson(mu), from the series.
    double p0 = std::exp(-mu), p1 = mu * std::exp(-mu);
    return (1.0 - p0 - p1) / (1.0 - p0);
}

Outcome beam_splitting() {
    Check c;
    const std::array<std::pair<double, double>, 3> published{
        {{0.1, 0.04916680552249556}, {0.5, 0.22925295873160084}, {1.0, 0.41802329313067355}}};
    std::ostringstream detail;
    std::uint64_t seed = 7;
    for (const auto& [mu, constant] : published) {
        const double oracle = poisson_multiphoton_conditional(mu);
        c.expect(std::abs(oracle - constant) < 1e-12, fmt("mu %.1f: oracle %.15f disagrees with constant", mu, oracle));
        const auto r = bb84_run(bb84::Adversary::beam_splitting, mu, seed++);
        c.expect(r.qber == 0.0, fmt("mu %.1f: qber %.5f != 0", mu, r.qber));
        c.expect(std::abs(r.eve_known_fraction - oracle) <= 0.01,
                 fmt("mu %.1f: eve_known_fraction %.5f vs %.5f", mu, r.eve_known_fraction, oracle));
        detail << "mu " << mu << ": " << fmt("%.4f vs %.4f", r.eve_known_fraction, oracle) << "; ";
    }
    c.note(detail.str() + "qber 0");
    return c.done();
}

Outcome three_stage_round_trip() {
    Check c;
    RandomStream rng(5);
    double min_fid = 1.0;
    for (int i = 0; i < 1000; ++i) {
        three_stage::Session s;
        s.n_qubits = 1;
        s.u_a = three_stage::pick_commuting_operator(1, rng);
        s.u_b = three_stage::pick_commuting_operator(1, rng);
        s.payload = {ts::random_state(1, rng)};
        const auto r = three_stage::run_honest(s);
        min_fid = std::min(min_fid, fidelity(r.recovered[0], s.payload[0]));
    }
    c.expect(min_fid >= 1.0 - 1e-9, fmt("min fidelity %.3e below 1 - 1e-9", min_fid));
    c.note(fmt("min fidelity 1 - %.1e over 1000 sessions", 1.0 - min_fid));
    return c.done();
}

Outcome group_law_and_inner_product() {
    Check c;
    RandomStream rng(6);
    double law = 0.0, ip = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double a = 4.0 * std::numbers::pi * (rng.uniform() - 0.5);
        const double b = 4.0 * std::numbers::pi * (rng.uniform() - 0.5);
        law = std::max(law, max_abs_diff(multiply(rotation(a), rotation(b)), rotation(a + b)));
    }
    for (int i = 0; i < 1000; ++i) {
        const int n = 1 + static_cast<int>(rng.below(3));
        const auto x = ts::random_amplitudes(n, rng);
        const auto y = ts::random_amplitudes(n, rng);
        const auto u = ts::random_unitary_matrix(n, rng);
        // Naive sums on the test side, library apply on the other.
        ts::C before{0.0, 0.0};
        for (std::size_t k = 0; k < x.size(); ++k) before += std::conj(x[k]) * y[k];
        const auto ux = apply(ts::to_operator(u), StateVector(x));
        const auto uy = apply(ts::to_operator(u), StateVector(y));
        ts::C after{0.0, 0.0};
        for (std::size_t k = 0; k < x.size(); ++k) after += std::conj(ux.amplitudes()[k]) * uy.amplitudes()[k];
        ip = std::max({ip, std::abs(after - before), std::abs(inner_product(ux, uy) - before)});
    }
    c.expect(law < 1e-12, fmt("rotation group law deviation %.3e", law));
    c.expect(ip < 1e-12, fmt("inner product deviation %.3e", ip));
    c.note(fmt("max deviation: group law %.1e, inner product %.1e", law, ip));
    return c.done();
}

Outcome pauli_phase() {
    Check c;
    RandomStream rng(7);
    const std::array<Pauli, 3> all{Pauli::X, Pauli::Y, Pauli::Z};
    int pairs = 0;
    for (auto p : all)
        for (auto q : all) {
            if (p == q) continue;
            ++pairs;
            const auto a = pauli(p), b = pauli(q);
            const auto strict = ts::max_diff(ts::matmul(ts::to_mat(a), ts::to_mat(b)),
                                             ts::matmul(ts::to_mat(b), ts::to_mat(a)));
            c.expect(strict > 1.0, "strict commutator vanished for a Pauli pair");
            c.expect(!commutes(a, b), "commutes() accepted a Pauli pair");
            const auto ph = commutes_up_to_phase(a, b);
            c.expect(ph.commutes && std::abs(ph.phase - Complex(-1.0, 0.0)) < 1e-12,
                     "up-to-phase check did not report phase -1");
            for (int k = 0; k < 20; ++k) {
                three_stage::Session s;
                s.u_a = three_stage::LocalUnitary(a);
                s.u_b = three_stage::LocalUnitary(b);
                s.payload = {ts::random_state(1, rng)};
                const auto r = three_stage::run_honest(s);
                c.expect(fidelity(r.recovered[0], s.payload[0]) >= 1.0 - 1e-12, "Pauli round trip lost fidelity");
            }
        }
    c.note(std::to_string(pairs) + " ordered pairs: noncommuting, phase -1, round trip fidelity 1");
    return c.done();
}

Bits random_bits(std::size_t n, RandomStream& rng) {
    Bits b(n);
    for (auto& x : b) x = static_cast<std::uint8_t>(rng.bit());
    return b;
}

Outcome mitm_without_auth() {
    Check c;
    RandomStream rng(8);
    for (std::uint64_t t = 0; t < 1000; ++t) {
        harness::ScenarioConfig cfg;
        cfg.protocol = harness::Protocol::three_stage;
        cfg.adversary.kind = harness::AdversaryKind::mitm;
        cfg.seed = 1000 + t;
        cfg.message = random_bits(8, rng);
        cfg.adversary.fake_bits = random_bits(8, rng);
        const auto r = harness::run_scenario(cfg);
        c.expect(!r.aborted, "trial " + std::to_string(t) + " aborted");
        c.expect(r.eve_payload_fidelity && *r.eve_payload_fidelity >= 1.0 - 1e-12,
                 "trial " + std::to_string(t) + ": Eve's fidelity below 1");
        c.expect(r.eve_recovered_bits == cfg.message, "trial " + std::to_string(t) + ": Eve did not read X");
        c.expect(r.recovered_bits == cfg.adversary.fake_bits, "trial " + std::to_string(t) + ": Bob did not get Y");
    }
    c.note("1000/1000: Eve fidelity 1 vs X, Bob decodes Y");
    return c.done();
}

Outcome mitm_with_auth() {
    Check c;
    int aborted = 0, step2 = 0, step3 = 0;
    for (std::uint64_t t = 0; t < 1000; ++t) {
        harness::ScenarioConfig cfg;
        cfg.protocol = harness::Protocol::three_stage_auth;
        cfg.adversary.kind = harness::AdversaryKind::mitm;
        cfg.seed = 5000 + t;
        const auto r = harness::run_scenario(cfg);
        if (r.aborted) ++aborted;
        if (r.abort_step == 2) ++step2;
        if (r.abort_step == 3) ++step3;
        c.expect(r.aborted && (r.abort_step == 2 || r.abort_step == 3),
                 "trial " + std::to_string(t) + " not aborted at step 2 or 3");
        c.expect(!r.recovered_bits, "trial " + std::to_string(t) + ": Bob recovered a message");
    }
    c.note(std::to_string(aborted) + "/1000 aborted (step 2: " + std::to_string(step2) +
           ", step 3: " + std::to_string(step3) + ")");
    return c.done();
}

Outcome replay_suite() {
    Check c;
    int msg4 = 0, msg2 = 0;
    for (std::uint64_t t = 0; t < 100; ++t) {
        harness::ScenarioConfig cfg;
        cfg.protocol = harness::Protocol::three_stage_auth;
        cfg.adversary.kind = harness::AdversaryKind::replay;
        cfg.seed = 9000 + t;
        cfg.adversary.replay_step = 4;
        cfg.adversary.replay_delay_millis = 1000;
        auto r = harness::run_scenario(cfg);
        if (r.aborted && r.abort_reason == "replayed_nonce") ++msg4;

        cfg.adversary.replay_step = 2;
        cfg.adversary.replay_delay_millis = cfg.auth.policy.window_millis + 1;
        r = harness::run_scenario(cfg);
        if (r.aborted && r.abort_reason == "stale_timestamp") ++msg2;
    }
    c.expect(msg4 == 100, "message 4 replay rejected as replayed_nonce in " + std::to_string(msg4) + "/100");
    c.expect(msg2 == 100, "post-window message 2 replay rejected as stale_timestamp in " + std::to_string(msg2) + "/100");
    c.note("msg4 replayed_nonce 100/100, msg2 stale_timestamp 100/100");
    return c.done();
}

Outcome kdc_blindness() {
    Check c;
    RandomStream rng(11);
    int runs = 0;
    for (std::uint64_t t = 0; t < 200; ++t) {
        auth::ExchangeConfig cfg;
        cfg.message = random_bits(1 + rng.below(12), rng);
        cfg.redundancy = 1 + 2 * static_cast<int>(rng.below(2));
        const auto r = auth::run_authenticated_exchange(cfg, 20000 + t);
        c.expect(!r.aborted, "honest run " + std::to_string(t) + " aborted");
        c.expect(r.kdc_payload_in.size() == cfg.message.size() && r.kdc_payload_out.size() == r.kdc_payload_in.size(),
                 "run " + std::to_string(t) + ": KDC did not relay the whole payload");
        for (std::size_t i = 0; i < r.kdc_payload_in.size() && i < r.kdc_payload_out.size(); ++i) {
            const auto a = r.kdc_payload_in[i].amplitudes(), b = r.kdc_payload_out[i].amplitudes();
            c.expect(a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size_bytes()) == 0,
                     "run " + std::to_string(t) + ": payload changed inside the KDC");
        }
        ++runs;
    }
    for (std::uint64_t t = 0; t < 50; ++t) {
        harness::ScenarioConfig cfg;
        cfg.protocol = harness::Protocol::three_stage_auth;
        cfg.seed = 30000 + t;
        const auto r = harness::run_scenario(cfg);
        c.expect(r.kdc_blind == true, "scenario " + std::to_string(t) + " not reported kdc_blind");
    }
    c.note(std::to_string(runs) + " honest exchanges + 50 scenarios: payload bit-identical through the KDC");
    return c.done();
}

Outcome determinism() {
    Check c;
    int presets = 0;
    for (const auto& entry : std::filesystem::directory_iterator(QKDSIM_CONFIGS_DIR)) {
        if (entry.path().extension() != ".yaml") continue;
        const auto cfg = io::load_scenario(entry.path().string(), {"bb84.n_pulses=20000"});
        const auto a = io::report_json(harness::run_scenario(cfg));
        const auto b = io::report_json(harness::run_scenario(cfg));
        c.expect(a == b, entry.path().filename().string() + " differs between runs");
        ++presets;
    }
    for (auto protocol : {harness::Protocol::bb84, harness::Protocol::three_stage, harness::Protocol::three_stage_auth}) {
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            harness::ScenarioConfig cfg;
            cfg.protocol = protocol;
            cfg.seed = seed;
            cfg.bb84.n_pulses = 2000;
            c.expect(io::report_json(harness::run_scenario(cfg)) == io::report_json(harness::run_scenario(cfg)),
                     harness::to_string(protocol) + " seed " + std::to_string(seed) + " differs between runs");
        }
    }
    c.expect(presets >= 9, "expected the preset scenarios");
    c.note(std::to_string(presets) + " presets + 60 seeded scenarios byte-identical");
    return c.done();
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"golden worked example", golden_example},
        {"sift rate", sift_rate},
        {"intercept-resend", intercept_resend},
        {"beam splitting", beam_splitting},
        {"three-stage round trip", three_stage_round_trip},
        {"rotation group law and inner product", group_law_and_inner_product},
        {"Pauli phase behaviour", pauli_phase},
        {"MITM without authentication", mitm_without_auth},
        {"MITM with authentication", mitm_with_auth},
        {"replay suite", replay_suite},
        {"KDC blindness", kdc_blindness},
        {"determinism", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failures;
        std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
