#include "qkdsim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "qkdsim/mixer.hpp"
#include "qkdsim/three_stage.hpp"

namespace qkdsim::harness {
namespace {

using auth::LinkAdversary;
using auth::Transit;
using auth::TransitKind;

constexpr std::uint64_t kMessageStream = 6;
constexpr std::uint64_t kEveStream = 7;
constexpr std::uint64_t kMeasureStream = 8;

std::string join(const std::vector<std::string>& parts, const char* sep) {
    std::ostringstream os;
    for (std::size_t i = 0; i < parts.size(); ++i) os << (i ? sep : "") << parts[i];
    return os.str();
}

bool valid_bits(const Bits& b) {
    for (auto x : b)
        if (x > 1) return false;
    return true;
}

std::uint64_t fold(std::uint64_t h, std::uint64_t v) { return mix64(h ^ v); }

std::uint64_t double_bits(double d) {
    std::uint64_t u = 0;
    std::memcpy(&u, &d, sizeof u);
    return u;
}

// Records every transit of the exchange as a ChannelEvent.
class Transcriber : public auth::ExchangeObserver {
public:
    explicit Transcriber(std::vector<ChannelEvent>& out) : out_(out) {}
    int session = 1;

    void on_transit(const Transit& t, bool captured) override {
        ChannelEvent e;
        e.seq = out_.size() + 1;
        e.session = session;
        e.sender = t.sender;
        e.receiver = t.receiver;
        e.step = t.step;
        e.pass_index = t.pass_index;
        e.captured = captured;
        e.injected = t.injected;
        if (t.kind == TransitKind::auth_message) {
            e.kind = EventKind::auth_message;
            e.content = to_hex(auth::serialize(t.message.fields));
            e.states = t.message.qubit_payload;
            e.message = t.message;
        } else {
            e.kind = EventKind::quantum_pass;
            e.states = t.states;
        }
        e.digest = event_digest(e);
        out_.push_back(std::move(e));
    }

private:
    std::vector<ChannelEvent>& out_;
};

Transit to_transit(const ChannelEvent& e) {
    Transit t;
    t.kind = e.kind == EventKind::auth_message ? TransitKind::auth_message : TransitKind::quantum_pass;
    t.step = e.step;
    t.pass_index = e.pass_index;
    t.sender = e.sender;
    t.receiver = e.receiver;
    if (e.message) t.message = *e.message;
    else t.states = e.states;
    return t;
}

// Eve between all parties without K_a or K_b. She swallows Alice's message 1
// and either poses as Bob toward the KDC or as the KDC toward Alice, sealing
// her forgeries under a key of her own.
class ForgingEve : public LinkAdversary {
public:
    ForgingEve(const auth::AuthWorld& world, RandomStream rng, int q) : world_(world), rng_(std::move(rng)), q_(q) {}

    Action intercept(const Transit& t) override {
        if (t.step != 1 || t.sender != Role::alice) return {};
        const auto& cfg = world_.config();
        const auto& f1 = std::get<auth::Step1Fields>(t.message.fields);
        const auto k_e = auth::SymmetricKey::random(rng_);
        const auto u_c = three_stage::pick_commuting_operator(q_, rng_);
        std::vector<StateVector> pass2;
        for (const auto& s : t.message.qubit_payload) pass2.push_back(u_c.apply(s));
        const auth::Timestamp now{world_.clock_millis()};

        Transit forged;
        forged.kind = TransitKind::auth_message;
        forged.pass_index = 2;
        forged.sender = Role::eve;
        if (rng_.bit() == 0) {
            auth::MessageContext ctx;
            ctx.id_a = f1.id_a;
            ctx.n_a = f1.n_a;
            ctx.id_b = cfg.bob;
            ctx.n_b = auth::Nonce{rng_.next_u64()};
            ctx.t_b = now;
            ctx.k_b = k_e;
            ctx.payload = std::move(pass2);
            ctx.redundancy = cfg.redundancy;
            forged.step = 2;
            forged.receiver = Role::kdc;
            forged.message = auth::build_message(2, ctx);
        } else {
            auth::MessageContext ctx;
            ctx.id_a = f1.id_a;
            ctx.id_b = cfg.bob;
            ctx.n_a = f1.n_a;
            ctx.n_b = auth::Nonce{rng_.next_u64()};
            ctx.t_b = now;
            ctx.k_a = k_e;
            ctx.k_b = k_e;
            ctx.k_s = auth::SymmetricKey::random(rng_);
            ctx.payload = std::move(pass2);
            ctx.redundancy = cfg.redundancy;
            forged.step = 3;
            forged.receiver = Role::alice;
            forged.message = auth::build_message(3, ctx);
        }
        return {true, {std::move(forged)}};
    }

private:
    const auth::AuthWorld& world_;
    RandomStream rng_;
    int q_;
};

// Swaps the live message of one step for a previously recorded one.
class Replayer : public LinkAdversary {
public:
    Replayer(int step, Transit old) : step_(step), old_(std::move(old)) {}
    Action intercept(const Transit& t) override {
        if (t.kind != TransitKind::auth_message || t.step != step_ || used_) return {};
        used_ = true;
        return {true, {old_}};
    }

private:
    int step_;
    Transit old_;
    bool used_ = false;
};

// Lets the live message through and sends an identical copy after it.
class Duplicator : public LinkAdversary {
public:
    explicit Duplicator(int step) : step_(step) {}
    Action intercept(const Transit& t) override {
        if (t.kind != TransitKind::auth_message || t.step != step_) return {};
        Transit copy = t;
        copy.sender = Role::eve;
        return {false, {std::move(copy)}};
    }

private:
    int step_;
};

void push(std::vector<ChannelEvent>& transcript, ChannelEvent e) {
    e.seq = transcript.size() + 1;
    e.digest = event_digest(e);
    transcript.push_back(std::move(e));
}

ChannelEvent quantum_event(Role from, Role to, int pass, std::vector<StateVector> states, bool captured,
                           bool injected, std::string content = {}) {
    ChannelEvent e;
    e.kind = EventKind::quantum_pass;
    e.sender = from;
    e.receiver = to;
    e.pass_index = pass;
    e.states = std::move(states);
    e.captured = captured;
    e.injected = injected;
    e.content = std::move(content);
    return e;
}

ChannelEvent announcement(Role from, Role to, std::string content) {
    ChannelEvent e;
    e.kind = EventKind::classical_announcement;
    e.sender = from;
    e.receiver = to;
    e.content = std::move(content);
    return e;
}

std::vector<StateVector> pulse_states(const std::vector<bb84::Pulse>& pulses) {
    std::vector<StateVector> out;
    for (const auto& p : pulses)
        if (p.photon_count > 0) out.push_back(p.state);
    return out;
}

void run_bb84_scenario(const ScenarioConfig& cfg, ScenarioReport& rep) {
    bb84::Config c = cfg.bb84;
    c.seed = cfg.seed;
    c.adversary = cfg.adversary.kind == AdversaryKind::intercept_resend ? bb84::Adversary::intercept_resend
                  : cfg.adversary.kind == AdversaryKind::beam_splitting ? bb84::Adversary::beam_splitting
                                                                        : bb84::Adversary::none;
    const auto run = bb84::simulate(c);
    auto& tr = rep.transcript;
    const std::string pulses = "pulses=" + std::to_string(c.n_pulses);
    if (c.adversary == bb84::Adversary::none) {
        push(tr, quantum_event(Role::alice, Role::bob, 0, pulse_states(run.delivered), false, false, pulses));
    } else {
        push(tr, quantum_event(Role::alice, Role::bob, 0, pulse_states(run.alice.pulses), true, false, pulses));
        push(tr, quantum_event(Role::eve, Role::bob, 0, pulse_states(run.delivered), false, true, pulses));
    }

    std::string bases(c.n_pulses, '.');
    for (std::size_t i = 0; i < bases.size(); ++i)
        if (run.bob.detected[i]) bases[i] = basis_symbol(run.bob.bases[i]);
    push(tr, announcement(Role::bob, Role::alice, "bob_bases=" + bases));

    std::string kept(c.n_pulses, '0');
    for (auto k : run.sifted.kept_positions) kept[k] = '1';
    push(tr, announcement(Role::alice, Role::bob, "kept=" + kept));

    std::string sample;
    for (auto pos : run.estimate.sampled_positions)
        sample += (sample.empty() ? "" : ",") + std::to_string(pos) + ":" + std::to_string(run.sifted.bob_key[pos]);
    push(tr, announcement(Role::bob, Role::alice, "sample=" + sample));

    std::ostringstream verdict;
    verdict << "qber=" << run.report.qber << " aborted=" << (run.report.aborted ? "true" : "false");
    push(tr, announcement(Role::alice, Role::bob, verdict.str()));

    const auto& r = run.report;
    rep.aborted = r.aborted;
    if (r.aborted) {
        rep.abort_reason = "qber_above_threshold";
        std::ostringstream d;
        d << "qber " << r.qber << " > " << c.qber_abort_threshold;
        rep.abort_detail = d.str();
    }
    rep.qber = r.qber;
    rep.sift_rate = r.sift_rate;
    rep.eve_known_fraction = r.eve_known_fraction;
    rep.bb84 = Bb84Metrics{r.n_pulses, r.detected_pulses, r.sifted_length, r.sample_size, r.alice_key.size(),
                           r.qber_degenerate};
}

void add_passes(std::vector<ChannelEvent>& tr, const std::array<three_stage::PassRecord, 3>& passes) {
    for (const auto& p : passes) {
        if (p.receiver == Role::eve)
            push(tr, quantum_event(p.sender, p.sender == Role::alice ? Role::bob : Role::alice, p.pass_index,
                                   p.in_flight, true, false));
        else
            push(tr, quantum_event(p.sender, p.receiver, p.pass_index, p.in_flight, false, p.sender == Role::eve));
    }
}

void run_three_stage_scenario(const ScenarioConfig& cfg, ScenarioReport& rep) {
    const RandomStream root(cfg.seed);
    RandomStream alice = root.split(1), bob = root.split(2), eve = root.split(kEveStream),
                 measure = root.split(kMeasureStream);
    const int q = cfg.qubits_per_unit;
    three_stage::Session s;
    s.n_qubits = q;
    s.u_a = three_stage::pick_commuting_operator(q, alice);
    s.u_b = three_stage::pick_commuting_operator(q, bob);
    s.payload = three_stage::encode_units(rep.sent_bits, q);

    if (cfg.adversary.kind == AdversaryKind::none) {
        const auto r = three_stage::run_honest(s);
        add_passes(rep.transcript, r.passes);
        rep.recovered_bits = three_stage::decode_units(r.recovered, measure);
        return;
    }
    three_stage::MitmConfig m;
    m.u_c = three_stage::pick_commuting_operator(q, eve);
    m.u_d = three_stage::pick_commuting_operator(q, eve);
    const Bits fake = cfg.adversary.fake_bits.empty() ? Bits(rep.sent_bits.size(), 0) : cfg.adversary.fake_bits;
    m.fake_payload = three_stage::encode_units(fake, q);
    const auto r = three_stage::run_mitm(s, m);
    add_passes(rep.transcript, r.alice_eve_passes);
    add_passes(rep.transcript, r.eve_bob_passes);
    double worst = 1.0;
    for (std::size_t i = 0; i < r.eve_recovered.size(); ++i)
        worst = std::min(worst, fidelity(r.eve_recovered[i], s.payload[i]));
    rep.eve_payload_fidelity = worst;
    rep.eve_recovered_bits = three_stage::decode_units(r.eve_recovered, measure);
    rep.recovered_bits = three_stage::decode_units(r.bob_received, measure);
}

void absorb(const auth::AuthReport& a, ScenarioReport& rep, std::optional<bool>& blind) {
    if (!a.kdc_payload_in.empty() || !a.kdc_payload_out.empty()) {
        bool same = a.kdc_payload_in.size() == a.kdc_payload_out.size();
        for (std::size_t i = 0; same && i < a.kdc_payload_in.size(); ++i)
            same = a.kdc_payload_in[i].identical(a.kdc_payload_out[i]);
        blind = blind.value_or(true) && same;
    }
    rep.aborted = a.aborted;
    rep.abort_step = a.abort_step;
    rep.abort_reason.reset();
    if (a.abort_reason) rep.abort_reason = auth::to_string(*a.abort_reason);
    rep.abort_detail = a.abort_detail;
    rep.recovered_bits = a.recovered;
}

void run_auth_scenario(const ScenarioConfig& cfg, ScenarioReport& rep) {
    auth::ExchangeConfig ec = cfg.auth;
    ec.message = rep.sent_bits;
    ec.qubits_per_unit = cfg.qubits_per_unit;
    auth::AuthWorld world(ec, cfg.seed);
    Transcriber transcriber(rep.transcript);
    std::optional<bool> blind;

    switch (cfg.adversary.kind) {
        case AdversaryKind::mitm: {
            ForgingEve eve(world, RandomStream(cfg.seed).split(kEveStream), cfg.qubits_per_unit);
            absorb(world.run(&eve, &transcriber), rep, blind);
            break;
        }
        case AdversaryKind::replay: {
            const int step = cfg.adversary.replay_step;
            if (cfg.adversary.replay_same_session) {
                Duplicator eve(step);
                absorb(world.run(&eve, &transcriber), rep, blind);
                break;
            }
            absorb(world.run(nullptr, &transcriber), rep, blind);
            const auto old = replay_adversary(rep.transcript, step);
            if (rep.aborted || !old) break;
            world.advance(cfg.adversary.replay_delay_millis);
            transcriber.session = 2;
            Replayer eve(step, to_transit(*old));
            absorb(world.run(&eve, &transcriber), rep, blind);
            break;
        }
        default: absorb(world.run(nullptr, &transcriber), rep, blind);
    }
    rep.kdc_blind = blind;
}

MetricSummary summarize(const std::vector<double>& xs) {
    MetricSummary m;
    m.count = xs.size();
    for (double x : xs) m.mean += x;
    m.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - m.mean) * (x - m.mean);
        m.std_error = std::sqrt(ss / static_cast<double>(xs.size() - 1)) / std::sqrt(static_cast<double>(xs.size()));
    }
    return m;
}

}  // namespace

std::string to_string(Protocol p) {
    switch (p) {
        case Protocol::bb84: return "bb84";
        case Protocol::three_stage: return "three_stage";
        case Protocol::three_stage_auth: return "three_stage_auth";
    }
    return "unknown";
}

std::string to_string(AdversaryKind a) {
    switch (a) {
        case AdversaryKind::none: return "none";
        case AdversaryKind::intercept_resend: return "intercept_resend";
        case AdversaryKind::beam_splitting: return "beam_splitting";
        case AdversaryKind::mitm: return "mitm";
        case AdversaryKind::replay: return "replay";
    }
    return "unknown";
}

std::string to_string(EventKind k) {
    switch (k) {
        case EventKind::quantum_pass: return "quantum_pass";
        case EventKind::auth_message: return "auth_message";
        case EventKind::classical_announcement: return "classical_announcement";
    }
    return "unknown";
}

std::optional<Protocol> parse_protocol(std::string_view s) {
    for (auto p : {Protocol::bb84, Protocol::three_stage, Protocol::three_stage_auth})
        if (to_string(p) == s) return p;
    return std::nullopt;
}

std::optional<AdversaryKind> parse_adversary_kind(std::string_view s) {
    for (auto a : {AdversaryKind::none, AdversaryKind::intercept_resend, AdversaryKind::beam_splitting,
                   AdversaryKind::mitm, AdversaryKind::replay})
        if (to_string(a) == s) return a;
    return std::nullopt;
}

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::invalid_argument("invalid scenario: " + join(problems, "; ")), problems_(std::move(problems)) {}

std::vector<std::string> ScenarioConfig::validate() const {
    std::vector<std::string> errors;
    const auto kind = adversary.kind;
    const auto allowed = [&] {
        switch (protocol) {
            case Protocol::bb84:
                return kind == AdversaryKind::none || kind == AdversaryKind::intercept_resend ||
                       kind == AdversaryKind::beam_splitting;
            case Protocol::three_stage: return kind == AdversaryKind::none || kind == AdversaryKind::mitm;
            case Protocol::three_stage_auth:
                return kind == AdversaryKind::none || kind == AdversaryKind::mitm || kind == AdversaryKind::replay;
        }
        return false;
    }();
    if (!allowed)
        errors.push_back("adversary.kind " + to_string(kind) + " does not apply to protocol " + to_string(protocol));

    if (protocol == Protocol::bb84) {
        for (const auto& e : bb84.validate()) errors.push_back("bb84: " + e);
        return errors;
    }

    const std::size_t len = message.empty() ? message_length : message.size();
    if (!valid_bits(message)) errors.emplace_back("message must contain only 0/1 bits");
    if (len == 0) errors.emplace_back("message_length must be >= 1");
    if (qubits_per_unit < 1 || qubits_per_unit > 8) errors.emplace_back("qubits_per_unit must be in [1, 8]");
    else if (len % static_cast<std::size_t>(qubits_per_unit) != 0)
        errors.emplace_back("message length must be a multiple of qubits_per_unit");
    if (kind == AdversaryKind::mitm && !adversary.fake_bits.empty()) {
        if (!valid_bits(adversary.fake_bits)) errors.emplace_back("adversary.fake_bits must contain only 0/1 bits");
        if (adversary.fake_bits.size() != len) errors.emplace_back("adversary.fake_bits must match the message length");
    }
    if (kind == AdversaryKind::replay) {
        if (adversary.replay_step < 1 || adversary.replay_step > 4)
            errors.emplace_back("adversary.replay_step must be in [1, 4]");
        else if (adversary.replay_same_session && adversary.replay_step == 4)
            errors.emplace_back("a same-session copy of message 4 arrives after completion; use replay_step 1..3");
    }
    if (protocol == Protocol::three_stage_auth) {
        auth::ExchangeConfig ec = auth;
        ec.message = Bits(qubits_per_unit >= 1 ? static_cast<std::size_t>(qubits_per_unit) : 1, 0);
        ec.qubits_per_unit = qubits_per_unit >= 1 && qubits_per_unit <= 8 ? qubits_per_unit : 1;
        for (const auto& e : ec.validate()) errors.push_back("auth: " + e);
    }
    return errors;
}

std::uint64_t event_digest(const ChannelEvent& e) {
    std::uint64_t h = mix(e.seq, static_cast<std::uint64_t>(e.session));
    h = fold(h, (static_cast<std::uint64_t>(e.sender) << 32) | static_cast<std::uint64_t>(e.receiver));
    h = fold(h, (static_cast<std::uint64_t>(e.kind) << 40) | (static_cast<std::uint64_t>(e.step) << 16) |
                    static_cast<std::uint64_t>(e.pass_index));
    h = fold(h, (e.captured ? 2U : 0U) | (e.injected ? 1U : 0U));
    for (unsigned char c : e.content) h = fold(h, c);
    h = fold(h, e.content.size());
    const auto fold_states = [&h](const std::vector<StateVector>& states) {
        for (const auto& s : states) {
            h = fold(h, static_cast<std::uint64_t>(s.n_qubits()));
            for (const auto& a : s.amplitudes()) {
                h = fold(h, double_bits(a.real()));
                h = fold(h, double_bits(a.imag()));
            }
        }
        h = fold(h, states.size());
    };
    fold_states(e.states);
    if (e.message) fold_states(e.message->q_encoded_header);
    return h;
}

ScenarioReport run_scenario(const ScenarioConfig& config) {
    if (auto errors = config.validate(); !errors.empty()) throw ConfigError(std::move(errors));
    ScenarioReport rep;
    rep.protocol = config.protocol;
    rep.adversary = config.adversary.kind;
    rep.seed = config.seed;
    if (config.protocol != Protocol::bb84) {
        if (!config.message.empty()) {
            rep.sent_bits = config.message;
        } else {
            RandomStream rng = RandomStream(config.seed).split(kMessageStream);
            rep.sent_bits.resize(config.message_length);
            for (auto& b : rep.sent_bits) b = static_cast<std::uint8_t>(rng.bit());
        }
    }
    switch (config.protocol) {
        case Protocol::bb84: run_bb84_scenario(config, rep); break;
        case Protocol::three_stage: run_three_stage_scenario(config, rep); break;
        case Protocol::three_stage_auth: run_auth_scenario(config, rep); break;
    }
    if (rep.aborted) rep.recovered_bits.reset();
    return rep;
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t trial) { return mix(master_seed, trial); }

BatchReport run_batch(const ScenarioConfig& config, std::size_t trials) {
    auto errors = config.validate();
    if (trials == 0) errors.emplace_back("trials must be >= 1");
    if (!errors.empty()) throw ConfigError(std::move(errors));

    BatchReport b;
    b.master_seed = config.seed;
    b.trials = trials;
    b.rows.reserve(trials);
    for (std::size_t i = 0; i < trials; ++i) {
        ScenarioConfig c = config;
        c.seed = trial_seed(config.seed, i);
        auto r = run_scenario(c);
        r.transcript.clear();
        r.transcript.shrink_to_fit();
        b.rows.push_back(std::move(r));
    }

    std::vector<double> qber, sift, known, fid;
    for (const auto& r : b.rows) {
        if (r.aborted) ++b.detections;
        if (r.recovered_bits && *r.recovered_bits == r.sent_bits) ++b.recovered_exact;
        if (r.qber) qber.push_back(*r.qber);
        if (r.sift_rate) sift.push_back(*r.sift_rate);
        if (r.eve_known_fraction) known.push_back(*r.eve_known_fraction);
        if (r.eve_payload_fidelity) fid.push_back(*r.eve_payload_fidelity);
    }
    if (!qber.empty()) b.qber = summarize(qber);
    if (!sift.empty()) b.sift_rate = summarize(sift);
    if (!known.empty()) b.eve_known_fraction = summarize(known);
    if (!fid.empty()) b.eve_payload_fidelity = summarize(fid);
    return b;
}

std::optional<ChannelEvent> replay_adversary(const std::vector<ChannelEvent>& fragment, int target_step) {
    for (auto it = fragment.rbegin(); it != fragment.rend(); ++it) {
        if (it->kind != EventKind::auth_message || it->step != target_step || !it->message || it->injected) continue;
        ChannelEvent e = *it;
        e.sender = Role::eve;
        e.captured = false;
        e.injected = true;
        return e;
    }
    return std::nullopt;
}

}  // namespace qkdsim::harness
