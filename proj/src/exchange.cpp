#include "qkdsim/exchange.hpp"

#include <stdexcept>

namespace qkdsim::auth {
namespace {

using three_stage::LocalUnitary;

std::vector<StateVector> apply_all(const LocalUnitary& u, const std::vector<StateVector>& units) {
    std::vector<StateVector> out;
    out.reserve(units.size());
    for (const auto& s : units) out.push_back(u.apply(s));
    return out;
}

bool same_payload(const std::vector<StateVector>& a, const std::vector<StateVector>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!a[i].identical(b[i])) return false;
    return true;
}

Transit auth_transit(int step, int pass_index, Role from, Role to, AuthMessage msg) {
    Transit t;
    t.kind = TransitKind::auth_message;
    t.step = step;
    t.pass_index = pass_index;
    t.sender = from;
    t.receiver = to;
    t.message = std::move(msg);
    return t;
}

// Per-session scratch state for the three honest parties.
struct Session {
    LocalUnitary u_a = LocalUnitary::identity(1);
    LocalUnitary u_b = LocalUnitary::identity(1);
    std::optional<Nonce> n_a;
    std::optional<Nonce> n_b;
    std::optional<std::vector<StateVector>> alice_pass2;
    int last_step = 0;
    bool finished = false;
};

}  // namespace

std::vector<std::string> ExchangeConfig::validate() const {
    std::vector<std::string> errors;
    if (message.empty()) errors.emplace_back("message must contain at least one bit");
    for (auto b : message)
        if (b > 1) {
            errors.emplace_back("message must contain only 0/1 bits");
            break;
        }
    if (qubits_per_unit < 1 || qubits_per_unit > 8) errors.emplace_back("qubits_per_unit must be in [1, 8]");
    else if (message.size() % static_cast<std::size_t>(qubits_per_unit) != 0)
        errors.emplace_back("message length must be a multiple of qubits_per_unit");
    if (redundancy < 1) errors.emplace_back("redundancy must be >= 1");
    if (policy.window_millis == 0) errors.emplace_back("window_millis must be > 0");
    if (alice == bob || alice == kdc || bob == kdc) errors.emplace_back("party ids must be distinct");
    return errors;
}

std::string to_string(TransitKind k) { return k == TransitKind::auth_message ? "auth_message" : "quantum_pass"; }

AuthWorld::AuthWorld(ExchangeConfig config, std::uint64_t seed)
    : config_(std::move(config)),
      alice_{config_.alice, {}, {}, RandomStream(seed).split(1), config_.alice_skew_millis},
      bob_{config_.bob, {}, {}, RandomStream(seed).split(2), config_.bob_skew_millis},
      kdc_{config_.kdc, {}, {}, RandomStream(seed).split(3), config_.kdc_skew_millis} {
    // Out-of-band provisioning of the long-term keys.
    RandomStream provisioning = RandomStream(seed).split(5);
    alice_.long_term = SymmetricKey::random(provisioning);
    bob_.long_term = SymmetricKey::random(provisioning);
    directory_.emplace(alice_.id, alice_.long_term);
    directory_.emplace(bob_.id, bob_.long_term);
}

Timestamp AuthWorld::now_for(const PartyState& p) const noexcept {
    const auto t = static_cast<std::int64_t>(clock_) + p.skew_millis;
    return Timestamp{t < 0 ? 0 : static_cast<std::uint64_t>(t)};
}

AuthReport AuthWorld::run(LinkAdversary* adversary, ExchangeObserver* observer) {
    if (const auto errors = config_.validate(); !errors.empty())
        throw std::invalid_argument("exchange config: " + errors.front());

    const auto& cfg = config_;
    const int q = cfg.qubits_per_unit;
    AuthReport report;
    Session s;
    s.u_a = three_stage::pick_commuting_operator(q, alice_.rng);
    s.u_b = three_stage::pick_commuting_operator(q, bob_.rng);

    std::deque<Transit> queue;

    const auto abort = [&](int step, Rejection r, std::string detail) {
        report.aborted = true;
        report.abort_step = step;
        report.abort_reason = r;
        report.abort_detail = std::move(detail);
    };
    const auto reject = [&](int step, const VerificationOutcome& o) {
        if (o.accepted) return false;
        abort(step, o.reason, o.detail);
        return true;
    };
    const auto verify_ctx = [&](PartyState& self, const PartyId& peer, std::optional<Nonce> issued) {
        VerifyContext ctx;
        ctx.self = self.id;
        ctx.expected_peer = peer;
        ctx.long_term_key = self.long_term;
        ctx.now = now_for(self);
        ctx.policy = cfg.policy;
        ctx.cache = &self.cache;
        ctx.issued_nonce = issued;
        ctx.redundancy = cfg.redundancy;
        ctx.rng = &self.rng;
        return ctx;
    };

    // Alice opens with message 1.
    {
        s.n_a = Nonce{alice_.rng.next_u64()};
        MessageContext ctx;
        ctx.id_a = alice_.id;
        ctx.n_a = s.n_a;
        ctx.payload = apply_all(s.u_a, three_stage::encode_units(cfg.message, q));
        ctx.redundancy = cfg.redundancy;
        queue.push_back(auth_transit(1, 1, Role::alice, Role::bob, build_message(1, ctx)));
    }

    const auto deliver = [&](const Transit& t) {
        clock_ += cfg.hop_millis;
        if (t.kind == TransitKind::auth_message) {
            for (const auto& prior : report.delivered)
                if (prior.step == t.step && prior.message.fields == t.message.fields &&
                    same_payload(prior.message.qubit_payload, t.message.qubit_payload))
                    return abort(t.step, Rejection::duplicate_event, "message already delivered in this session");
        }

        if (t.receiver == Role::bob && t.step == 1) {
            const auto v = verify_message(1, t.message, verify_ctx(bob_, alice_.id, std::nullopt));
            if (reject(1, v.outcome)) return;
            if (t.message.qubit_payload.empty()) return abort(1, Rejection::missing_payload, "message 1 has no payload");
            s.last_step = 1;
            s.n_b = Nonce{bob_.rng.next_u64()};
            auto pass2 = apply_all(s.u_b, t.message.qubit_payload);
            MessageContext ctx;
            ctx.id_a = *v.peer;
            ctx.n_a = *v.peer_nonce;
            ctx.id_b = bob_.id;
            ctx.n_b = s.n_b;
            ctx.t_b = now_for(bob_);
            ctx.k_b = bob_.long_term;
            ctx.redundancy = cfg.redundancy;
            if (cfg.relay_pass2_via_kdc) {
                ctx.payload = std::move(pass2);
                queue.push_back(auth_transit(2, 2, Role::bob, Role::kdc, build_message(2, ctx)));
            } else {
                queue.push_back(auth_transit(2, 0, Role::bob, Role::kdc, build_message(2, ctx)));
                Transit qp;
                qp.kind = TransitKind::quantum_pass;
                qp.pass_index = 2;
                qp.sender = Role::bob;
                qp.receiver = Role::alice;
                qp.states = std::move(pass2);
                queue.push_back(std::move(qp));
            }
        } else if (t.receiver == Role::kdc && t.step == 2) {
            if (!cfg.kdc_available) return abort(2, Rejection::kdc_unreachable, "KDC did not answer message 2");
            KdcContext kctx;
            kctx.self = kdc_.id;
            kctx.directory = directory_;
            kctx.now = now_for(kdc_);
            kctx.policy = cfg.policy;
            kctx.cache = &kdc_.cache;
            kctx.redundancy = cfg.redundancy;
            kctx.rng = &kdc_.rng;
            const auto issue = kdc_issue_session(t.message, kctx);
            if (reject(2, issue.outcome)) return;
            s.last_step = 2;
            // The payload is copied across untouched; the KDC never acts on it.
            report.kdc_payload_in = t.message.qubit_payload;
            std::vector<StateVector> out = t.message.qubit_payload;
            report.kdc_payload_out = out;
            const int pass_index = out.empty() ? 0 : 2;
            queue.push_back(auth_transit(3, pass_index, Role::kdc, Role::alice,
                                         assemble(*issue.fields, std::move(out), cfg.redundancy)));
        } else if (t.receiver == Role::alice && t.kind == TransitKind::quantum_pass) {
            s.alice_pass2 = t.states;
        } else if (t.receiver == Role::alice && t.step == 3) {
            const auto v = verify_message(3, t.message, verify_ctx(alice_, bob_.id, s.n_a));
            if (reject(3, v.outcome)) return;
            const auto& pass2 = cfg.relay_pass2_via_kdc ? t.message.qubit_payload
                                                        : (s.alice_pass2 ? *s.alice_pass2 : std::vector<StateVector>{});
            if (pass2.empty()) return abort(3, Rejection::missing_payload, "no pass 2 payload at Alice");
            s.last_step = 3;
            report.alice_session_key = v.session_key;
            MessageContext ctx;
            ctx.ticket = v.ticket;
            ctx.k_s = v.session_key;
            ctx.n_b = v.peer_nonce;
            ctx.payload = apply_all(s.u_a.adjoint(), pass2);
            ctx.redundancy = cfg.redundancy;
            queue.push_back(auth_transit(4, 3, Role::alice, Role::bob, build_message(4, ctx)));
        } else if (t.receiver == Role::bob && t.step == 4) {
            const auto v = verify_message(4, t.message, verify_ctx(bob_, alice_.id, s.n_b));
            if (reject(4, v.outcome)) return;
            if (t.message.qubit_payload.empty()) return abort(4, Rejection::missing_payload, "message 4 has no payload");
            s.last_step = 4;
            report.bob_session_key = v.session_key;
            report.recovered = three_stage::decode_units(apply_all(s.u_b.adjoint(), t.message.qubit_payload), bob_.rng);
            s.finished = true;
        } else {
            abort(t.step, Rejection::malformed, "unexpected message for " + to_string(t.receiver));
        }
    };

    while (!queue.empty() && !report.aborted && !s.finished) {
        Transit t = std::move(queue.front());
        queue.pop_front();
        LinkAdversary::Action action;
        if (adversary && !t.injected) action = adversary->intercept(t);
        if (observer) observer->on_transit(t, action.capture);
        for (auto it = action.inject.rbegin(); it != action.inject.rend(); ++it) {
            it->injected = true;
            queue.push_front(std::move(*it));
        }
        if (action.capture) continue;
        deliver(t);
        report.delivered.push_back(std::move(t));
    }

    if (!report.aborted && !s.finished)
        abort(s.last_step + 1, Rejection::no_response, "the exchange stalled after step " + std::to_string(s.last_step));
    if (report.aborted) report.recovered.reset();
    return report;
}

AuthReport run_authenticated_exchange(const ExchangeConfig& config, std::uint64_t seed, LinkAdversary* adversary,
                                      ExchangeObserver* observer) {
    AuthWorld world(config, seed);
    return world.run(adversary, observer);
}

}  // namespace qkdsim::auth
