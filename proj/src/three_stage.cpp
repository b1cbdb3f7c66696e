#include "qkdsim/three_stage.hpp"

#include <numbers>
#include <stdexcept>

namespace qkdsim::three_stage {
namespace {

std::vector<StateVector> apply_all(const LocalUnitary& u, std::span<const StateVector> states) {
    std::vector<StateVector> out;
    out.reserve(states.size());
    for (const auto& s : states) out.push_back(u.apply(s));
    return out;
}

void require_units(std::span<const StateVector> payload, int n_qubits, const char* what) {
    for (const auto& s : payload)
        if (s.n_qubits() != n_qubits)
            throw DimensionError(std::string(what) + ": payload unit does not match the transform width");
}

// The three quantum passes between an initiator holding `first` and a
// responder holding `second`, followed by the responder's unlock.
HonestResult execute(const LocalUnitary& first, const LocalUnitary& second, std::span<const StateVector> payload,
                     Role initiator, Role responder) {
    HonestResult r;
    r.passes[0] = PassRecord{1, initiator, responder, apply_all(first, payload)};
    r.passes[1] = PassRecord{2, responder, initiator, apply_all(second, r.passes[0].in_flight)};
    r.passes[2] = PassRecord{3, initiator, responder, apply_all(first.adjoint(), r.passes[1].in_flight)};
    r.recovered = apply_all(second.adjoint(), r.passes[2].in_flight);
    return r;
}

}  // namespace

LocalUnitary::LocalUnitary(std::vector<Operator> factors) : factors_(std::move(factors)) {
    if (factors_.empty()) throw std::invalid_argument("LocalUnitary: at least one factor required");
    for (const auto& f : factors_) {
        if (!f.is_unitary()) throw std::invalid_argument("LocalUnitary: factor is not unitary");
        n_qubits_ += f.n_qubits();
    }
}

LocalUnitary LocalUnitary::identity(int n_qubits) {
    std::vector<Operator> f;
    for (int q = 0; q < n_qubits; ++q) f.push_back(Operator::identity(1));
    return LocalUnitary(std::move(f));
}

Operator LocalUnitary::monolithic() const {
    Operator acc = factors_.front();
    for (std::size_t i = 1; i < factors_.size(); ++i) acc = tensor(acc, factors_[i]);
    return acc;
}

LocalUnitary LocalUnitary::adjoint() const {
    std::vector<Operator> f;
    f.reserve(factors_.size());
    for (const auto& op : factors_) f.push_back(dagger(op));
    return LocalUnitary(std::move(f));
}

StateVector LocalUnitary::apply(const StateVector& s) const {
    if (s.n_qubits() != n_qubits_) throw DimensionError("LocalUnitary::apply: state width mismatch");
    StateVector out = s;
    int first = 0;
    for (const auto& f : factors_) {
        out = apply_on_qubits(f, out, first);
        first += f.n_qubits();
    }
    return out;
}

PhaseCommutation secrets_commute(const LocalUnitary& a, const LocalUnitary& b, double tol) {
    if (a.n_qubits() != b.n_qubits()) throw DimensionError("secrets_commute: width mismatch");
    const auto fa = a.factors();
    const auto fb = b.factors();
    bool aligned = fa.size() == fb.size();
    for (std::size_t i = 0; aligned && i < fa.size(); ++i) aligned = fa[i].n_qubits() == fb[i].n_qubits();
    if (!aligned) return commutes_up_to_phase(a.monolithic(), b.monolithic(), tol);

    // (A1 x A2)(B1 x B2) = (A1 B1) x (A2 B2): phases multiply factor-wise.
    // Factor-wise commutation is sufficient for commutation of the product.
    Complex phase{1.0, 0.0};
    for (std::size_t i = 0; i < fa.size(); ++i) {
        const auto pc = commutes_up_to_phase(fa[i], fb[i], tol);
        if (!pc.commutes) return commutes_up_to_phase(a.monolithic(), b.monolithic(), tol);
        phase *= pc.phase;
    }
    return {true, phase};
}

void Session::validate() const {
    if (n_qubits < 1) throw std::invalid_argument("Session: n_qubits must be positive");
    if (u_a.n_qubits() != n_qubits || u_b.n_qubits() != n_qubits)
        throw DimensionError("Session: secret transforms do not match n_qubits");
    require_units(payload, n_qubits, "Session");
    if (!secrets_commute(u_a, u_b).commutes)
        throw std::invalid_argument("Session: u_a and u_b do not commute up to a global phase");
}

LocalUnitary pick_commuting_operator(int n_qubits, RandomStream& rng) {
    if (n_qubits < 1) throw std::invalid_argument("pick_commuting_operator: n_qubits must be positive");
    std::vector<Operator> factors;
    factors.reserve(static_cast<std::size_t>(n_qubits));
    for (int q = 0; q < n_qubits; ++q) factors.push_back(rotation(2.0 * std::numbers::pi * rng.uniform()));
    return LocalUnitary(std::move(factors));
}

HonestResult run_honest(const Session& session) {
    session.validate();
    return execute(session.u_a, session.u_b, session.payload, Role::alice, Role::bob);
}

MultiphotonResult run_honest_multiphoton(const Session& session, std::size_t photon_count) {
    if (photon_count < 1) throw std::invalid_argument("run_honest_multiphoton: photon_count must be >= 1");
    session.validate();
    MultiphotonResult r;
    r.copies.reserve(photon_count);
    // Each photon of a pulse sees the same transforms in the same order.
    for (std::size_t k = 0; k < photon_count; ++k)
        r.copies.push_back(execute(session.u_a, session.u_b, session.payload, Role::alice, Role::bob));
    return r;
}

MitmResult run_mitm(const Session& session, const MitmConfig& mitm) {
    session.validate();
    if (mitm.u_c.n_qubits() != session.n_qubits || mitm.u_d.n_qubits() != session.n_qubits)
        throw DimensionError("run_mitm: Eve's transforms do not match n_qubits");
    require_units(mitm.fake_payload, session.n_qubits, "run_mitm");

    MitmResult r;
    // Eve plays Bob toward Alice, then Alice toward Bob with her own payload.
    auto with_alice = execute(session.u_a, mitm.u_c, session.payload, Role::alice, Role::eve);
    auto with_bob = execute(mitm.u_d, session.u_b, mitm.fake_payload, Role::eve, Role::bob);
    r.eve_recovered = std::move(with_alice.recovered);
    r.alice_eve_passes = std::move(with_alice.passes);
    r.bob_received = std::move(with_bob.recovered);
    r.eve_bob_passes = std::move(with_bob.passes);
    r.detected_at_quantum_layer = false;
    return r;
}

std::vector<StateVector> encode_units(std::span<const std::uint8_t> bits, int n_qubits) {
    if (n_qubits < 1) throw std::invalid_argument("encode_units: n_qubits must be positive");
    const auto width = static_cast<std::size_t>(n_qubits);
    if (bits.size() % width != 0)
        throw std::invalid_argument("encode_units: bit count must be a multiple of the unit width");
    std::vector<StateVector> units;
    units.reserve(bits.size() / width);
    for (std::size_t u = 0; u < bits.size(); u += width) {
        std::size_t index = 0;
        for (std::size_t q = 0; q < width; ++q) index = (index << 1) | (bits[u + q] ? 1U : 0U);
        units.push_back(StateVector::basis_state(n_qubits, index));
    }
    return units;
}

Bits decode_units(std::span<const StateVector> units, RandomStream& rng) {
    Bits out;
    for (const auto& unit : units) {
        StateVector s = unit;
        for (int q = 0; q < unit.n_qubits(); ++q) {
            auto [bit, collapsed] = measure_qubit(s, q, Basis::rectilinear, rng);
            out.push_back(static_cast<std::uint8_t>(bit));
            s = std::move(collapsed);
        }
    }
    return out;
}

}  // namespace qkdsim::three_stage
