#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "qkdsim/bits.hpp"
#include "qkdsim/party.hpp"
#include "qkdsim/quantum.hpp"
#include "qkdsim/random.hpp"

namespace qkdsim::three_stage {

// A secret transform kept as a list of factors acting on consecutive qubit
// blocks. The full operator is their tensor product; applying the factors
// one block at a time gives the same result without building it.
class LocalUnitary {
public:
    explicit LocalUnitary(std::vector<Operator> factors);
    explicit LocalUnitary(Operator op) : LocalUnitary(std::vector<Operator>{std::move(op)}) {}

    static LocalUnitary identity(int n_qubits);

    int n_qubits() const noexcept { return n_qubits_; }
    std::span<const Operator> factors() const noexcept { return factors_; }

    Operator monolithic() const;
    LocalUnitary adjoint() const;
    StateVector apply(const StateVector& s) const;

private:
    std::vector<Operator> factors_;
    int n_qubits_ = 0;
};

// Checks that two secrets commute up to a global phase. Aligned factor
// layouts are compared factor by factor, otherwise the full operators are.
PhaseCommutation secrets_commute(const LocalUnitary& a, const LocalUnitary& b, double tol = kExactTol);

struct Session {
    int n_qubits = 1;  // qubits per payload unit
    LocalUnitary u_a = LocalUnitary::identity(1);
    LocalUnitary u_b = LocalUnitary::identity(1);
    std::vector<StateVector> payload;

    // Throws std::invalid_argument / DimensionError when the session is
    // malformed or the secrets do not commute up to phase.
    void validate() const;
};

struct PassRecord {
    int pass_index = 0;
    Role sender = Role::alice;
    Role receiver = Role::bob;
    std::vector<StateVector> in_flight;
};

struct HonestResult {
    std::vector<StateVector> recovered;
    std::array<PassRecord, 3> passes;
};

struct MultiphotonResult {
    // One full evolution per photon copy.
    std::vector<HonestResult> copies;
    const std::vector<StateVector>& recovered() const { return copies.front().recovered; }
};

struct MitmConfig {
    LocalUnitary u_c = LocalUnitary::identity(1);  // Eve posing as Bob toward Alice
    LocalUnitary u_d = LocalUnitary::identity(1);  // Eve posing as Alice toward Bob
    std::vector<StateVector> fake_payload;
};

struct MitmResult {
    std::vector<StateVector> eve_recovered;
    std::vector<StateVector> bob_received;
    bool detected_at_quantum_layer = false;
    std::array<PassRecord, 3> alice_eve_passes;
    std::array<PassRecord, 3> eve_bob_passes;
};

// Tensor product of `n_qubits` rotations with angles uniform in [0, 2pi).
LocalUnitary pick_commuting_operator(int n_qubits, RandomStream& rng);

HonestResult run_honest(const Session& session);
MultiphotonResult run_honest_multiphoton(const Session& session, std::size_t photon_count);
MitmResult run_mitm(const Session& session, const MitmConfig& mitm);

// Computational-basis encoding of bits into units of `n_qubits` qubits; the
// bit count must be a multiple of n_qubits. Qubit 0 of a unit carries the
// first bit.
std::vector<StateVector> encode_units(std::span<const std::uint8_t> bits, int n_qubits);
// Rectilinear measurement of every qubit of every unit.
Bits decode_units(std::span<const StateVector> units, RandomStream& rng);

}  // namespace qkdsim::three_stage
