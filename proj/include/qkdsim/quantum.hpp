#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qkdsim/random.hpp"

namespace qkdsim {

using Complex = std::complex<double>;

// Tolerances: unitarity/normalization checks use kUnitaryTol, exact
// algebraic identities use kExactTol.
inline constexpr double kUnitaryTol = 1e-9;
inline constexpr double kExactTol = 1e-12;

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class Basis { rectilinear, diagonal };

// Polarizer symbols. Rectilinear: horizontal = 0, vertical = 1.
// Diagonal: slash = 0, backslash = 1.
enum class Polarization { horizontal, vertical, slash, backslash };

Polarization polarization_of(int bit, Basis basis);
std::pair<int, Basis> decode_polarization(Polarization p);
char basis_symbol(Basis b);          // '+' or 'X'
char polarization_symbol(Polarization p);  // '-', '|', '/', '\\'
Basis parse_basis(char c);
Polarization parse_polarization(char c);

// Normalized amplitude vector over 2^n computational basis states. Qubit 0 is
// the most significant index bit, matching the Kronecker-product order of
// tensor(a, b) where `a` acts on the leading qubits.
class StateVector {
public:
    // Validates finiteness, length 2^n and normalization within kUnitaryTol.
    explicit StateVector(std::vector<Complex> amplitudes);

    static StateVector basis_state(int n_qubits, std::size_t index);

    int n_qubits() const noexcept { return n_qubits_; }
    std::size_t dim() const noexcept { return amps_.size(); }
    const Complex& operator[](std::size_t i) const { return amps_[i]; }
    std::span<const Complex> amplitudes() const noexcept { return amps_; }
    double norm_squared() const noexcept;

    // Bitwise equality of the stored doubles.
    bool identical(const StateVector& other) const noexcept;

private:
    int n_qubits_ = 0;
    std::vector<Complex> amps_;
};

// Square 2^n x 2^n complex matrix, row-major. Unitarity is checked on
// construction unless the unchecked factory is used for intermediate products.
class Operator {
public:
    Operator(int n_qubits, std::vector<Complex> entries);

    static Operator identity(int n_qubits);
    // Skips the unitarity check; finiteness and shape are still validated.
    static Operator general(int n_qubits, std::vector<Complex> entries);

    int n_qubits() const noexcept { return n_qubits_; }
    std::size_t dim() const noexcept { return dim_; }
    const Complex& operator()(std::size_t row, std::size_t col) const { return entries_[row * dim_ + col]; }
    std::span<const Complex> entries() const noexcept { return entries_; }

    // max |(U^dagger U - I)_ij|
    double unitarity_defect() const;
    bool is_unitary(double tol = kUnitaryTol) const { return unitarity_defect() < tol; }

private:
    Operator(int n_qubits, std::vector<Complex> entries, bool check_unitary);

    int n_qubits_ = 0;
    std::size_t dim_ = 0;
    std::vector<Complex> entries_;
};

enum class Pauli { X, Y, Z };

StateVector make_state(int bit, Basis basis);

Operator rotation(double theta);
Operator pauli(Pauli which);
Operator tensor(const Operator& a, const Operator& b);
Operator dagger(const Operator& u);
Operator multiply(const Operator& a, const Operator& b);
// Entrywise scaling; the result is unitary only when |factor| = 1.
Operator scale(const Operator& u, Complex factor);

// max_ij |a_ij - b_ij|
double max_abs_diff(const Operator& a, const Operator& b);

StateVector apply(const Operator& u, const StateVector& s);
// Applies a k-qubit operator to qubits [first_qubit, first_qubit + k) of s.
StateVector apply_on_qubits(const Operator& u, const StateVector& s, int first_qubit);

Complex inner_product(const StateVector& a, const StateVector& b);
double fidelity(const StateVector& a, const StateVector& b);

bool commutes(const Operator& a, const Operator& b, double tol = kExactTol);

struct PhaseCommutation {
    bool commutes = false;
    Complex phase{0.0, 0.0};  // meaningful only when commutes is true
};
// Tests ab = lambda * ba for some unit-modulus lambda.
PhaseCommutation commutes_up_to_phase(const Operator& a, const Operator& b, double tol = kExactTol);

// Probability that measuring a 1-qubit state in `basis` yields bit 1.
double probability_of_one(const StateVector& s, Basis basis);

// Projective measurement of a 1-qubit state; returns the bit and the
// collapsed basis state.
std::pair<int, StateVector> measure(const StateVector& s, Basis basis, RandomStream& rng);

// Per-qubit projective measurement of one qubit of an n-qubit state.
std::pair<int, StateVector> measure_qubit(const StateVector& s, int qubit, Basis basis, RandomStream& rng);

std::string to_string(const StateVector& s);

}  // namespace qkdsim
