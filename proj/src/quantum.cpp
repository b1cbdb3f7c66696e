#include "qkdsim/quantum.hpp"

#include <algorithm>
#include <cstring>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace qkdsim {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

bool all_finite(std::span<const Complex> v) {
    return std::all_of(v.begin(), v.end(),
                       [](const Complex& c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); });
}

int log2_exact(std::size_t n) {
    if (n == 0 || (n & (n - 1)) != 0) return -1;
    int k = 0;
    while ((std::size_t{1} << k) < n) ++k;
    return k;
}

void require_same_dim(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        std::ostringstream os;
        os << what << ": dimension mismatch (" << a << " vs " << b << ")";
        throw DimensionError(os.str());
    }
}

// Basis vectors of a single-qubit measurement setting, indexed by bit.
std::pair<Complex, Complex> basis_vector(Basis basis, int bit) {
    if (basis == Basis::rectilinear) return bit == 0 ? std::pair<Complex, Complex>{1.0, 0.0} : std::pair<Complex, Complex>{0.0, 1.0};
    return bit == 0 ? std::pair<Complex, Complex>{kInvSqrt2, kInvSqrt2} : std::pair<Complex, Complex>{kInvSqrt2, -kInvSqrt2};
}

}  // namespace

Polarization polarization_of(int bit, Basis basis) {
    if (bit != 0 && bit != 1) throw std::invalid_argument("polarization_of: bit must be 0 or 1");
    if (basis == Basis::rectilinear) return bit ? Polarization::vertical : Polarization::horizontal;
    return bit ? Polarization::backslash : Polarization::slash;
}

std::pair<int, Basis> decode_polarization(Polarization p) {
    switch (p) {
        case Polarization::horizontal: return {0, Basis::rectilinear};
        case Polarization::vertical: return {1, Basis::rectilinear};
        case Polarization::slash: return {0, Basis::diagonal};
        case Polarization::backslash: return {1, Basis::diagonal};
    }
    throw std::invalid_argument("decode_polarization: bad symbol");
}

char basis_symbol(Basis b) { return b == Basis::rectilinear ? '+' : 'X'; }

char polarization_symbol(Polarization p) {
    switch (p) {
        case Polarization::horizontal: return '-';
        case Polarization::vertical: return '|';
        case Polarization::slash: return '/';
        case Polarization::backslash: return '\\';
    }
    return '?';
}

Basis parse_basis(char c) {
    if (c == '+') return Basis::rectilinear;
    if (c == 'X' || c == 'x') return Basis::diagonal;
    throw std::invalid_argument(std::string("parse_basis: unknown basis symbol '") + c + "'");
}

Polarization parse_polarization(char c) {
    switch (c) {
        case '-': return Polarization::horizontal;
        case '|': return Polarization::vertical;
        case '/': return Polarization::slash;
        case '\\': return Polarization::backslash;
        default: throw std::invalid_argument(std::string("parse_polarization: unknown symbol '") + c + "'");
    }
}

// ---- StateVector ----

StateVector::StateVector(std::vector<Complex> amplitudes) : amps_(std::move(amplitudes)) {
    n_qubits_ = log2_exact(amps_.size());
    if (n_qubits_ < 1) throw DimensionError("StateVector: length must be 2^n with n >= 1");
    if (!all_finite(amps_)) throw std::invalid_argument("StateVector: non-finite amplitude");
    if (std::abs(norm_squared() - 1.0) >= kUnitaryTol)
        throw std::invalid_argument("StateVector: amplitudes are not normalized");
}

StateVector StateVector::basis_state(int n_qubits, std::size_t index) {
    if (n_qubits < 1 || n_qubits > 20) throw DimensionError("basis_state: n_qubits out of range");
    const std::size_t dim = std::size_t{1} << n_qubits;
    if (index >= dim) throw std::out_of_range("basis_state: index out of range");
    std::vector<Complex> amps(dim, Complex{0.0, 0.0});
    amps[index] = 1.0;
    return StateVector(std::move(amps));
}

double StateVector::norm_squared() const noexcept {
    double s = 0.0;
    for (const auto& a : amps_) s += std::norm(a);
    return s;
}

bool StateVector::identical(const StateVector& other) const noexcept {
    if (amps_.size() != other.amps_.size()) return false;
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        if (std::memcmp(&amps_[i], &other.amps_[i], sizeof(Complex)) != 0) return false;
    }
    return true;
}

// ---- Operator ----

Operator::Operator(int n_qubits, std::vector<Complex> entries) : Operator(n_qubits, std::move(entries), true) {}

Operator::Operator(int n_qubits, std::vector<Complex> entries, bool check_unitary)
    : n_qubits_(n_qubits), entries_(std::move(entries)) {
    if (n_qubits < 1 || n_qubits > 12) throw DimensionError("Operator: n_qubits out of range");
    dim_ = std::size_t{1} << n_qubits;
    if (entries_.size() != dim_ * dim_) throw DimensionError("Operator: entry count must be 4^n");
    if (!all_finite(entries_)) throw std::invalid_argument("Operator: non-finite entry");
    if (check_unitary && !is_unitary()) throw std::invalid_argument("Operator: matrix is not unitary");
}

Operator Operator::identity(int n_qubits) {
    if (n_qubits < 1 || n_qubits > 12) throw DimensionError("Operator: n_qubits out of range");
    const std::size_t dim = std::size_t{1} << n_qubits;
    std::vector<Complex> e(dim * dim, Complex{0.0, 0.0});
    for (std::size_t i = 0; i < dim; ++i) e[i * dim + i] = 1.0;
    return Operator(n_qubits, std::move(e), false);
}

Operator Operator::general(int n_qubits, std::vector<Complex> entries) {
    return Operator(n_qubits, std::move(entries), false);
}

double Operator::unitarity_defect() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
        for (std::size_t j = 0; j < dim_; ++j) {
            Complex acc{0.0, 0.0};
            for (std::size_t k = 0; k < dim_; ++k) acc += std::conj((*this)(k, i)) * (*this)(k, j);
            if (i == j) acc -= 1.0;
            worst = std::max(worst, std::abs(acc));
        }
    }
    return worst;
}

// ---- constructors of named states and gates ----

StateVector make_state(int bit, Basis basis) {
    if (bit != 0 && bit != 1) throw std::invalid_argument("make_state: bit must be 0 or 1");
    const auto [a0, a1] = basis_vector(basis, bit);
    return StateVector({a0, a1});
}

Operator rotation(double theta) {
    if (!std::isfinite(theta)) throw std::invalid_argument("rotation: theta must be finite");
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return Operator::general(1, {c, -s, s, c});
}

Operator pauli(Pauli which) {
    using namespace std::complex_literals;
    switch (which) {
        case Pauli::X: return Operator::general(1, {0.0, 1.0, 1.0, 0.0});
        case Pauli::Y: return Operator::general(1, {0.0, -1i, 1i, 0.0});
        case Pauli::Z: return Operator::general(1, {1.0, 0.0, 0.0, -1.0});
    }
    throw std::invalid_argument("pauli: unknown gate");
}

Operator tensor(const Operator& a, const Operator& b) {
    const std::size_t da = a.dim();
    const std::size_t db = b.dim();
    const std::size_t d = da * db;
    std::vector<Complex> e(d * d);
    for (std::size_t ia = 0; ia < da; ++ia)
        for (std::size_t ja = 0; ja < da; ++ja) {
            const Complex x = a(ia, ja);
            for (std::size_t ib = 0; ib < db; ++ib)
                for (std::size_t jb = 0; jb < db; ++jb) e[(ia * db + ib) * d + (ja * db + jb)] = x * b(ib, jb);
        }
    return Operator::general(a.n_qubits() + b.n_qubits(), std::move(e));
}

Operator dagger(const Operator& u) {
    const std::size_t d = u.dim();
    std::vector<Complex> e(d * d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) e[j * d + i] = std::conj(u(i, j));
    return Operator::general(u.n_qubits(), std::move(e));
}

Operator multiply(const Operator& a, const Operator& b) {
    require_same_dim(a.dim(), b.dim(), "multiply");
    const std::size_t d = a.dim();
    std::vector<Complex> e(d * d, Complex{0.0, 0.0});
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t k = 0; k < d; ++k) {
            const Complex x = a(i, k);
            for (std::size_t j = 0; j < d; ++j) e[i * d + j] += x * b(k, j);
        }
    return Operator::general(a.n_qubits(), std::move(e));
}

Operator scale(const Operator& u, Complex factor) {
    std::vector<Complex> e(u.entries().begin(), u.entries().end());
    for (auto& x : e) x *= factor;
    return Operator::general(u.n_qubits(), std::move(e));
}

double max_abs_diff(const Operator& a, const Operator& b) {
    require_same_dim(a.dim(), b.dim(), "max_abs_diff");
    double worst = 0.0;
    const auto ea = a.entries();
    const auto eb = b.entries();
    for (std::size_t i = 0; i < ea.size(); ++i) worst = std::max(worst, std::abs(ea[i] - eb[i]));
    return worst;
}

// ---- application ----

StateVector apply(const Operator& u, const StateVector& s) {
    require_same_dim(u.dim(), s.dim(), "apply");
    const std::size_t d = u.dim();
    std::vector<Complex> out(d, Complex{0.0, 0.0});
    for (std::size_t i = 0; i < d; ++i) {
        Complex acc{0.0, 0.0};
        for (std::size_t j = 0; j < d; ++j) acc += u(i, j) * s[j];
        out[i] = acc;
    }
    return StateVector(std::move(out));
}

StateVector apply_on_qubits(const Operator& u, const StateVector& s, int first_qubit) {
    const int k = u.n_qubits();
    const int n = s.n_qubits();
    if (first_qubit < 0 || first_qubit + k > n)
        throw DimensionError("apply_on_qubits: operator does not fit inside the state");
    if (k == n) return apply(u, s);

    const int low_bits = n - first_qubit - k;
    const std::size_t stride = std::size_t{1} << low_bits;
    const std::size_t block = u.dim();
    const std::size_t low_mask = stride - 1;
    const std::size_t dim = s.dim();

    std::vector<Complex> out(dim, Complex{0.0, 0.0});
    std::vector<Complex> gathered(block);
    // Iterate over every assignment of the qubits outside the block.
    for (std::size_t rest = 0; rest < dim / block; ++rest) {
        const std::size_t high = rest >> low_bits;
        const std::size_t low = rest & low_mask;
        const std::size_t base = (high << (low_bits + k)) | low;
        for (std::size_t j = 0; j < block; ++j) gathered[j] = s[base | (j << low_bits)];
        for (std::size_t i = 0; i < block; ++i) {
            Complex acc{0.0, 0.0};
            for (std::size_t j = 0; j < block; ++j) acc += u(i, j) * gathered[j];
            out[base | (i << low_bits)] = acc;
        }
    }
    return StateVector(std::move(out));
}

Complex inner_product(const StateVector& a, const StateVector& b) {
    require_same_dim(a.dim(), b.dim(), "inner_product");
    Complex acc{0.0, 0.0};
    for (std::size_t i = 0; i < a.dim(); ++i) acc += std::conj(a[i]) * b[i];
    return acc;
}

double fidelity(const StateVector& a, const StateVector& b) { return std::norm(inner_product(a, b)); }

bool commutes(const Operator& a, const Operator& b, double tol) {
    require_same_dim(a.dim(), b.dim(), "commutes");
    return max_abs_diff(multiply(a, b), multiply(b, a)) < tol;
}

PhaseCommutation commutes_up_to_phase(const Operator& a, const Operator& b, double tol) {
    require_same_dim(a.dim(), b.dim(), "commutes_up_to_phase");
    const Operator ab = multiply(a, b);
    const Operator ba = multiply(b, a);

    // The candidate phase is read off the largest entry of ba.
    const auto eba = ba.entries();
    std::size_t pivot = 0;
    for (std::size_t i = 1; i < eba.size(); ++i)
        if (std::abs(eba[i]) > std::abs(eba[pivot])) pivot = i;
    if (std::abs(eba[pivot]) < tol) return {};

    const Complex lambda = ab.entries()[pivot] / eba[pivot];
    if (std::abs(std::abs(lambda) - 1.0) >= tol) return {};
    if (max_abs_diff(ab, scale(ba, lambda)) >= tol) return {};
    return {true, lambda};
}

double probability_of_one(const StateVector& s, Basis basis) {
    if (s.n_qubits() != 1) throw DimensionError("probability_of_one: state must be a single qubit");
    const auto [b0, b1] = basis_vector(basis, 1);
    return std::norm(std::conj(b0) * s[0] + std::conj(b1) * s[1]);
}

std::pair<int, StateVector> measure(const StateVector& s, Basis basis, RandomStream& rng) {
    const double p1 = probability_of_one(s, basis);
    const int bit = rng.uniform() < p1 ? 1 : 0;
    return {bit, make_state(bit, basis)};
}

std::pair<int, StateVector> measure_qubit(const StateVector& s, int qubit, Basis basis, RandomStream& rng) {
    const int n = s.n_qubits();
    if (qubit < 0 || qubit >= n) throw DimensionError("measure_qubit: qubit index out of range");
    if (n == 1) return measure(s, basis, rng);

    const std::size_t mask = std::size_t{1} << (n - 1 - qubit);
    const auto proj = [&](int bit, std::size_t i0) {
        const auto [b0, b1] = basis_vector(basis, bit);
        return std::conj(b0) * s[i0] + std::conj(b1) * s[i0 | mask];
    };

    double p1 = 0.0;
    for (std::size_t i = 0; i < s.dim(); ++i)
        if ((i & mask) == 0) p1 += std::norm(proj(1, i));

    const int bit = rng.uniform() < p1 ? 1 : 0;
    const double p = bit ? p1 : 1.0 - p1;
    const double inv = 1.0 / std::sqrt(p);
    const auto [b0, b1] = basis_vector(basis, bit);
    std::vector<Complex> out(s.dim(), Complex{0.0, 0.0});
    for (std::size_t i = 0; i < s.dim(); ++i) {
        if ((i & mask) != 0) continue;
        const Complex c = proj(bit, i) * inv;
        out[i] = b0 * c;
        out[i | mask] = b1 * c;
    }
    return {bit, StateVector(std::move(out))};
}

std::string to_string(const StateVector& s) {
    std::ostringstream os;
    os << std::setprecision(6) << "[";
    for (std::size_t i = 0; i < s.dim(); ++i) {
        if (i) os << ", ";
        os << s[i].real() << (s[i].imag() < 0 ? "-" : "+") << std::abs(s[i].imag()) << "i";
    }
    os << "]";
    return os.str();
}

}  // namespace qkdsim
