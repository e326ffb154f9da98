#include "nmrqec/spin_system.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nmrqec {

namespace {
constexpr double kPi = std::numbers::pi;

Matrix single_pauli(char letter) {
    switch (letter) {
        case 'I': return pauli_i();
        case 'X': return pauli_x();
        case 'Y': return pauli_y();
        case 'Z': return pauli_z();
        default:
            throw std::invalid_argument(std::string("pauli_operator: invalid letter '") +
                                        letter + "'");
    }
}
}  // namespace

std::size_t SpinSystem::pair_index(std::size_t i, std::size_t j) {
    if (i >= j || j >= kNumCarbons)
        throw std::invalid_argument("SpinSystem: pair index must satisfy i < j < 3");
    // (0,1) -> 0, (0,2) -> 1, (1,2) -> 2
    return i + j - 1;
}

Eigen::Index SpinSystem::full_dim() const {
    return Eigen::Index(8) << bath.size();
}

SpinSystem malonic() {
    SpinSystem sys;
    sys.shifts_khz = {6.380, -1.533, -5.650};
    sys.dipolar_khz = {0.297, 0.780, 1.050};  // D12, D13, D23
    sys.j_khz = {-0.025, 0.071, 0.042};       // J12, J13, J23
    return sys;
}

Matrix embedded_pauli(char letter, std::size_t qubit, std::size_t n_qubits) {
    if (qubit >= n_qubits) throw std::invalid_argument("embedded_pauli: qubit out of range");
    Matrix out = (qubit == 0) ? single_pauli(letter) : pauli_i();
    for (std::size_t q = 1; q < n_qubits; ++q)
        out = kronecker(out, q == qubit ? single_pauli(letter) : pauli_i());
    return out;
}

OperatorMatrix pauli_operator(const PauliString& s) {
    if (s.letters.empty()) throw std::invalid_argument("pauli_operator: empty string");
    Matrix out = single_pauli(s.letters[0]);
    for (std::size_t q = 1; q < s.letters.size(); ++q)
        out = kronecker(out, single_pauli(s.letters[q]));
    return OperatorMatrix(std::move(out), true, true);
}

OperatorMatrix build_hamiltonian(const SpinSystem& sys, double shift_offset_khz,
                                 double bath_scale) {
    for (const BathCoupling& b : sys.bath) {
        if (b.carbon >= kNumCarbons)
            throw std::invalid_argument("build_hamiltonian: bath carbon index out of range");
        if (!std::isfinite(b.coupling_khz))
            throw std::invalid_argument("build_hamiltonian: bath coupling not finite");
    }

    const std::size_t n = kNumCarbons + sys.bath.size();
    const Eigen::Index dim = sys.full_dim();
    Matrix h = Matrix::Zero(dim, dim);

    for (std::size_t i = 0; i < kNumCarbons; ++i)
        h += kPi * (sys.shifts_khz[i] + shift_offset_khz) * embedded_pauli('Z', i, n);

    for (std::size_t i = 0; i < kNumCarbons; ++i) {
        for (std::size_t j = i + 1; j < kNumCarbons; ++j) {
            const std::size_t p = SpinSystem::pair_index(i, j);
            const Matrix zz = embedded_pauli('Z', i, n) * embedded_pauli('Z', j, n);
            const Matrix xx = embedded_pauli('X', i, n) * embedded_pauli('X', j, n);
            const Matrix yy = embedded_pauli('Y', i, n) * embedded_pauli('Y', j, n);
            h += kPi * sys.dipolar_khz[p] * (2.0 * zz - xx - yy);
            h += 0.5 * kPi * sys.j_khz[p] * (zz + xx + yy);
        }
    }

    for (std::size_t b = 0; b < sys.bath.size(); ++b) {
        const Matrix zc = embedded_pauli('Z', sys.bath[b].carbon, n);
        const Matrix zb = embedded_pauli('Z', kNumCarbons + b, n);
        h += kPi * bath_scale * sys.bath[b].coupling_khz * 2.0 * (zc * zb);
    }

    return OperatorMatrix(std::move(h), true, false);
}

namespace {
int order_of(Eigen::Index row, Eigen::Index col) {
    // |0> counts as up, so order = zeros(row) - zeros(col) = popcount(col) - popcount(row).
    return std::popcount(static_cast<unsigned>(col)) -
           std::popcount(static_cast<unsigned>(row));
}
}  // namespace

std::map<int, Matrix> coherence_decompose(const Matrix& rho) {
    const Eigen::Index dim = rho.rows();
    int n_bits = 0;
    while ((Eigen::Index(1) << n_bits) < dim) ++n_bits;
    if ((Eigen::Index(1) << n_bits) != dim)
        throw std::invalid_argument("coherence_decompose: dimension is not a power of 2");

    std::map<int, Matrix> parts;
    for (Eigen::Index r = 0; r < dim; ++r) {
        for (Eigen::Index c = 0; c < dim; ++c) {
            if (rho(r, c) == Complex(0.0, 0.0)) continue;
            const int p = order_of(r, c);
            auto [it, inserted] = parts.try_emplace(p, Matrix::Zero(dim, dim));
            it->second(r, c) = rho(r, c);
        }
    }
    return parts;
}

Matrix coherence_project(const Matrix& rho, int order) {
    const Eigen::Index dim = rho.rows();
    Matrix out = Matrix::Zero(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r)
        for (Eigen::Index c = 0; c < dim; ++c)
            if (std::abs(order_of(r, c)) == std::abs(order)) out(r, c) = rho(r, c);
    return out;
}

Matrix collective_z_rotation(double phi, std::size_t n_qubits) {
    const Eigen::Index dim = Eigen::Index(1) << n_qubits;
    Eigen::VectorXcd diag(dim);
    for (Eigen::Index b = 0; b < dim; ++b) {
        // sum_i z_i = (#up - #down) = n - 2*popcount(b)
        const int sum_z = int(n_qubits) - 2 * std::popcount(static_cast<unsigned>(b));
        diag(b) = std::exp(Complex(0.0, -0.5 * phi * sum_z));
    }
    return diag.asDiagonal();
}

}  // namespace nmrqec
