#pragma once

#include "nmrqec/linalg.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

// Three-carbon register Hamiltonian in the rotating frame, product-operator
// construction, and coherence-order bookkeeping.
//
// Units: frequencies in kHz, time in ms, so Hamiltonians come out in rad/ms.
// All pi factors live inside build_hamiltonian; call sites pass plain kHz.

namespace nmrqec {

inline constexpr std::size_t kNumCarbons = 3;

/// One unpolarized bath spin coupled to a single carbon through the secular
/// part of the heteronuclear dipolar interaction, pi*d*(2 Zc Zb).
struct BathCoupling {
    std::size_t carbon;  // 0-based: 0 = C1, 1 = C2, 2 = Cm
    double coupling_khz;
};

struct SpinSystem {
    std::array<double, kNumCarbons> shifts_khz{};   // chemical shifts, diagonal of the table
    std::array<double, kNumCarbons> dipolar_khz{};  // D12, D13, D23 (upper triangle)
    std::array<double, kNumCarbons> j_khz{};        // J12, J13, J23
    std::vector<BathCoupling> bath;

    static std::size_t pair_index(std::size_t i, std::size_t j);

    /// Register dimension including bath spins (8 * 2^n_bath).
    Eigen::Index full_dim() const;
};

/// The malonic-acid single-crystal parameter set (kHz).
SpinSystem malonic();

/// Letters over {I, X, Y, Z}, one per register spin, qubit 0 first.
struct PauliString {
    std::string letters;

    explicit PauliString(std::string s) : letters(std::move(s)) {}
};

/// Kronecker product of single-qubit Paulis in the global factor order.
/// Throws std::invalid_argument on letters outside {I, X, Y, Z}.
OperatorMatrix pauli_operator(const PauliString& s);

/// Single Pauli embedded at `qubit` in an n-qubit register.
Matrix embedded_pauli(char letter, std::size_t qubit, std::size_t n_qubits);

/// Rotating-frame Hamiltonian in rad/ms:
///   sum_i pi (w_i + offset) Z_i
/// + sum_{i<j} pi D_ij (2 Z_i Z_j - X_i X_j - Y_i Y_j)
/// + sum_{i<j} (pi/2) J_ij (Z_i Z_j + X_i X_j + Y_i Y_j)
/// + pi d (2 Z_c Z_b) per bath spin, with bath couplings scaled by
///   `bath_scale` (the residual-decoupling knob).
/// Bath spins follow the carbons in factor order.
OperatorMatrix build_hamiltonian(const SpinSystem& sys, double shift_offset_khz,
                                 double bath_scale = 1.0);

/// Splits rho into coherence-order components: the |a><b| element has order
/// p = (#up spins in a) - (#up spins in b), counting |0> as up. The parts
/// sum back to rho exactly, and conjugation by exp(-i phi sum_i Z_i / 2)
/// multiplies the order-p part by exp(-i p phi).
std::map<int, Matrix> coherence_decompose(const Matrix& rho);

/// Direct projector onto the +/-order coherence components.
Matrix coherence_project(const Matrix& rho, int order);

/// Collective rotation exp(-i phi sum_i Z_i / 2) on n qubits.
Matrix collective_z_rotation(double phi, std::size_t n_qubits);

}  // namespace nmrqec
