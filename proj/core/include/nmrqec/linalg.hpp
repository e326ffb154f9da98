#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

// Dense complex linear algebra for small spin registers (dim <= 32).
//
// Tensor-factor convention used across the whole library: qubit 0 is the
// leftmost Kronecker factor and therefore the slowest basis index (the top
// wire of a circuit diagram). kron(a, b) puts a's index as the slow one.

namespace nmrqec {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

/// Dense operator on a register Hilbert space. The hermitian/unitary flags
/// are advisory: set by constructors that know them, validated on demand.
struct OperatorMatrix {
    Matrix m;
    bool hermitian = false;
    bool unitary = false;

    OperatorMatrix() = default;
    explicit OperatorMatrix(Matrix mat, bool herm = false, bool unit = false)
        : m(std::move(mat)), hermitian(herm), unitary(unit) {}

    Eigen::Index dim() const { return m.rows(); }

    bool check_hermitian(double tol = 1e-12) const;
    bool check_unitary(double tol = 1e-10) const;
};

// Single-qubit basics.
Matrix pauli_i();
Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();
Matrix hadamard();

/// Kronecker product; a's index is the slow (leftmost-factor) one.
OperatorMatrix kronecker(const OperatorMatrix& a, const OperatorMatrix& b);
Matrix kronecker(const Matrix& a, const Matrix& b);

/// exp(-i h t) for Hermitian h, via eigendecomposition. Throws
/// std::invalid_argument if h fails the Hermiticity check (tol 1e-10).
OperatorMatrix expm_hermitian(const OperatorMatrix& h, double t);
Matrix expm_hermitian(const Matrix& h, double t);

/// Trace over every tensor factor not listed in `keep`. `dims` gives the
/// factor dimensions in slow-to-fast order; their product must equal the
/// matrix dimension. Factors in `keep` retain their original order.
Matrix partial_trace(const Matrix& rho, const std::vector<std::size_t>& keep,
                     const std::vector<Eigen::Index>& dims);

/// Frobenius inner product <a, b> = Tr(a^dag b).
Complex frobenius_inner(const Matrix& a, const Matrix& b);

double frobenius_norm(const Matrix& a);

/// Largest elementwise absolute difference.
double max_abs_diff(const Matrix& a, const Matrix& b);

}  // namespace nmrqec
