#include "nmrqec/linalg.hpp"

#include <stdexcept>
#include <string>

namespace nmrqec {

namespace {
constexpr Complex kI{0.0, 1.0};
}

bool OperatorMatrix::check_hermitian(double tol) const {
    return max_abs_diff(m, m.adjoint()) <= tol;
}

bool OperatorMatrix::check_unitary(double tol) const {
    Matrix should_be_id = m.adjoint() * m;
    return max_abs_diff(should_be_id, Matrix::Identity(m.rows(), m.cols())) <= tol;
}

Matrix pauli_i() { return Matrix::Identity(2, 2); }

Matrix pauli_x() {
    Matrix x(2, 2);
    x << 0, 1, 1, 0;
    return x;
}

Matrix pauli_y() {
    Matrix y(2, 2);
    y << 0, -kI, kI, 0;
    return y;
}

Matrix pauli_z() {
    Matrix z(2, 2);
    z << 1, 0, 0, -1;
    return z;
}

Matrix hadamard() {
    Matrix h(2, 2);
    const double s = 1.0 / std::sqrt(2.0);
    h << s, s, s, -s;
    return h;
}

Matrix kronecker(const Matrix& a, const Matrix& b) {
    const Eigen::Index ar = a.rows(), ac = a.cols(), br = b.rows(), bc = b.cols();
    Matrix out(ar * br, ac * bc);
    for (Eigen::Index i = 0; i < ar; ++i)
        for (Eigen::Index j = 0; j < ac; ++j)
            out.block(i * br, j * bc, br, bc) = a(i, j) * b;
    return out;
}

OperatorMatrix kronecker(const OperatorMatrix& a, const OperatorMatrix& b) {
    return OperatorMatrix(kronecker(a.m, b.m), a.hermitian && b.hermitian,
                          a.unitary && b.unitary);
}

Matrix expm_hermitian(const Matrix& h, double t) {
    if (max_abs_diff(h, h.adjoint()) > 1e-10)
        throw std::invalid_argument("expm_hermitian: input is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("expm_hermitian: eigendecomposition failed");
    const Eigen::VectorXd& lam = es.eigenvalues();
    Eigen::VectorXcd phases(lam.size());
    for (Eigen::Index k = 0; k < lam.size(); ++k)
        phases(k) = std::exp(-kI * lam(k) * t);
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

OperatorMatrix expm_hermitian(const OperatorMatrix& h, double t) {
    return OperatorMatrix(expm_hermitian(h.m, t), false, true);
}

Matrix partial_trace(const Matrix& rho, const std::vector<std::size_t>& keep,
                     const std::vector<Eigen::Index>& dims) {
    Eigen::Index total = 1;
    for (Eigen::Index d : dims) total *= d;
    if (total != rho.rows() || rho.rows() != rho.cols())
        throw std::invalid_argument("partial_trace: factor dims do not match matrix size");
    for (std::size_t k : keep)
        if (k >= dims.size())
            throw std::invalid_argument("partial_trace: keep index out of range");

    std::vector<bool> kept(dims.size(), false);
    for (std::size_t k : keep) kept[k] = true;

    Eigen::Index keep_dim = 1, trace_dim = 1;
    for (std::size_t f = 0; f < dims.size(); ++f) (kept[f] ? keep_dim : trace_dim) *= dims[f];

    // Strides of each factor in the full index, slow-to-fast.
    std::vector<Eigen::Index> stride(dims.size());
    Eigen::Index s = total;
    for (std::size_t f = 0; f < dims.size(); ++f) {
        s /= dims[f];
        stride[f] = s;
    }

    // Map (kept multi-index, traced multi-index) -> full index.
    const auto full_index = [&](Eigen::Index ki, Eigen::Index ti) {
        Eigen::Index idx = 0;
        Eigen::Index kr = ki, tr = ti;
        // Walk kept factors slow-to-fast, peeling digits off kr; same for traced.
        for (std::size_t f = 0; f < dims.size(); ++f) {
            if (!kept[f]) continue;
            Eigen::Index radix = 1;
            for (std::size_t g = f + 1; g < dims.size(); ++g)
                if (kept[g]) radix *= dims[g];
            idx += (kr / radix) * stride[f];
            kr %= radix;
        }
        for (std::size_t f = 0; f < dims.size(); ++f) {
            if (kept[f]) continue;
            Eigen::Index radix = 1;
            for (std::size_t g = f + 1; g < dims.size(); ++g)
                if (!kept[g]) radix *= dims[g];
            idx += (tr / radix) * stride[f];
            tr %= radix;
        }
        return idx;
    };

    Matrix out = Matrix::Zero(keep_dim, keep_dim);
    for (Eigen::Index i = 0; i < keep_dim; ++i)
        for (Eigen::Index j = 0; j < keep_dim; ++j) {
            Complex acc = 0.0;
            for (Eigen::Index t = 0; t < trace_dim; ++t)
                acc += rho(full_index(i, t), full_index(j, t));
            out(i, j) = acc;
        }
    return out;
}

Complex frobenius_inner(const Matrix& a, const Matrix& b) {
    return (a.adjoint() * b).trace();
}

double frobenius_norm(const Matrix& a) { return a.norm(); }

double max_abs_diff(const Matrix& a, const Matrix& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace nmrqec
