#include "nmrqec/qec_code.hpp"

#include "nmrqec/spin_system.hpp"

#include <stdexcept>

namespace nmrqec {

namespace {

// control qubit c, target t, 0-based wires on 3 qubits
Matrix cnot3(std::size_t c, std::size_t t) {
    Matrix out = Matrix::Zero(8, 8);
    for (Eigen::Index b = 0; b < 8; ++b) {
        const bool cbit = (b >> (2 - c)) & 1;
        Eigen::Index to = b;
        if (cbit) to = b ^ (Eigen::Index(1) << (2 - t));
        out(to, b) = 1.0;
    }
    return out;
}

Matrix toffoli_on_data() {
    Matrix out = Matrix::Identity(8, 8);
    out(6, 6) = 0.0;
    out(7, 7) = 0.0;
    out(6, 7) = 1.0;  // |110> <-> |111>
    out(7, 6) = 1.0;
    return out;
}

Matrix ccz() {
    Matrix out = Matrix::Identity(8, 8);
    out(7, 7) = -1.0;
    return out;
}

Matrix swap_ancilla_wires() {
    Matrix out = Matrix::Zero(8, 8);
    for (Eigen::Index b = 0; b < 8; ++b) {
        const Eigen::Index a0 = (b >> 2) & 1, a1 = (b >> 1) & 1, d = b & 1;
        out((a1 << 2) | (a0 << 1) | d, b) = 1.0;
    }
    return out;
}

}  // namespace

CodeCircuit CodeCircuit::standard(bool swap_ancillae) {
    const Matrix h3 = kronecker(kronecker(hadamard(), hadamard()), hadamard());
    // The trailing CCX*CCZ fixes the action on the ancilla-11 block so that an
    // IIZ error decodes to a plain Z flip on the data wire.
    Matrix enc = h3 * cnot3(2, 0) * cnot3(2, 1) * toffoli_on_data() * ccz();
    if (swap_ancillae) enc = enc * swap_ancilla_wires();

    CodeCircuit code;
    code.u_encode = OperatorMatrix(enc, false, true);
    code.u_decode = OperatorMatrix(enc.adjoint(), false, true);
    code.u_correct = OperatorMatrix(ccz(), true, true);
    code.swapped_ancillae = swap_ancillae;
    return code;
}

Matrix ancilla_block_projector(int a, int b) {
    Matrix out = Matrix::Zero(8, 8);
    const Eigen::Index base = (Eigen::Index(a) << 2) | (Eigen::Index(b) << 1);
    out(base, base) = 1.0;
    out(base + 1, base + 1) = 1.0;
    return out;
}

DeviationState encode(const CodeCircuit& code, const DeviationState& rho) {
    if (rho.matrix.dim() != 8)
        throw std::invalid_argument("encode: deviation must live on the 3-qubit space");
    const Matrix p00 = ancilla_block_projector(0, 0);
    const Matrix leak = rho.matrix.m - p00 * rho.matrix.m * p00;
    if (leak.cwiseAbs().maxCoeff() > 1e-8)
        throw std::invalid_argument("encode: input deviation leaks outside the ancilla-|00> block");

    DeviationState out;
    out.matrix = OperatorMatrix(code.u_encode.m * rho.matrix.m * code.u_encode.m.adjoint());
    out.scale = rho.scale;
    return out;
}

DeviationState decode_and_correct(const CodeCircuit& code, const DeviationState& rho,
                                  bool apply_correction) {
    if (rho.matrix.dim() != 8)
        throw std::invalid_argument("decode_and_correct: deviation must be 3-qubit");
    Matrix m = code.u_decode.m * rho.matrix.m * code.u_decode.m.adjoint();
    if (apply_correction) m = code.u_correct.m * m * code.u_correct.m.adjoint();
    DeviationState out;
    out.matrix = OperatorMatrix(std::move(m));
    out.scale = rho.scale;
    return out;
}

std::array<double, 4> syndrome_intensities(const CodeCircuit& code, const Matrix& decoded,
                                           const Matrix& input_op) {
    const double norm = std::real((input_op.adjoint() * input_op).trace());
    if (norm <= 0.0)
        throw std::invalid_argument("syndrome_intensities: input observable has zero norm");

    // Logical syndrome order (00, 10, 01, 11); with relabeled ancillae the
    // physical bit pattern for the mixed syndromes swaps.
    const int patterns[4][2] = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
    std::array<double, 4> out{};
    for (int s = 0; s < 4; ++s) {
        int a = patterns[s][0], b = patterns[s][1];
        if (code.swapped_ancillae) std::swap(a, b);
        Matrix block_obs = Matrix::Zero(8, 8);
        const Eigen::Index base = (Eigen::Index(a) << 2) | (Eigen::Index(b) << 1);
        block_obs.block(base, base, 2, 2) = input_op;
        out[s] = std::real((block_obs.adjoint() * decoded).trace()) / norm;
    }
    return out;
}

}  // namespace nmrqec
