#pragma once

#include "nmrqec/deviation.hpp"
#include "nmrqec/linalg.hpp"

#include <array>

// The 3-bit phase code: |0> -> |+++>, |1> -> |--->, stabilizers XXI and IXX,
// correcting the error set {III, ZII, IZI, IIZ}.
//
// Wire convention: qubits 0 and 1 (top wires) are the ancillae and carry the
// syndrome after decoding; qubit 2 (bottom wire) carries the data. Syndromes
// 00, 10, 01, 11 flag errors III, ZII, IZI, IIZ respectively. After decoding,
// the IIZ error leaves a Z flip on the data wire; the correction is a Z on
// the data qubit conditioned on the ancillae reading 11.

namespace nmrqec {

struct CodeCircuit {
    OperatorMatrix u_encode;   // 8x8
    OperatorMatrix u_decode;   // inverse of u_encode
    OperatorMatrix u_correct;  // ancilla-conditioned Z on the data qubit

    /// Builds the standard circuit. With swap_ancillae the two ancilla wires
    /// trade places (syndrome bits swap accordingly); used to check that
    /// results do not depend on the wire labeling.
    static CodeCircuit standard(bool swap_ancillae = false);

    bool swapped_ancillae = false;
};

/// Conjugates a deviation supported on the ancilla-|00> block by u_encode.
/// Throws std::invalid_argument if the input leaks outside that block by
/// more than 1e-8 in max-abs terms.
DeviationState encode(const CodeCircuit& code, const DeviationState& rho);

/// Applies u_decode, then u_correct when apply_correction is set.
DeviationState decode_and_correct(const CodeCircuit& code, const DeviationState& rho,
                                  bool apply_correction);

/// Fraction of the input observable's signal in each ancilla block of a
/// decoded deviation, ordered (s00, s10, s01, s11); a noiseless round gives
/// (1, 0, 0, 0). `input_op` is the 2x2 observable prepared on the data qubit.
std::array<double, 4> syndrome_intensities(const CodeCircuit& code, const Matrix& decoded,
                                           const Matrix& input_op);

/// Projector |ab><ab| on the ancillae, as an 8x8 operator (identity on data).
Matrix ancilla_block_projector(int a, int b);

}  // namespace nmrqec
