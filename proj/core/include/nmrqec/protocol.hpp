#pragma once

#include "nmrqec/deviation.hpp"
#include "nmrqec/noise.hpp"
#include "nmrqec/qec_code.hpp"

#include <array>
#include <functional>

// Experiment orchestration: labeled-PPS preparation through the
// triple-quantum-coherence filter, one-round and two-round error-correction
// sequences, survival fractions, and entanglement fidelity.

namespace nmrqec {

enum class InputPauli { x, y, z };

enum class Mode { unencoded, decoded, corrected, two_rounds };

struct RoundResult {
    double f_x = 0, f_y = 0, f_z = 0;
    double entanglement_fidelity = 0;  // (1 + f_x + f_y + f_z) / 4
    // Syndrome intensities (s00, s10, s01, s11) per input label X, Y, Z,
    // measured on the decoded state before correction.
    std::array<std::array<double, 4>, 3> syndromes{};
    bool has_syndromes = false;
    // Channel-pipeline branches executed per input Pauli (4 with the
    // syndrome-cycling two-round scheme, 1 otherwise).
    int branches_per_input = 1;
};

double entanglement_fidelity(double f_x, double f_y, double f_z);

/// f_P = Tr[P Lambda(P)] / Tr[P P] on the data qubit, where `pipeline` maps
/// the 8x8 deviation |00><00| (x) P through the configured stages.
double survival_fraction(const std::function<Matrix(const Matrix&)>& pipeline,
                         InputPauli input);

/// Thermal deviation Z1 + Z2 + Z3.
DeviationState thermal_state();

/// Keeps the +/-order coherence components via an N-step collective-rotation
/// phase cycle. Requires n_steps > 2 |order| (no aliasing for 3 spins).
DeviationState phase_cycle_filter(const DeviationState& rho, int order, int n_steps);

/// Projects the deviation onto the labeled PPS (I+Z)(I+Z)X / 8: a data-spin
/// pre-rotation, conjugation by the unitary that encodes the PPS deviation in
/// the triple-quantum coherence |000><111| + h.c., and an 8-step 3QCF cycle.
/// Inputs orthogonal to the filtered coherence yield a zero deviation.
DeviationState prepare_pps(const DeviationState& thermal);

/// Exact unitary rotating the prepared data-spin X deviation onto the
/// requested input Pauli (identity for X).
Matrix input_rotation(InputPauli input);

Matrix pauli_matrix(InputPauli input);

struct RoundConfig {
    Mode mode = Mode::corrected;
    const NoiseChannel* channel = nullptr;  // applied between encode and decode
    CodeCircuit code = CodeCircuit::standard();
    // Per-gate depolarizing knob: each gate application shrinks the deviation
    // by (1 - gate_error). Default off.
    double gate_error = 0.0;
};

/// prep -> (encode) -> channel -> (decode [+ correct]) -> measure, for inputs
/// X, Y and Z. Throws std::invalid_argument for mode == two_rounds.
RoundResult run_one_round(const RoundConfig& cfg);

struct TwoRoundConfig {
    const NoiseChannel* half_channel = nullptr;  // noise for each half interval
    CodeCircuit code = CodeCircuit::standard();
    // With ideal_ancillae the ancillae are traced out and reinitialized to
    // |00> between rounds (one branch); otherwise the four U_s syndrome-cycling
    // branches are executed and summed.
    bool ideal_ancillae = false;
    double gate_error = 0.0;
};

/// Two back-to-back rounds with the interaction interval split in half.
RoundResult run_two_rounds(const TwoRoundConfig& cfg);

/// U_s in {II, XI, IX, XX} on the ancillae, as an 8x8 operator.
Matrix syndrome_toggle(int index);

}  // namespace nmrqec
