#include "nmrqec/protocol.hpp"

#include "nmrqec/spin_system.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nmrqec {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr Complex kI{0.0, 1.0};

Matrix ry(double theta) {
    Matrix r(2, 2);
    r << std::cos(theta / 2), -std::sin(theta / 2), std::sin(theta / 2), std::cos(theta / 2);
    return r;
}

Matrix rz(double theta) {
    Matrix r = Matrix::Zero(2, 2);
    r(0, 0) = std::exp(-kI * theta / 2.0);
    r(1, 1) = std::exp(kI * theta / 2.0);
    return r;
}

Matrix on_data(const Matrix& v) {
    return kronecker(Matrix::Identity(4, 4), v);
}

// Maps the PPS deviation |00><00| (x) X onto |000><111| + |111><000|:
// a CNOT pair fanned out from the data spin.
Matrix pps_entangler() {
    Matrix u = Matrix::Zero(8, 8);
    for (Eigen::Index b = 0; b < 8; ++b) {
        Eigen::Index to = b;
        if (b & 1) to = b ^ 0b110;  // data = 1 flips both ancillae
        u(to, b) = 1.0;
    }
    return u;
}
}  // namespace

double entanglement_fidelity(double f_x, double f_y, double f_z) {
    return (1.0 + f_x + f_y + f_z) / 4.0;
}

Matrix pauli_matrix(InputPauli input) {
    switch (input) {
        case InputPauli::x: return pauli_x();
        case InputPauli::y: return pauli_y();
        case InputPauli::z: return pauli_z();
    }
    throw std::logic_error("unreachable");
}

Matrix input_rotation(InputPauli input) {
    switch (input) {
        case InputPauli::x: return Matrix::Identity(2, 2);
        case InputPauli::y: return rz(kPi / 2);   // X -> Y
        case InputPauli::z: return ry(-kPi / 2);  // X -> Z
    }
    throw std::logic_error("unreachable");
}

double survival_fraction(const std::function<Matrix(const Matrix&)>& pipeline,
                         InputPauli input) {
    const Matrix p = pauli_matrix(input);
    Matrix in = Matrix::Zero(8, 8);
    in.block(0, 0, 2, 2) = p;  // |00><00| (x) P
    const Matrix out = pipeline(in);
    Matrix obs = kronecker(Matrix::Identity(4, 4), p);
    const double denom = std::real((obs.adjoint() * in).trace());
    return std::real((obs.adjoint() * out).trace()) / denom;
}

DeviationState thermal_state() {
    Matrix m = embedded_pauli('Z', 0, 3) + embedded_pauli('Z', 1, 3) +
               embedded_pauli('Z', 2, 3);
    return DeviationState(std::move(m));
}

DeviationState phase_cycle_filter(const DeviationState& rho, int order, int n_steps) {
    if (n_steps <= 2 * std::abs(order))
        throw std::invalid_argument("phase_cycle_filter: n_steps must exceed 2 |order|");
    const Eigen::Index dim = rho.matrix.dim();
    std::size_t n_qubits = 0;
    while ((Eigen::Index(1) << n_qubits) < dim) ++n_qubits;

    Matrix acc = Matrix::Zero(dim, dim);
    for (int k = 0; k < n_steps; ++k) {
        const double phi = 2.0 * kPi * k / n_steps;
        // 2 cos(m phi) picks +/-m; the order-0 projector needs half of that.
        const double coeff =
            (order == 0) ? 1.0 : 2.0 * std::cos(order * phi);
        const Matrix r = collective_z_rotation(phi, n_qubits);
        acc += coeff * (r * rho.matrix.m * r.adjoint());
    }
    DeviationState out;
    out.matrix = OperatorMatrix(acc / n_steps);
    out.scale = rho.scale;
    return out;
}

DeviationState prepare_pps(const DeviationState& thermal) {
    if (thermal.matrix.dim() != 8)
        throw std::invalid_argument("prepare_pps: deviation must be 3-qubit");
    // Partial-overlap pre-rotation: leaves a positive X component when fed the
    // PPS itself (projector idempotence) while exposing the thermal Z3 term.
    const Matrix pre = on_data(ry(kPi / 4));
    const Matrix u = pps_entangler();

    Matrix m = pre * thermal.matrix.m * pre.adjoint();
    m = u * m * u.adjoint();
    DeviationState filtered(std::move(m), thermal.scale);
    filtered = phase_cycle_filter(filtered, 3, 8);
    DeviationState out;
    out.matrix = OperatorMatrix(u.adjoint() * filtered.matrix.m * u);
    out.scale = thermal.scale;
    return out;
}

Matrix syndrome_toggle(int index) {
    switch (index) {
        case 0: return Matrix::Identity(8, 8);
        case 1: return kronecker(kronecker(pauli_x(), pauli_i()), pauli_i());
        case 2: return kronecker(kronecker(pauli_i(), pauli_x()), pauli_i());
        case 3: return kronecker(kronecker(pauli_x(), pauli_x()), pauli_i());
    }
    throw std::invalid_argument("syndrome_toggle: index must be 0..3");
}

namespace {

struct PreparedInput {
    Matrix deviation;  // 8x8, ancillae |00>, data along the requested Pauli
    double reference;  // Tr[(I (x) P) deviation], the no-noise signal
};

PreparedInput prepare_input(InputPauli input) {
    const DeviationState pps = prepare_pps(thermal_state());
    const Matrix up = on_data(input_rotation(input));
    PreparedInput out;
    out.deviation = up * pps.matrix.m * up.adjoint();
    const Matrix obs = kronecker(Matrix::Identity(4, 4), pauli_matrix(input));
    out.reference = std::real((obs.adjoint() * out.deviation).trace());
    return out;
}

Matrix extract_block00(const Matrix& rho) {
    Matrix out = Matrix::Zero(8, 8);
    out.block(0, 0, 2, 2) = rho.block(0, 0, 2, 2);
    return out;
}

}  // namespace

RoundResult run_one_round(const RoundConfig& cfg) {
    if (cfg.mode == Mode::two_rounds)
        throw std::invalid_argument("run_one_round: use run_two_rounds for two_rounds mode");
    if (!cfg.channel) throw std::invalid_argument("run_one_round: no channel");
    if (cfg.channel->dim() != 8)
        throw std::invalid_argument("run_one_round: channel must act on the 3-qubit space");

    const double keep = 1.0 - cfg.gate_error;
    RoundResult res;
    res.has_syndromes = cfg.mode != Mode::unencoded;
    res.branches_per_input = 1;

    double f[3] = {0, 0, 0};
    for (int i = 0; i < 3; ++i) {
        const InputPauli input = static_cast<InputPauli>(i);
        const PreparedInput in = prepare_input(input);
        const Matrix obs = kronecker(Matrix::Identity(4, 4), pauli_matrix(input));

        Matrix state = in.deviation;
        if (cfg.mode == Mode::unencoded) {
            state = cfg.channel->apply(state);
        } else {
            state = keep * (cfg.code.u_encode.m * state * cfg.code.u_encode.m.adjoint());
            state = cfg.channel->apply(state);
            state = keep * (cfg.code.u_decode.m * state * cfg.code.u_decode.m.adjoint());
            if (cfg.mode == Mode::corrected)
                state = keep * (cfg.code.u_correct.m * state * cfg.code.u_correct.m.adjoint());
            // Corrected mode reads the intensities after the correction step,
            // so a flagged data flip shows up with its sign restored.
            res.syndromes[i] = syndrome_intensities(
                cfg.code, state * (2.0 / in.reference), pauli_matrix(input));
        }
        f[i] = std::real((obs.adjoint() * state).trace()) / in.reference;
    }

    res.f_x = f[0];
    res.f_y = f[1];
    res.f_z = f[2];
    res.entanglement_fidelity = entanglement_fidelity(f[0], f[1], f[2]);
    return res;
}

RoundResult run_two_rounds(const TwoRoundConfig& cfg) {
    if (!cfg.half_channel) throw std::invalid_argument("run_two_rounds: no channel");
    if (cfg.half_channel->dim() != 8)
        throw std::invalid_argument("run_two_rounds: channel must act on the 3-qubit space");

    const double keep = 1.0 - cfg.gate_error;
    const CodeCircuit& code = cfg.code;

    const auto round = [&](const Matrix& state_in) {
        Matrix s = keep * (code.u_encode.m * state_in * code.u_encode.m.adjoint());
        s = cfg.half_channel->apply(s);
        s = keep * (code.u_decode.m * s * code.u_decode.m.adjoint());
        return Matrix(keep * (code.u_correct.m * s * code.u_correct.m.adjoint()));
    };

    RoundResult res;
    res.has_syndromes = true;

    double f[3] = {0, 0, 0};
    for (int i = 0; i < 3; ++i) {
        const InputPauli input = static_cast<InputPauli>(i);
        const PreparedInput in = prepare_input(input);
        const Matrix obs = kronecker(Matrix::Identity(4, 4), pauli_matrix(input));

        const Matrix after_round1 = round(in.deviation);

        Matrix sum = Matrix::Zero(8, 8);
        int branches = 0;
        if (cfg.ideal_ancillae) {
            Matrix fresh = Matrix::Zero(8, 8);
            fresh.block(0, 0, 2, 2) = partial_trace(after_round1, {2}, {2, 2, 2});
            sum += round(fresh);
            ++branches;
        } else {
            for (int s = 0; s < 4; ++s) {
                const Matrix us = syndrome_toggle(s);
                const Matrix toggled = keep * (us * after_round1 * us.adjoint());
                const Matrix projected = extract_block00(toggled);
                sum += round(projected);
                ++branches;
            }
        }
        res.branches_per_input = branches;
        res.syndromes[i] =
            syndrome_intensities(code, sum * (2.0 / in.reference), pauli_matrix(input));
        f[i] = std::real((obs.adjoint() * sum).trace()) / in.reference;
    }

    res.f_x = f[0];
    res.f_y = f[1];
    res.f_z = f[2];
    res.entanglement_fidelity = entanglement_fidelity(f[0], f[1], f[2]);
    return res;
}

}  // namespace nmrqec
