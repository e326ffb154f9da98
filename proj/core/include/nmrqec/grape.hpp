#pragma once

#include "nmrqec/linalg.hpp"
#include "nmrqec/noise.hpp"
#include "nmrqec/spin_system.hpp"

#include <array>
#include <string>
#include <vector>

// Gradient-ascent pulse engineering: piecewise-constant collective x/y drive
// amplitudes maximizing the Hilbert-Schmidt gate fidelity, averaged over a
// Zeeman-offset x rf-inhomogeneity robustness ensemble. Per-slice derivatives
// are exact (eigendecomposition of each slice generator), so the gradient
// matches finite differences to machine-level accuracy.

namespace nmrqec {

struct ControlPulse {
    double dt_ms = 0.001;
    std::vector<std::array<double, 2>> amplitudes_khz;  // (u_x, u_y) per slice

    std::size_t n_slices() const { return amplitudes_khz.size(); }
    double duration_ms() const { return dt_ms * static_cast<double>(n_slices()); }

    static ControlPulse zeros(std::size_t n_slices, double dt_ms);
};

struct EnsembleMember {
    double shift_offset_khz = 0.0;
    double rf_scale = 1.0;
    double weight = 1.0;
};

struct RobustnessEnsemble {
    std::vector<EnsembleMember> members;

    static RobustnessEnsemble single();
    /// Outer product of offset quadrature nodes and rf scales (equal rf
    /// weights); member weights renormalized to 1.
    static RobustnessEnsemble grid(const DispersionModel& offsets,
                                   const std::vector<double>& rf_scales);

    void validate() const;  // weights sum to 1, rf scales positive
};

/// Drift plus control generators for the pulse problem, all in rad/ms with
/// amplitudes in kHz. offset_gen is the per-kHz collective Z generator.
struct ControlSystem {
    Matrix drift;
    Matrix offset_gen;
    Matrix cx, cy;

    Eigen::Index dim() const { return drift.rows(); }

    /// Collective drive on the three carbons; bath couplings are not part of
    /// the pulse-design problem and are ignored.
    static ControlSystem from_spin_system(const SpinSystem& sys);
    static ControlSystem single_spin(double shift_khz = 0.0);
};

/// Time-ordered product of the slice propagators, first slice rightmost.
Matrix propagate(const ControlPulse& pulse, const ControlSystem& csys,
                 const EnsembleMember& member);
Matrix propagate(const ControlPulse& pulse, const SpinSystem& sys,
                 const EnsembleMember& member);

/// |Tr(target^dag u)|^2 / d^2; invariant under a global phase of either side.
double gate_fidelity(const Matrix& u, const Matrix& target);

double ensemble_fidelity(const ControlPulse& pulse, const ControlSystem& csys,
                         const Matrix& target, const RobustnessEnsemble& ensemble);

/// Exact gradient of the ensemble-averaged fidelity, per slice (d/du_x, d/du_y).
std::vector<std::array<double, 2>> gradient(const ControlPulse& pulse,
                                            const ControlSystem& csys,
                                            const Matrix& target,
                                            const RobustnessEnsemble& ensemble);

enum class OptimizeStatus { target_reached, converged, max_iterations, time_limit };

struct OptimizeSettings {
    int max_iterations = 500;
    double tolerance = 1e-10;       // stop when an accepted step improves less
    double initial_step_khz = 1.0;  // largest per-slice amplitude change to try first
    double target_fidelity = 1.0;
    double time_limit_s = 0.0;  // 0 disables the wall-clock cutoff
    // When > 0, the ascent runs on a truncated Fourier parametrization of the
    // amplitudes (this many harmonics per channel on top of the initial
    // pulse). Gradients stay exact via the chain rule; long raw-slice
    // parameter vectors condition badly and crawl.
    int smooth_modes = 0;
};

struct OptimizeResult {
    ControlPulse pulse;
    std::vector<double> fidelity_trace;  // best value per iteration, non-decreasing
    OptimizeStatus status = OptimizeStatus::converged;
    double best_fidelity = 0.0;
    int iterations = 0;
};

/// Gradient ascent with a backtracking line search; the reported best
/// fidelity never decreases between iterations.
OptimizeResult optimize(const ControlPulse& initial, const ControlSystem& csys,
                        const Matrix& target, const RobustnessEnsemble& ensemble,
                        const OptimizeSettings& settings);

/// Splits every slice into `factor` equal sub-slices. The piecewise-constant
/// waveform (and hence the propagator) is unchanged; only the control
/// granularity available to further optimization increases.
ControlPulse upsample(const ControlPulse& pulse, std::size_t factor);

/// Plain-text pulse files: `# n_slices=` and `# dt_ms=` header comments, one
/// `u_x_khz u_y_khz` line per slice.
void save_pulse(const ControlPulse& pulse, const std::string& path);
ControlPulse load_pulse(const std::string& path);

}  // namespace nmrqec
