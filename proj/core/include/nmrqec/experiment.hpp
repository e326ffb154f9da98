#pragma once

#include "nmrqec/grape.hpp"
#include "nmrqec/noise.hpp"
#include "nmrqec/protocol.hpp"
#include "nmrqec/spin_system.hpp"

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

// Declarative experiment descriptions: a flat key-value config format with
// sections, delay sweeps over the three run modes plus two rounds, CSV
// emission, and quadratic fits of the fidelity curves.

namespace nmrqec {

struct ConfigError : std::runtime_error {
    int line;
    std::string key;
    ConfigError(int line_, std::string key_, const std::string& what_);
};

struct ChannelSpec {
    ChannelKind kind = ChannelKind::natural_evolution;
    double theta_rad = 0.0;         // coherent_z / dephasing
    double flip_probability = -1.0; // dephasing alternative; <0 means unset
    std::size_t qubit = 2;          // 0-based; default Cm (the data qubit)
    double decoupling_scale = 1.0;

    enum class Dispersion { none, lorentzian, gaussian };
    Dispersion dispersion = Dispersion::none;
    double width_khz = 0.0;   // explicit width; 0 means derive from t2star
    double t2star_ms = 0.0;
    int n_samples = 15;
};

struct GrapeSpec {
    std::string target = "encode";  // encode | identity
    std::size_t n_slices = 1000;
    double dt_ms = 0.001;
    int max_iterations = 2000;
    double tolerance = 1e-12;
    double initial_step_khz = 1.0;
    double target_fidelity = 0.998;
    double time_limit_s = 0.0;
    double initial_amplitude_khz = 0.5;
    int smooth_modes = 120;  // Fourier harmonics per channel; 0 = raw slices
    std::vector<double> rf_scales = {0.95, 1.0, 1.05};
    int n_offsets = 5;
    ChannelSpec::Dispersion offset_dispersion = ChannelSpec::Dispersion::gaussian;
    double offset_width_khz = 0.0;
    double offset_t2star_ms = 2.0;
    std::string out_path = "pulse.txt";
};

struct ExperimentConfig {
    SpinSystem system;
    ChannelSpec channel;
    std::vector<Mode> modes;
    std::vector<double> delays_ms;
    bool ideal_ancillae = false;
    double gate_error = 0.0;
    std::string out_path = "sweep.csv";
    GrapeSpec grape;
};

/// Full validation with line-numbered errors; unknown keys are rejected.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

struct SweepRow {
    double delay_ms = 0.0;
    Mode mode = Mode::corrected;
    double f_x = 0, f_y = 0, f_z = 0, F_e = 0;
    std::array<double, 4> syndromes{};  // averaged over the three input labels
    bool has_syndromes = false;
};

std::string mode_name(Mode mode);

/// Executes the configured sweep; rows ordered by delay, then by mode in the
/// configured order. Deterministic for a fixed config.
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, int threads = 1);

/// Columns: delay_ms,mode,f_x,f_y,f_z,F_e,s00,s10,s01,s11 (syndrome fields
/// empty for unencoded rows). Values printed to 6 significant digits.
std::string to_csv(const std::vector<SweepRow>& rows);
void write_csv(const std::vector<SweepRow>& rows, const std::string& path);
std::vector<SweepRow> parse_csv(const std::string& text);

struct QuadraticFit {
    double c0 = 0, c1 = 0, c2 = 0;
    double rms_residual = 0;
};

/// Least-squares quadratic of F_e against delay for one mode; needs >= 3 rows.
QuadraticFit fit_quadratic(const std::vector<SweepRow>& rows, Mode mode);

/// Builds the configured channel at one delay (dispersion averaging included).
NoiseChannel make_channel(const ExperimentConfig& cfg, double delay_ms);

/// The GRAPE problem implied by the config: target unitary and ensemble.
Matrix grape_target(const ExperimentConfig& cfg);
RobustnessEnsemble grape_ensemble(const ExperimentConfig& cfg);
/// Deterministic band-limited initial guess (no randomness anywhere).
ControlPulse grape_initial_pulse(const GrapeSpec& spec);

struct PulseDesignResult {
    OptimizeResult result;
    double coarse_fidelity = 0.0;  // ensemble fidelity after the coarsest rung
};

/// Runs the configured pulse design on a multiresolution slice ladder: the
/// ensemble objective is optimized at coarse slicing first (cheap iterations),
/// then upsampled exactly and polished at the configured resolution.
PulseDesignResult design_pulse(const ExperimentConfig& cfg);

}  // namespace nmrqec
