#pragma once

#include "nmrqec/deviation.hpp"
#include "nmrqec/linalg.hpp"
#include "nmrqec/spin_system.hpp"

#include <optional>
#include <vector>

// The three phase-error classes as composable channels: coherent Z rotations,
// dephasing maps, evolution under the natural Hamiltonian (optionally with
// unpolarized bath spins traced out afterwards), and deterministic ensemble
// averaging over a Zeeman-offset distribution.
//
// Every channel here is unital and trace-preserving: a weighted set of
// unitary conjugations, with classical-parameter averaging on top.

namespace nmrqec {

enum class ChannelKind { identity, coherent_z, dephasing, natural_evolution, composed };

/// Deterministic quadrature over a classical offset distribution.
/// Offsets are in kHz; weights are normalized to 1.
struct DispersionModel {
    enum class Shape { gaussian, lorentzian };

    Shape shape = Shape::lorentzian;
    double width_khz = 0.0;
    std::vector<double> offsets_khz;
    std::vector<double> weights;

    int n_samples() const { return static_cast<int>(offsets_khz.size()); }

    /// Gauss-Hermite nodes for a normal distribution with std dev width_khz.
    static DispersionModel gaussian(double width_khz, int n_samples = 15);
    /// Equal-probability-mass nodes for a Lorentzian with HWHM width_khz.
    static DispersionModel lorentzian(double width_khz, int n_samples = 15);
};

/// Lorentzian HWHM giving a free-induction decay exp(-tau / t2star):
/// gamma = 1 / (2 pi t2star).
double lorentzian_width_for_t2star(double t2star_ms);
/// Gaussian sigma giving exp(-(tau / t2star)^2): sigma = 1 / (sqrt(2) pi t2star).
double gaussian_width_for_t2star(double t2star_ms);

class NoiseChannel {
  public:
    struct UnitaryTerm {
        double weight;
        Matrix u;               // acts on system (x) bath
        Eigen::Index bath_dim;  // 1 when no bath factor
    };
    struct Stage {
        std::vector<UnitaryTerm> terms;
    };

    ChannelKind kind = ChannelKind::identity;

    Eigen::Index dim() const { return dim_; }
    const std::vector<Stage>& stages() const { return stages_; }

    /// rho -> sum_i w_i Tr_bath[ U_i (rho (x) I/b) U_i^dag ], per stage in order.
    Matrix apply(const Matrix& rho) const;
    DeviationState apply(const DeviationState& rho) const;

    static NoiseChannel identity(std::size_t n_qubits = 3);

    friend NoiseChannel coherent_z(double, std::size_t, std::size_t);
    friend NoiseChannel dephasing(double, std::size_t, std::size_t);
    friend NoiseChannel dephasing_probability(double, std::size_t, std::size_t);
    friend NoiseChannel natural_evolution(const SpinSystem&, double, double);
    friend NoiseChannel dispersion_average(const NoiseChannel&, const DispersionModel&);
    friend NoiseChannel compose(const std::vector<NoiseChannel>&);

  private:
    Eigen::Index dim_ = 8;
    std::vector<Stage> stages_;

    // Retained for dispersion_average when kind == natural_evolution.
    struct NaturalRecipe {
        SpinSystem sys;
        double tau_ms;
        double decoupling_scale;
    };
    std::optional<NaturalRecipe> recipe_;
};

/// Conjugation by exp(-i theta/2 Z_qubit): Z_qubit^theta.
NoiseChannel coherent_z(double theta, std::size_t qubit, std::size_t n_qubits = 3);

/// Dephasing map cos^2(theta) rho + sin^2(theta) Z rho Z on one qubit.
NoiseChannel dephasing(double theta, std::size_t qubit, std::size_t n_qubits = 3);

/// Same map parameterized by the flip weight q = sin^2(theta).
NoiseChannel dephasing_probability(double q, std::size_t qubit, std::size_t n_qubits = 3);

/// Evolution exp(-i H tau) under the register Hamiltonian with bath couplings
/// scaled by decoupling_scale; bath spins start maximally mixed and are traced
/// out, so this is a genuinely decoherent channel on the carbons when bath
/// couplings are active. decoupling_scale = 0 drops the bath entirely.
NoiseChannel natural_evolution(const SpinSystem& sys, double tau_ms,
                               double decoupling_scale = 1.0);

/// Weighted sum of the channel rebuilt at each sampled Zeeman offset; only
/// defined for natural_evolution inputs.
NoiseChannel dispersion_average(const NoiseChannel& base, const DispersionModel& model);

/// Functional composition; channels apply in list order (first one first).
NoiseChannel compose(const std::vector<NoiseChannel>& channels);

}  // namespace nmrqec
