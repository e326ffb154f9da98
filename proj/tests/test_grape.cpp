#include "nmrqec/grape.hpp"

#include "nmrqec/qec_code.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>

using namespace nmrqec;

namespace {
constexpr double kPi = std::numbers::pi;

ControlPulse random_pulse(std::size_t n_slices, double dt, double amp, std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-amp, amp);
    ControlPulse p = ControlPulse::zeros(n_slices, dt);
    for (auto& a : p.amplitudes_khz) {
        a[0] = u(rng);
        a[1] = u(rng);
    }
    return p;
}

Matrix random_unitary(Eigen::Index dim, std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix a(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) a(i, j) = Complex(u(rng), u(rng));
    return expm_hermitian(Matrix(0.5 * (a + a.adjoint())), 1.0);
}

std::vector<std::array<double, 2>> finite_difference_gradient(
    const ControlPulse& pulse, const ControlSystem& csys, const Matrix& target,
    const RobustnessEnsemble& ens, double h) {
    std::vector<std::array<double, 2>> g(pulse.n_slices(), {0.0, 0.0});
    for (std::size_t k = 0; k < pulse.n_slices(); ++k) {
        for (int c = 0; c < 2; ++c) {
            ControlPulse plus = pulse, minus = pulse;
            plus.amplitudes_khz[k][c] += h;
            minus.amplitudes_khz[k][c] -= h;
            g[k][c] = (ensemble_fidelity(plus, csys, target, ens) -
                       ensemble_fidelity(minus, csys, target, ens)) /
                      (2 * h);
        }
    }
    return g;
}

}  // namespace

TEST_SUITE("grape") {

TEST_CASE("zero pulse with zero drift propagates to the identity") {
    const ControlSystem csys = ControlSystem::single_spin(0.0);
    const ControlPulse p = ControlPulse::zeros(5, 0.01);
    CHECK(max_abs_diff(propagate(p, csys, EnsembleMember{}), Matrix::Identity(2, 2)) <
          1e-14);
}

TEST_CASE("single slice realizes the programmed rotation") {
    const ControlSystem csys = ControlSystem::single_spin(0.0);
    ControlPulse p = ControlPulse::zeros(1, 0.1);
    p.amplitudes_khz[0][0] = 5.0;  // pi * u * dt = pi/2
    const Matrix u = propagate(p, csys, EnsembleMember{});
    const Matrix expect = expm_hermitian(Matrix(0.5 * kPi * pauli_x()), 1.0);
    CHECK(max_abs_diff(u, expect) < 1e-12);
}

TEST_CASE("two equal slices match one merged slice under drift") {
    const ControlSystem csys = ControlSystem::from_spin_system(malonic());
    ControlPulse two = ControlPulse::zeros(2, 0.05);
    two.amplitudes_khz[0] = two.amplitudes_khz[1] = {1.3, -0.8};
    ControlPulse one = ControlPulse::zeros(1, 0.1);
    one.amplitudes_khz[0] = {1.3, -0.8};
    const EnsembleMember m{0.07, 1.02, 1.0};
    CHECK(max_abs_diff(propagate(two, csys, m), propagate(one, csys, m)) < 1e-10);
}

TEST_CASE("slices apply in time order") {
    const ControlSystem csys = ControlSystem::single_spin(0.0);
    ControlPulse p = ControlPulse::zeros(2, 0.1);
    p.amplitudes_khz[0] = {2.5, 0.0};  // X rotation first
    p.amplitudes_khz[1] = {0.0, 2.5};  // then Y rotation
    const Matrix u = propagate(p, csys, EnsembleMember{});
    const Matrix ux = expm_hermitian(Matrix(0.25 * kPi * pauli_x()), 1.0);
    const Matrix uy = expm_hermitian(Matrix(0.25 * kPi * pauli_y()), 1.0);
    CHECK(max_abs_diff(u, Matrix(uy * ux)) < 1e-12);
}

TEST_CASE("propagation is unitary for random pulses") {
    const ControlSystem csys = ControlSystem::from_spin_system(malonic());
    std::mt19937 rng(5);
    for (int t = 0; t < 3; ++t) {
        const ControlPulse p = random_pulse(40, 0.005, 8.0, rng);
        const Matrix u = propagate(p, csys, EnsembleMember{0.1, 0.97, 1.0});
        CHECK(max_abs_diff(Matrix(u.adjoint() * u), Matrix::Identity(8, 8)) < 1e-10);
    }
}

TEST_CASE("gate fidelity basics") {
    std::mt19937 rng(7);
    const Matrix u = random_unitary(8, rng);
    CHECK(gate_fidelity(u, u) == doctest::Approx(1.0).epsilon(1e-13));

    const Complex phase = std::exp(Complex(0, 0.83));
    CHECK(gate_fidelity(Matrix(phase * u), u) == doctest::Approx(1.0).epsilon(1e-13));

    const Matrix v = random_unitary(8, rng);
    const double f = gate_fidelity(u, v);
    CHECK(f >= 0.0);
    CHECK(f <= 1.0);
    CHECK_THROWS_AS((void)gate_fidelity(u, Matrix::Identity(4, 4)), std::invalid_argument);
}

TEST_CASE("gradient vanishes at a global optimum") {
    const ControlSystem csys = ControlSystem::single_spin(0.0);
    const ControlPulse p = ControlPulse::zeros(8, 0.01);
    const auto g = gradient(p, csys, Matrix::Identity(2, 2), RobustnessEnsemble::single());
    for (const auto& gk : g) {
        CHECK(std::abs(gk[0]) < 1e-8);
        CHECK(std::abs(gk[1]) < 1e-8);
    }
}

TEST_CASE("gradient matches central finite differences on a single spin") {
    const ControlSystem csys = ControlSystem::single_spin(0.8);
    std::mt19937 rng(11);
    const ControlPulse p = random_pulse(10, 0.02, 3.0, rng);
    const Matrix target = expm_hermitian(Matrix(0.5 * kPi * pauli_y()), 1.0);
    const RobustnessEnsemble ens = RobustnessEnsemble::single();

    const auto ga = gradient(p, csys, target, ens);
    const auto gf = finite_difference_gradient(p, csys, target, ens, 1e-6);
    for (std::size_t k = 0; k < p.n_slices(); ++k)
        for (int c = 0; c < 2; ++c) {
            const double rel =
                std::abs(ga[k][c] - gf[k][c]) / std::max(1e-6, std::abs(gf[k][c]));
            CHECK(rel < 1e-5);
        }
}

TEST_CASE("gradient matches central finite differences on the 3-carbon system") {
    const ControlSystem csys = ControlSystem::from_spin_system(malonic());
    std::mt19937 rng(13);
    const ControlPulse p = random_pulse(20, 0.01, 4.0, rng);
    const Matrix target = CodeCircuit::standard().u_encode.m;
    RobustnessEnsemble ens;
    ens.members = {{0.05, 0.98, 0.6}, {-0.08, 1.03, 0.4}};

    const auto ga = gradient(p, csys, target, ens);
    const auto gf = finite_difference_gradient(p, csys, target, ens, 1e-6);
    for (std::size_t k = 0; k < p.n_slices(); ++k)
        for (int c = 0; c < 2; ++c) {
            const double rel =
                std::abs(ga[k][c] - gf[k][c]) / std::max(1e-6, std::abs(gf[k][c]));
            CHECK(rel < 1e-5);
        }
}

TEST_CASE("ensemble gradient is the weighted member sum") {
    const ControlSystem csys = ControlSystem::from_spin_system(malonic());
    std::mt19937 rng(17);
    const ControlPulse p = random_pulse(6, 0.02, 2.0, rng);
    const Matrix target = CodeCircuit::standard().u_encode.m;

    const double w = 0.3;
    const EnsembleMember m1{0.1, 1.0, w}, m2{-0.2, 0.95, 1 - w};
    RobustnessEnsemble both;
    both.members = {m1, m2};
    RobustnessEnsemble only1, only2;
    only1.members = {{m1.shift_offset_khz, m1.rf_scale, 1.0}};
    only2.members = {{m2.shift_offset_khz, m2.rf_scale, 1.0}};

    const auto g = gradient(p, csys, target, both);
    const auto g1 = gradient(p, csys, target, only1);
    const auto g2 = gradient(p, csys, target, only2);
    for (std::size_t k = 0; k < p.n_slices(); ++k)
        for (int c = 0; c < 2; ++c)
            CHECK(g[k][c] ==
                  doctest::Approx(w * g1[k][c] + (1 - w) * g2[k][c]).epsilon(1e-12));
}

TEST_CASE("optimize returns immediately at a satisfied target") {
    const ControlSystem csys = ControlSystem::single_spin(0.0);
    OptimizeSettings settings;
    const OptimizeResult res = optimize(ControlPulse::zeros(10, 0.01), csys,
                                        Matrix::Identity(2, 2),
                                        RobustnessEnsemble::single(), settings);
    CHECK(res.best_fidelity == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(res.iterations == 0);
    CHECK(res.status == OptimizeStatus::target_reached);
}

TEST_CASE("optimize solves a single-spin rotation") {
    const ControlSystem csys = ControlSystem::single_spin(0.0);
    const Matrix target = expm_hermitian(Matrix(0.5 * kPi * pauli_x()), 1.0);
    ControlPulse initial = ControlPulse::zeros(10, 0.01);
    for (auto& a : initial.amplitudes_khz) a[0] = 1.0;  // off the zero-pulse saddle

    OptimizeSettings settings;
    settings.max_iterations = 200;
    settings.target_fidelity = 1.0 - 1e-6;
    const OptimizeResult res =
        optimize(initial, csys, target, RobustnessEnsemble::single(), settings);
    CHECK(res.best_fidelity >= 1.0 - 1e-6);
    CHECK(res.iterations <= 200);
}

TEST_CASE("the reported fidelity trace never decreases") {
    const ControlSystem csys = ControlSystem::from_spin_system(malonic());
    const Matrix target = CodeCircuit::standard().u_encode.m;
    std::mt19937 rng(19);
    const ControlPulse initial = random_pulse(30, 0.01, 1.0, rng);

    OptimizeSettings settings;
    settings.max_iterations = 25;
    const OptimizeResult res =
        optimize(initial, csys, target, RobustnessEnsemble::single(), settings);
    REQUIRE(res.fidelity_trace.size() >= 2);
    for (std::size_t i = 1; i < res.fidelity_trace.size(); ++i)
        CHECK(res.fidelity_trace[i] >= res.fidelity_trace[i - 1]);
    CHECK(res.best_fidelity > res.fidelity_trace.front());
}

TEST_CASE("upsampling preserves the waveform and propagator") {
    std::mt19937 rng(29);
    const ControlPulse p = random_pulse(12, 0.01, 5.0, rng);
    const ControlPulse p4 = upsample(p, 4);
    REQUIRE(p4.n_slices() == 48);
    CHECK(p4.duration_ms() == doctest::Approx(p.duration_ms()).epsilon(1e-15));

    const ControlSystem csys = ControlSystem::from_spin_system(malonic());
    const EnsembleMember m{0.12, 1.03, 1.0};
    CHECK(max_abs_diff(propagate(p, csys, m), propagate(p4, csys, m)) < 1e-12);
}

TEST_CASE("pulse files round-trip") {
    std::mt19937 rng(23);
    const ControlPulse p = random_pulse(17, 0.003, 6.0, rng);
    const std::string path =
        (std::filesystem::temp_directory_path() / "nmrqec_pulse_test.txt").string();
    save_pulse(p, path);
    const ControlPulse q = load_pulse(path);
    REQUIRE(q.n_slices() == p.n_slices());
    CHECK(q.dt_ms == doctest::Approx(p.dt_ms).epsilon(1e-15));
    for (std::size_t k = 0; k < p.n_slices(); ++k) {
        CHECK(q.amplitudes_khz[k][0] == p.amplitudes_khz[k][0]);
        CHECK(q.amplitudes_khz[k][1] == p.amplitudes_khz[k][1]);
    }
    std::remove(path.c_str());
}

TEST_CASE("robustness ensemble validation") {
    RobustnessEnsemble bad;
    bad.members = {{0.0, 1.0, 0.6}, {0.1, 1.0, 0.6}};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad.members = {{0.0, -1.0, 1.0}};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    const RobustnessEnsemble grid = RobustnessEnsemble::grid(
        DispersionModel::gaussian(0.1, 5), {0.95, 1.0, 1.05});
    CHECK(grid.members.size() == 15);
    grid.validate();
}

}  // TEST_SUITE
