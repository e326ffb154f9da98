#include "nmrqec/experiment.hpp"
#include "nmrqec/grape.hpp"
#include "nmrqec/protocol.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace nmrqec;

namespace {

Matrix random_hermitian(Eigen::Index dim, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix a(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) a(i, j) = Complex(u(rng), u(rng));
    return Matrix(0.5 * (a + a.adjoint()));
}

void BM_ExpmHermitian(benchmark::State& state) {
    const Matrix h = random_hermitian(state.range(0), 42);
    for (auto _ : state) {
        benchmark::DoNotOptimize(expm_hermitian(h, 0.8));
    }
}
BENCHMARK(BM_ExpmHermitian)->Arg(8)->Arg(16)->Arg(32);

void BM_BuildHamiltonian(benchmark::State& state) {
    SpinSystem sys = malonic();
    if (state.range(0)) sys.bath.push_back({2, 0.4});
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_hamiltonian(sys, 0.1));
    }
}
BENCHMARK(BM_BuildHamiltonian)->Arg(0)->Arg(1);

void BM_NaturalEvolutionApply(benchmark::State& state) {
    SpinSystem sys = malonic();
    sys.bath.push_back({2, 0.4});
    const NoiseChannel ch = natural_evolution(sys, 1.0);
    const Matrix rho = random_hermitian(8, 7);
    for (auto _ : state) {
        benchmark::DoNotOptimize(ch.apply(rho));
    }
}
BENCHMARK(BM_NaturalEvolutionApply);

void BM_DispersionChannelBuild(benchmark::State& state) {
    SpinSystem sys = malonic();
    sys.bath.push_back({2, 0.4});
    const DispersionModel model =
        DispersionModel::lorentzian(lorentzian_width_for_t2star(2.0), state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(dispersion_average(natural_evolution(sys, 1.0), model));
    }
}
BENCHMARK(BM_DispersionChannelBuild)->Arg(15)->Arg(101);

void BM_OneRoundCorrected(benchmark::State& state) {
    const NoiseChannel ch = compose({dephasing_probability(0.1, 0),
                                     dephasing_probability(0.1, 1),
                                     dephasing_probability(0.1, 2)});
    RoundConfig cfg;
    cfg.mode = Mode::corrected;
    cfg.channel = &ch;
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_one_round(cfg));
    }
}
BENCHMARK(BM_OneRoundCorrected);

void BM_TwoRoundsCycling(benchmark::State& state) {
    const NoiseChannel half = dephasing_probability(0.1, 2);
    TwoRoundConfig cfg;
    cfg.half_channel = &half;
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_two_rounds(cfg));
    }
}
BENCHMARK(BM_TwoRoundsCycling);

void BM_PhaseCycleFilter(benchmark::State& state) {
    const DeviationState rho = thermal_state();
    for (auto _ : state) {
        benchmark::DoNotOptimize(phase_cycle_filter(rho, 3, 8));
    }
}
BENCHMARK(BM_PhaseCycleFilter);

void BM_GrapeGradient(benchmark::State& state) {
    const ControlSystem csys = ControlSystem::from_spin_system(malonic());
    const Matrix target = CodeCircuit::standard().u_encode.m;
    GrapeSpec spec;
    spec.n_slices = static_cast<std::size_t>(state.range(0));
    spec.dt_ms = 0.001;
    const ControlPulse pulse = grape_initial_pulse(spec);
    const RobustnessEnsemble ens = RobustnessEnsemble::single();
    for (auto _ : state) {
        benchmark::DoNotOptimize(gradient(pulse, csys, target, ens));
    }
}
BENCHMARK(BM_GrapeGradient)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
