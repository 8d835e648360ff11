#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "genset/machine.hpp"
#include "genset/signal.hpp"
#include "genset/simengine.hpp"
#include "genset/surropt.hpp"

namespace {

genset::MachineState bench_state() {
    genset::MachineState s;
    s.psi_d = 0.9;
    s.psi_q = -0.4;
    s.psi_fd = 1.1;
    s.psi_kd = 0.85;
    s.psi_kq1 = -0.35;
    s.psi_kq2 = -0.3;
    s.omega = 1.01;
    s.delta = 0.3;
    return s;
}

void BM_machine_derivatives(benchmark::State& state) {
    genset::Machine m{genset::MachineParams{}};
    const auto s = bench_state();
    for (auto _ : state) {
        auto dx = m.derivatives(s, 0.2, 0.95, 8e-4, 0.6);
        benchmark::DoNotOptimize(dx);
    }
}
BENCHMARK(BM_machine_derivatives);

void BM_machine_jacobian(benchmark::State& state) {
    genset::Machine m{genset::MachineParams{}};
    const auto s = bench_state();
    for (auto _ : state) {
        auto j = m.jacobian(s, 0.2, 0.95, 8e-4, 0.6);
        benchmark::DoNotOptimize(j);
    }
}
BENCHMARK(BM_machine_jacobian);

void BM_coupled_rhs(benchmark::State& state) {
    genset::SystemParams sys;
    genset::SimEngine eng(sys);
    eng.initialize(80.0, 0.0);
    const auto x = eng.state();
    const auto load = genset::load_to_admittance(80.0, 0.0, 1.0, sys.base);
    for (auto _ : state) {
        auto dx = eng.derivatives_at(x, 0.0, load);
        benchmark::DoNotOptimize(dx);
    }
}
BENCHMARK(BM_coupled_rhs);

// Full closed-loop scenario: equilibrium solve plus 1000 fixed steps.
void BM_simulate_100ms(benchmark::State& state) {
    genset::SystemParams sys;
    genset::Scenario sc;
    sc.t_step = 0.05;
    sc.t_end = 0.1;
    sc.dt = 1e-4;
    genset::SimEngine eng(sys);
    for (auto _ : state) {
        auto trace = eng.run(sc, 1000000);
        benchmark::DoNotOptimize(trace);
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * 1000);
}
BENCHMARK(BM_simulate_100ms)->Unit(benchmark::kMillisecond);

void BM_fit_surrogate(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const std::size_t d = 5;
    std::mt19937_64 rng(7);
    std::vector<genset::SamplePoint> pts(n);
    for (auto& p : pts) {
        p.x.resize(d);
        double g = 0.0;
        for (auto& v : p.x) {
            v = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            g += v * v + 0.5 * v;
        }
        p.g = std::sin(3.0 * p.x[0]) + g;
    }
    for (auto _ : state) {
        auto model = genset::fit_surrogate(pts);
        benchmark::DoNotOptimize(model);
    }
}
BENCHMARK(BM_fit_surrogate)->Arg(30)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);

// Measurement chain on half a second of synthesized waveforms.
void BM_derive_channels(benchmark::State& state) {
    genset::SystemParams sys;
    genset::Scenario sc;
    sc.t_step = 0.25;
    sc.t_end = 0.5;
    genset::SimEngine eng(sys);
    const auto waves = genset::synthesize_waveforms(eng.run(sc, 1));
    for (auto _ : state) {
        auto derived = genset::derive_channels(waves);
        benchmark::DoNotOptimize(derived);
    }
}
BENCHMARK(BM_derive_channels)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
