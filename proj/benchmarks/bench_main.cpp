#include <benchmark/benchmark.h>

#include "sve/cnr.hpp"
#include "sve/rng.hpp"
#include "sve/see_sim.hpp"
#include "sve/volterra_sim.hpp"

using namespace sve;

namespace {

void BM_RmQuadrature(benchmark::State& state) {
    kernel k = kernel::fractional(0.75);
    const double m = static_cast<double>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(k.R_m(m));
        benchmark::DoNotOptimize(k.eps_m(m));
    }
}
BENCHMARK(BM_RmQuadrature)->Arg(1)->Arg(100)->Arg(10000);

void BM_LiftStep(benchmark::State& state) {
    kernel k = kernel::fractional(0.75);
    lift_grid g = lift_grid::from_kernel(k, static_cast<int>(state.range(0)), 1e-4, 1e4);
    step_factors f = step_factors::make(g, 1.0 / 256.0);
    lift_state y = lift_state::zero(g.size(), 1);
    matrix sigma(1, 1);
    sigma(0, 0) = 1.0;
    const std::vector<double> b{0.3};
    const std::vector<double> dw{0.01};
    for (auto _ : state) {
        ou_step(f, y, b, sigma, dw);
        benchmark::DoNotOptimize(y.v.data());
    }
    state.SetItemsProcessed(state.iterations() * g.size());
}
BENCHMARK(BM_LiftStep)->Arg(50)->Arg(100)->Arg(400);

void BM_LiftEnsemble(benchmark::State& state) {
    kernel k = kernel::fractional(0.75);
    lift_grid g = lift_grid::from_kernel(k, 100, 1e-4, 1e4);
    coefficient_pair p = make_pair_from_registry("power_drift", {{"beta", 0.5}}, "constant_sigma",
                                                 {{"s", 1.0}});
    sim_config cfg;
    cfg.T = 1.0;
    cfg.h = 1.0 / 256.0;
    cfg.n_paths = static_cast<int>(state.range(0));
    cfg.seed = 7;
    for (auto _ : state) {
        benchmark::DoNotOptimize(simulate(g, p, lift_state::zero(g.size(), 1), cfg));
    }
    state.SetItemsProcessed(state.iterations() * cfg.n_paths * 256);
}
BENCHMARK(BM_LiftEnsemble)->Arg(16)->Arg(64);

void BM_DirectConvolution(benchmark::State& state) {
    kernel k = kernel::fractional(0.75);
    coefficient_pair p = make_pair_from_registry("power_drift", {{"beta", 0.5}}, "constant_sigma",
                                                 {{"s", 1.0}});
    const int steps = static_cast<int>(state.range(0));
    direct_config cfg;
    cfg.T = 1.0;
    cfg.h = 1.0 / steps;
    cfg.n_paths = 4;
    cfg.seed = 7;
    kernel_weights kw = kernel_weights::from_kernel(k, cfg.h, steps, drift_weight_rule::point);
    const auto forcing = zero_forcing(steps, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(simulate_direct(kw, p, forcing, cfg));
    }
    state.SetItemsProcessed(state.iterations() * 4 * steps * steps / 2);
}
BENCHMARK(BM_DirectConvolution)->Arg(256)->Arg(1024);

void BM_CoupledStep(benchmark::State& state) {
    kernel k = kernel::exponential_sum({{0.6, 0.0}, {0.4, 2.0}});
    lift_grid g = lift_grid::from_kernel(k, 2, 0.0, 3.0);
    coefficient_pair target =
        make_pair_from_registry("sin_drift", {{"a", 1.0}}, "constant_sigma", {{"s", 1.0}});
    coefficient_pair reference = mollify(target, 2e-4).pair;
    coupling_params params;
    params.delta0 = 2e-4;
    params.delta1 = 1e-5;
    params.delta2 = 0.05;
    params.delta3 = 0.1296;
    params.lambda = 2.0;
    params.J = 1.0;
    params.m = truncation::at(1.0);
    params.M = truncation::infinite();
    params.M_bar = truncation::infinite();
    const int steps = 256;
    normal_stream rng(1);
    std::vector<double> dw(steps);
    for (double& v : dw) {
        v = rng.next() / 16.0;
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(simulate_coupled_path(g, target, reference, params, 1.0 / 256.0,
                                                       steps, lift_state::zero(g.size(), 1), dw));
    }
    state.SetItemsProcessed(state.iterations() * steps);
}
BENCHMARK(BM_CoupledStep);

}  // namespace

BENCHMARK_MAIN();
