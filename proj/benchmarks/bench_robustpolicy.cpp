#include <benchmark/benchmark.h>

#include <memory>

#include "robustpolicy/bounds.hpp"
#include "robustpolicy/dgp.hpp"
#include "robustpolicy/learn.hpp"
#include "robustpolicy/net.hpp"
#include "robustpolicy/nuisance.hpp"
#include "robustpolicy/oracle.hpp"
#include "robustpolicy/rng.hpp"

namespace {

using namespace robustpolicy;

Dataset make_data(int n) {
    SyntheticSpec spec;
    spec.gamma_star = 5.0;
    spec.n = n;
    spec.seed = 11;
    return generate(spec).data;
}

void BM_LpSharpCapo(benchmark::State& state) {
    const int atoms = static_cast<int>(state.range(0));
    const OutcomeLaw law = discretize_uniform01(atoms);
    const SensitivitySpec spec(4.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(lp_sharp_capo(law, 0.35, spec, Side::upper).value);
    }
}
BENCHMARK(BM_LpSharpCapo)->Arg(100)->Arg(1000)->Arg(10000);

void BM_ValueBound(benchmark::State& state) {
    const Dataset fold = make_data(static_cast<int>(state.range(0)));
    const SensitivitySpec spec(5.0);
    SyntheticOracleNuisance nuis(5.0, spec);
    const Eigen::MatrixXd pi = Eigen::MatrixXd::Constant(fold.n(), 2, 0.5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            value_bound(nuis, pi, fold, spec, Side::upper, Estimator::efficient).estimate);
    }
}
BENCHMARK(BM_ValueBound)->Arg(1000)->Arg(8000);

void BM_PolicyGradientStep(benchmark::State& state) {
    const Dataset fold = make_data(static_cast<int>(state.range(0)));
    const SensitivitySpec spec(5.0);
    SyntheticOracleNuisance nuis(5.0, spec);
    const TrainingProblem problem =
        prepare_training(fold, nuis, spec, Estimator::efficient, Objective::value, nullptr);
    SoftmaxPolicy policy =
        SoftmaxPolicy::mlp(1, {32}, 2, 3, InitScheme::KinkGrid, -2.0, 2.0);
    for (auto _ : state) {
        const Eigen::VectorXd grad = problem.gradient(policy);
        policy.set_params(policy.params() - 0.05 * grad);
        benchmark::DoNotOptimize(policy.params().sum());
    }
}
BENCHMARK(BM_PolicyGradientStep)->Arg(1000)->Arg(8000);

void BM_NetTrainEpoch(benchmark::State& state) {
    const Dataset fold = make_data(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        state.PauseTiming();
        FeedForwardNet net(1, {16}, 1);
        net.init(InitScheme::FanInUniform, 5);
        RandomStream order(9);
        state.ResumeTiming();
        // One least-squares epoch over shuffled mini-batches of 64.
        const std::vector<std::size_t> perm =
            order.permutation(static_cast<std::size_t>(fold.n()));
        for (std::size_t start = 0; start < perm.size(); start += 64) {
            const std::size_t stop = std::min(perm.size(), start + 64);
            Eigen::MatrixXd xb(stop - start, 1);
            Eigen::MatrixXd yb(stop - start, 1);
            for (std::size_t r = start; r < stop; ++r) {
                xb(r - start, 0) = fold.x(static_cast<int>(perm[r]), 0);
                yb(r - start, 0) = fold.y(static_cast<int>(perm[r]));
            }
            const FeedForwardNet::Cache cache = net.forward_cached(xb);
            const Eigen::MatrixXd d_out =
                2.0 * (cache.acts.back() - yb) / static_cast<double>(cache.acts.back().rows());
            net.step(cache, d_out, 0.01);
        }
        benchmark::DoNotOptimize(net.params().sum());
    }
}
BENCHMARK(BM_NetTrainEpoch)->Arg(4000);

}  // namespace

BENCHMARK_MAIN();
