#include <benchmark/benchmark.h>

#include "flowsampler/gaussian_flows.hpp"
#include "flowsampler/particle_flows.hpp"
#include "flowsampler/quadrature.hpp"
#include "flowsampler/targets.hpp"

using namespace flowsampler;

namespace {

GaussianMoments bench_moments() {
    GaussianMoments g;
    g.mean = Eigen::Vector2d(3.0, -1.0);
    g.cov = (Eigen::Matrix2d() << 2.0, 0.4, 0.4, 1.0).finished();
    return g;
}

void BM_UnscentedRule(benchmark::State& state) {
    const GaussianMoments g = bench_moments();
    for (auto _ : state) {
        benchmark::DoNotOptimize(unscented_rule(g, default_unscented_kappa(2)));
    }
}
BENCHMARK(BM_UnscentedRule);

void BM_MomentFlowRhs(benchmark::State& state) {
    const TargetModel target = TargetModel::logconcave(0.1);
    const GaussianMoments g = bench_moments();
    const QuadratureRule rule = unscented_rule(g, default_unscented_kappa(2));
    const MomentFlow flow = MomentFlow::fisher_rao();
    for (auto _ : state) {
        benchmark::DoNotOptimize(moment_flow_rhs(flow, g, target, rule, HessianMode::analytic));
    }
}
BENCHMARK(BM_MomentFlowRhs);

void BM_MomentFlowIntegrate(benchmark::State& state) {
    const TargetModel target = TargetModel::gaussian_benchmark(0.1);
    GaussianMoments g0;
    g0.mean = Eigen::Vector2d(10.0, 10.0);
    g0.cov = Eigen::Matrix2d::Identity();
    for (auto _ : state) {
        benchmark::DoNotOptimize(integrate_moment_flow(MomentFlow::fisher_rao(), g0, target,
                                                       1e-2, 1.0, NAN, HessianMode::analytic));
    }
}
BENCHMARK(BM_MomentFlowIntegrate);

void BM_MedianBandwidth(benchmark::State& state) {
    const auto j = static_cast<int>(state.range(0));
    GaussianMoments g;
    g.mean = Eigen::Vector2d::Zero();
    g.cov = Eigen::Matrix2d::Identity();
    const Ensemble e = sample_gaussian_ensemble(g, j, 42);
    for (auto _ : state) {
        benchmark::DoNotOptimize(median_bandwidth(e));
    }
}
BENCHMARK(BM_MedianBandwidth)->Arg(256)->Arg(512);

void BM_SvgdStep(benchmark::State& state) {
    const auto j = static_cast<int>(state.range(0));
    const TargetModel target = TargetModel::gaussian_benchmark(0.1);
    GaussianMoments g;
    g.mean = Eigen::Vector2d(10.0, 10.0);
    g.cov = Eigen::Matrix2d::Identity();
    const Ensemble e = sample_gaussian_ensemble(g, j, 42);
    SdeConfig cfg;
    cfg.flow = ParticleFlowKind::ai_svgd;
    const KernelSpec kernel = default_kernel(cfg.flow);
    for (auto _ : state) {
        RngState rng{42, 1};
        benchmark::DoNotOptimize(flow_step(e, target, cfg, kernel, rng));
    }
}
BENCHMARK(BM_SvgdStep)->Arg(256)->Arg(1000);

} // namespace

BENCHMARK_MAIN();
