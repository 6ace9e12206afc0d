#include <benchmark/benchmark.h>

#include "copmarkov/coupling.hpp"
#include "copmarkov/simulate.hpp"
#include "copmarkov/special_functions.hpp"

using namespace copmarkov;

namespace {

JointModelParams bench_model(const CopulaSpec& serial, const CopulaSpec& coupling) {
    MarginalParams m{LinkFunction::Probit, {-1.0, -0.3, 0.3, 1.0}, {0.3, -0.2}};
    JointModelParams jm;
    jm.male = {m, serial};
    jm.female = {m, serial};
    jm.coupling = coupling;
    return jm;
}

const OrdinalPanel& bench_panel() {
    static const OrdinalPanel panel = [] {
        SimDesign d;
        d.couples = 1000;
        d.waves = 7;
        d.covariates = CovariateDesign::StandardNormal;
        d.covariate_dim = 2;
        d.seed = 1;
        return simulate_panel(bench_model(CopulaSpec::gumbel(1.5), CopulaSpec::bvn(0.3)), d);
    }();
    return panel;
}

void BM_bvn_cdf(benchmark::State& state) {
    double x = -2.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(bvn_cdf(x, 0.4, 0.6));
        x = x > 2.0 ? -2.0 : x + 0.01;
    }
}
BENCHMARK(BM_bvn_cdf);

void BM_bvt_cdf_integer(benchmark::State& state) {
    const double nu = static_cast<double>(state.range(0));
    double x = -2.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(bvt_cdf(x, 0.4, 0.6, nu));
        x = x > 2.0 ? -2.0 : x + 0.01;
    }
}
BENCHMARK(BM_bvt_cdf_integer)->Arg(1)->Arg(4)->Arg(10);

void BM_bvt_cdf_fractional(benchmark::State& state) {
    double x = -2.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(bvt_cdf(x, 0.4, 0.6, 4.5));
        x = x > 2.0 ? -2.0 : x + 0.01;
    }
}
BENCHMARK(BM_bvt_cdf_fractional);

void BM_copula_cdf(benchmark::State& state) {
    const CopulaSpec specs[] = {CopulaSpec::bvn(0.5), CopulaSpec::frank(5.0), CopulaSpec::gumbel(2.0),
                                CopulaSpec::survival_gumbel(2.0), CopulaSpec::student_t(0.5, 4)};
    const CopulaSpec& spec = specs[state.range(0)];
    double u = 0.01;
    for (auto _ : state) {
        benchmark::DoNotOptimize(copula_cdf(spec, u, 0.37));
        u = u > 0.98 ? 0.01 : u + 0.0137;
    }
    state.SetLabel(copula_label(spec));
}
BENCHMARK(BM_copula_cdf)->DenseRange(0, 4);

void BM_loglik_joint(benchmark::State& state) {
    const CopulaSpec couplings[] = {CopulaSpec::bvn(0.3), CopulaSpec::survival_gumbel(1.4),
                                    CopulaSpec::student_t(0.3, 5)};
    const JointModelParams jm = bench_model(CopulaSpec::gumbel(1.5), couplings[state.range(0)]);
    const OrdinalPanel& panel = bench_panel();
    for (auto _ : state) benchmark::DoNotOptimize(loglik_joint(panel, jm));
    state.SetLabel(copula_label(jm.coupling));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(panel.observation_count()));
}
BENCHMARK(BM_loglik_joint)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
