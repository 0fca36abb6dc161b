#include <benchmark/benchmark.h>

#include "mwh/cascade.hpp"
#include "mwh/filter_io.hpp"
#include "mwh/kernels.hpp"
#include "mwh/transfer.hpp"

namespace {

using mwh::Exec;

Exec exec_of(const benchmark::State& st) { return st.range(0) == 0 ? Exec::serial : Exec::parallel; }

void BM_QmfSweep(benchmark::State& st) {
  const auto lf = mwh::load_builtin("haar2-shift");
  const auto pts = mwh::unit_grid(1, 1 << 14);
  for (auto _ : st) benchmark::DoNotOptimize(mwh::qmf_sweep(lf.m, lf.sys, pts, exec_of(st)));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(pts.size()));
}

void BM_EvaluateGrid(benchmark::State& st) {
  const auto lf = mwh::load_builtin("d4");
  const auto pts = mwh::unit_grid(1, 1 << 15);
  for (auto _ : st) benchmark::DoNotOptimize(mwh::evaluate_grid(lf.m, pts, exec_of(st)));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(pts.size()));
}

void BM_Correlation(benchmark::State& st) {
  const auto lf = mwh::load_builtin("d4");
  const mwh::TransferAnalysis ta(lf.m, lf.sys);
  const auto el = mwh::el_condition(lf.m, lf.sys, 1e-10);
  const mwh::ProductEvaluator P(lf.m, lf.sys, el, mwh::qmf_residual_exact(lf.m, lf.sys));
  mwh::CorrelationOptions opt;
  opt.tol = 1e-5;
  opt.exec = exec_of(st);
  for (auto _ : st) benchmark::DoNotOptimize(mwh::correlation(ta, P, el.E1_basis[0], el.E1_basis[0], opt));
}

}  // namespace

BENCHMARK(BM_QmfSweep)->Arg(0)->Arg(1)->ArgName("parallel");
BENCHMARK(BM_EvaluateGrid)->Arg(0)->Arg(1)->ArgName("parallel");
BENCHMARK(BM_Correlation)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
