// Serial reference kernels vs their OpenMP counterparts, plus the NTDF evaluator.
#include <benchmark/benchmark.h>

#include <cmath>

#include "qscat/ntdf.hpp"
#include "qscat/stepper.hpp"

using namespace qscat;

namespace {
CField filled(std::size_t n) {
  CField f({n, n, n});
  for (std::size_t e = 0; e < f.size(); ++e) f[e] = std::polar(1.0, 0.37 * double(e % 1013));
  return f;
}
const Vec3 H{pi / 10, pi / 10, pi / 10};

void BM_pstd_openmp(benchmark::State& st) {
  auto f = filled(std::size_t(st.range(0)));
  CField out(f.shape());
  SpectralLaplacian L(f.shape(), H);
  for (auto _ : st) {
    L.apply(f, out);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * long(f.size()));
}
void BM_pstd_serial(benchmark::State& st) {
  auto f = filled(std::size_t(st.range(0)));
  CField out(f.shape());
  SpectralLaplacian L(f.shape(), H);
  for (auto _ : st) {
    L.apply_serial(f, out);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * long(f.size()));
}
void BM_fdtd_openmp(benchmark::State& st) {
  auto f = filled(std::size_t(st.range(0)));
  CField out(f.shape());
  for (auto _ : st) {
    laplacian_fdtd(f, out, H);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * long(f.size()));
}
void BM_fdtd_serial(benchmark::State& st) {
  auto f = filled(std::size_t(st.range(0)));
  CField out(f.shape());
  for (auto _ : st) {
    laplacian_fdtd_serial(f, out, H);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * long(f.size()));
}

// far-field point from a 20x16x20-cell box: moment fast path vs literal cell sum
void BM_ntdf_fast(benchmark::State& st) {
  auto s = spherical_wave_surface({pi, 0.8 * pi, pi}, pi / 10, 1.0);
  for (auto _ : st) benchmark::DoNotOptimize(evaluate_distant(s, Vec3{300, 2e3, -50}));
}
void BM_ntdf_direct(benchmark::State& st) {
  auto s = spherical_wave_surface({pi, 0.8 * pi, pi}, pi / 10, 1.0);
  for (auto _ : st) benchmark::DoNotOptimize(evaluate_distant_direct(s, Vec3{300, 2e3, -50}));
}
}  // namespace

BENCHMARK(BM_pstd_openmp)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_pstd_serial)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_fdtd_openmp)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_fdtd_serial)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ntdf_fast)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ntdf_direct)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
