// Serial vs OpenMP timings for the data-parallel kernels.
#include "softabs/kernels.hpp"
#include "softabs/rng.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

using namespace softabs;

namespace {

double best_of(int reps, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

Matrix random_symmetric(int n, Rng& rng) {
  Matrix a(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      a(i, j) = rng.normal();
  return 0.5 * (a + a.transpose());
}

} // namespace

int main() {
  Rng rng(7);
  std::printf("threads: %d\n", omp_get_max_threads());
  std::printf("%-14s %8s %12s %12s %8s %10s\n", "kernel", "size", "serial_ms", "omp_ms", "speedup", "max_diff");

  for (int n : {8, 16, 32, 64, 128}) {
    const Matrix K = random_symmetric(n, rng);
    HessianPartials slices;
    for (int k = 0; k < n; ++k)
      slices.push_back(random_symmetric(n, rng));
    Vector a, b;
    const int reps = n <= 32 ? 200 : 20;
    const double ts = best_of(reps, [&] { kernels::trace_contract_serial(K, slices, a); });
    const double tp = best_of(reps, [&] { kernels::trace_contract_parallel(K, slices, b); });
    std::printf("%-14s %8d %12.4f %12.4f %8.2f %10.2e\n", "trace", n, ts * 1e3, tp * 1e3, ts / tp,
                (a - b).cwiseAbs().maxCoeff());
  }

  for (int len : {1000, 10000, 100000}) {
    std::vector<double> x(len);
    for (double& v : x)
      v = rng.normal();
    const int lags = len / 2;
    Vector a, b;
    const int reps = len <= 10000 ? 5 : 1;
    const double ts = best_of(reps, [&] { a = kernels::autocovariance_serial(x, lags); });
    const double tp = best_of(reps, [&] { b = kernels::autocovariance_parallel(x, lags); });
    std::printf("%-14s %8d %12.4f %12.4f %8.2f %10.2e\n", "autocov", len, ts * 1e3, tp * 1e3, ts / tp,
                (a - b).cwiseAbs().maxCoeff());
  }
  return 0;
}
