#include "softabs/kernels.hpp"

#include <stdexcept>

#include <omp.h>

namespace softabs::kernels {

namespace {

void check_shapes(const Matrix& K, const HessianPartials& slices) {
  for (const auto& s : slices)
    if (s.rows() != K.rows() || s.cols() != K.cols())
      throw std::invalid_argument("trace_contract: slice shape mismatch");
}

double frobenius_dot(const Matrix& a, const Matrix& b) {
  const double* pa = a.data();
  const double* pb = b.data();
  const Eigen::Index n = a.size();
  double acc = 0.0;
  for (Eigen::Index k = 0; k < n; ++k)
    acc += pa[k] * pb[k];
  return acc;
}

double mean_of(std::span<const double> x) {
  double m = 0.0;
  for (double v : x)
    m += v;
  return m / static_cast<double>(x.size());
}

void check_lags(std::span<const double> series, int max_lag) {
  if (series.empty())
    throw std::invalid_argument("autocovariance of an empty series");
  if (max_lag < 0 || static_cast<std::size_t>(max_lag) >= series.size())
    throw std::invalid_argument("autocovariance: max_lag out of range");
}

} // namespace

void trace_contract_serial(const Matrix& K, const HessianPartials& slices, Vector& out) {
  check_shapes(K, slices);
  out.resize(static_cast<Eigen::Index>(slices.size()));
  for (std::size_t n = 0; n < slices.size(); ++n)
    out(static_cast<Eigen::Index>(n)) = frobenius_dot(K, slices[n]);
}

void trace_contract_parallel(const Matrix& K, const HessianPartials& slices, Vector& out) {
  check_shapes(K, slices);
  const auto count = static_cast<long>(slices.size());
  out.resize(count);
  double* dst = out.data();
#pragma omp parallel for schedule(static)
  for (long n = 0; n < count; ++n)
    dst[n] = frobenius_dot(K, slices[static_cast<std::size_t>(n)]);
}

void trace_contract(const Matrix& K, const HessianPartials& slices, Vector& out) {
  if (K.rows() >= kParallelMinDim && omp_get_max_threads() > 1)
    trace_contract_parallel(K, slices, out);
  else
    trace_contract_serial(K, slices, out);
}

Vector autocovariance_serial(std::span<const double> series, int max_lag) {
  check_lags(series, max_lag);
  const double m = mean_of(series);
  const std::size_t len = series.size();
  Vector c(max_lag + 1);
  for (int k = 0; k <= max_lag; ++k) {
    double acc = 0.0;
    for (std::size_t t = 0; t + static_cast<std::size_t>(k) < len; ++t)
      acc += (series[t] - m) * (series[t + static_cast<std::size_t>(k)] - m);
    c(k) = acc / static_cast<double>(len);
  }
  return c;
}

Vector autocovariance_parallel(std::span<const double> series, int max_lag) {
  check_lags(series, max_lag);
  const double m = mean_of(series);
  const std::size_t len = series.size();
  Vector c(max_lag + 1);
  double* dst = c.data();
#pragma omp parallel for schedule(dynamic, 16)
  for (int k = 0; k <= max_lag; ++k) {
    double acc = 0.0;
    for (std::size_t t = 0; t + static_cast<std::size_t>(k) < len; ++t)
      acc += (series[t] - m) * (series[t + static_cast<std::size_t>(k)] - m);
    dst[k] = acc / static_cast<double>(len);
  }
  return c;
}

Vector autocovariance(std::span<const double> series, int max_lag) {
  if (max_lag >= kParallelMinLags && omp_get_max_threads() > 1)
    return autocovariance_parallel(series, max_lag);
  return autocovariance_serial(series, max_lag);
}

} // namespace softabs::kernels
