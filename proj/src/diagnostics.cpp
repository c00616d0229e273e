#include "softabs/diagnostics.hpp"

#include "softabs/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace softabs {

Vector autocorrelation(std::span<const double> series, int max_lag) {
  if (series.size() < 4)
    throw std::invalid_argument("autocorrelation needs at least 4 points");
  const Vector c = kernels::autocovariance(series, max_lag);
  if (!(c(0) > 0.0))
    throw std::invalid_argument("autocorrelation of a zero-variance series");
  return c / c(0);
}

namespace detail {

ImseSum imse_sum(const Vector& rho) {
  ImseSum out;
  if (rho.size() < 2) {
    out.gamma_sum = rho.size() ? rho(0) : 0.0;
    out.truncation_lag = 0;
    return out;
  }
  double running = rho(0) + rho(1);
  out.gamma_sum = running;
  out.truncation_lag = 1;
  if (running <= 0.0) {
    out.truncated = true;
    return out;
  }
  for (Eigen::Index m = 1; 2 * m + 1 < rho.size(); ++m) {
    const double pair = rho(2 * m) + rho(2 * m + 1);
    if (pair <= 0.0) {
      out.truncated = true;
      return out;
    }
    running = std::min(running, pair);
    out.gamma_sum += running;
    out.truncation_lag = static_cast<int>(2 * m + 1);
  }
  return out;
}

} // namespace detail

int imse_truncate(const Vector& rho) { return detail::imse_sum(rho).truncation_lag; }

EssReport ess(std::span<const double> series) {
  const int len = static_cast<int>(series.size());
  if (len < 4)
    throw std::invalid_argument("ESS needs at least 4 points");
  const int cap = len / 2;
  EssReport report;

  // Grow the lag window until the pair sequence turns non-positive.
  int window = std::min(cap, 64);
  detail::ImseSum sum;
  while (true) {
    report.rho = autocorrelation(series, window);
    sum = detail::imse_sum(report.rho);
    if (sum.truncated || window == cap)
      break;
    window = std::min(cap, window * 4);
  }
  report.truncation_lag = sum.truncation_lag;

  double mean = 0.0;
  for (double v : series)
    mean += v;
  mean /= len;
  double ss = 0.0;
  for (double v : series)
    ss += (v - mean) * (v - mean);
  report.mean = mean;
  report.variance = ss / (len - 1);

  // 1 + 2 sum_{i>=1} rho_i = -1 + 2 sum_m Gamma_m
  const double tau = -1.0 + 2.0 * sum.gamma_sum;
  const double value = tau > 0.0 ? len / tau : static_cast<double>(len);
  report.ess = std::clamp(value, std::numeric_limits<double>::min(), static_cast<double>(len));
  return report;
}

MomentSummary summarize(const Matrix& samples, int column, double ref_mean, double ref_var) {
  if (column < 0 || column >= samples.cols())
    throw std::invalid_argument("summarize: column out of range");
  MomentSummary s;
  const Eigen::Index rows = samples.rows();
  const std::vector<double> series(samples.col(column).data(), samples.col(column).data() + rows);
  if (rows == 0) {
    s.mean = s.variance = s.ess = s.z = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  double mean = 0.0;
  for (double v : series)
    mean += v;
  mean /= static_cast<double>(rows);
  double ss = 0.0;
  for (double v : series)
    ss += (v - mean) * (v - mean);
  s.mean = mean;
  s.variance = rows > 1 ? ss / static_cast<double>(rows - 1) : 0.0;
  if (rows < 4 || !(ss > 0.0)) {
    s.ess = std::numeric_limits<double>::quiet_NaN();
    s.z = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  s.ess = ess(series).ess;
  s.z = (mean - ref_mean) / std::sqrt(ref_var / s.ess);
  return s;
}

} // namespace softabs
