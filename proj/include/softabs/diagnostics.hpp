#pragma once

#include "softabs/types.hpp"

#include <span>

namespace softabs {

struct EssReport {
  double ess = 0.0;
  int truncation_lag = 0; ///< last autocorrelation lag included in the sum
  Vector rho;             ///< autocorrelations at lags 0..K as computed
  double mean = 0.0;
  double variance = 0.0;  ///< unbiased
};

/// Biased autocovariance at lags 0..max_lag normalized by lag 0.
/// Throws std::invalid_argument for fewer than 4 points or zero variance.
Vector autocorrelation(std::span<const double> series, int max_lag);

/// Initial monotone sequence truncation. Pairs Gamma_m = rho_{2m} + rho_{2m+1}
/// are accumulated until the first non-positive pair; Gamma_0 is always kept.
/// Returns the last included lag, 2m + 1 (at least 1).
int imse_truncate(const Vector& rho);

/// ESS = I / (1 + 2 sum rho_i) with the sum cut by imse_truncate and the
/// pair sequence made monotone; clamped to (0, I]. Lags are capped at I / 2.
EssReport ess(std::span<const double> series);

struct MomentSummary {
  double mean = 0.0;
  double variance = 0.0; ///< unbiased
  double ess = 0.0;      ///< NaN for a constant column
  double z = 0.0;        ///< (mean - ref_mean) / sqrt(ref_var / ess); NaN when ess is undefined
};

/// Moments of one column of a sample matrix against a reference normal N(ref_mean, ref_var).
MomentSummary summarize(const Matrix& samples, int column, double ref_mean, double ref_var);

namespace detail {
struct ImseSum {
  int truncation_lag = 1;
  double gamma_sum = 0.0; ///< sum of the monotone pair sequence
  bool truncated = false; ///< false when the sum ran into the end of rho
};
ImseSum imse_sum(const Vector& rho);
} // namespace detail

} // namespace softabs
