#pragma once

#include "softabs/rng.hpp"
#include "softabs/spectral.hpp"
#include "softabs/targets.hpp"
#include "softabs/types.hpp"

#include <string_view>
#include <variant>

namespace softabs {

enum class MetricFamily { Euclidean, SoftAbs, DiagSoftAbs, OuterSoftAbs, DiagOuterSoftAbs };

/// CLI spelling: euclidean, softabs, diag-softabs, outer-softabs, diag-outer-softabs.
std::string_view to_string(MetricFamily family);
/// Throws ConfigError on an unknown name.
MetricFamily parse_metric_family(std::string_view name);

struct MetricConfig {
  MetricFamily family = MetricFamily::SoftAbs;
  double alpha = 1e6;
  /// Diagonal of the Euclidean mass matrix; empty means identity.
  Vector mass_diag;

  /// Throws ConfigError when alpha or the masses are invalid for dimension dim.
  void validate(int dim) const;
};

/// The outer-product approximation H ≈ g g^T pushed through the SoftAbs map:
///   Sigma = (s / sinh(x)) (I + (cosh(x) - 1) / s * g g^T),  s = g.g,  x = alpha s.
/// Sigma has eigenvalue b = s coth(x) along g and a = s / sinh(x) on the
/// orthogonal complement.
struct OuterSoftAbsFactors {
  double alpha = 1.0;
  Vector g;
  double s = 0.0; ///< g.g
  double x = 0.0; ///< alpha * s
  double a = 0.0; ///< complement eigenvalue s / sinh(x)
  double b = 0.0; ///< eigenvalue along g, s coth(x)

  Matrix metric() const;
};

/// Throws DivergenceError when alpha * g.g exceeds 700 (sinh/cosh overflow).
OuterSoftAbsFactors outer_softabs_metric(const Vector& g, double alpha);
/// Element-wise SoftAbs map of a Hessian diagonal.
Vector diag_softabs_transform(const Vector& h_diag, double alpha);
/// Element-wise SoftAbs map of the squared gradient, g_i^2 coth(alpha g_i^2).
Vector diag_outer_softabs(const Vector& g, double alpha);

namespace detail {

struct EuclideanCache {
  Vector inv_mass;
  Vector sqrt_mass;
};

struct SoftAbsCache {
  SoftAbsPieces pieces;
  HessianPartials partials;
};

struct DiagSoftAbsCache {
  Vector lambda_soft;
  Vector slope;          ///< SoftAbs derivative at each H_ii
  Matrix diag_partials;  ///< (n, i) -> dH_ii / dq_n
};

struct OuterSoftAbsCache {
  OuterSoftAbsFactors factors;
  Matrix hessian;
};

struct DiagOuterSoftAbsCache {
  Vector lambda_soft;
  Vector slope; ///< SoftAbs derivative at each g_i^2
  Matrix hessian;
};

} // namespace detail

/// Metric Sigma(q) and its derivatives at one position. Immutable once built;
/// rebuild through refresh() whenever q changes.
///
/// The Hamiltonian splits as H = tau + phi with
///   tau = p^T Sigma^{-1} p / 2,   phi = log|Sigma| / 2 + V.
/// For the Euclidean family the constant log|M| / 2 is dropped from phi.
class MetricState {
public:
  MetricFamily family() const { return family_; }
  int dim() const { return static_cast<int>(q_.size()); }
  const Vector& position() const { return q_; }
  double potential() const { return potential_; }
  const Vector& potential_gradient() const { return grad_; }

  double tau(const Vector& p) const;
  double phi() const;
  double hamiltonian(const Vector& p) const { return tau(p) + phi(); }
  Vector dtau_dp(const Vector& p) const;
  Vector dtau_dq(const Vector& p) const;
  Vector dphi_dq() const;
  /// p = A z with z standard normal and A A^T = Sigma(q).
  Vector sample_momentum(Rng& rng) const;

  /// Dense Sigma(q); test and diagnostic use only.
  Matrix metric_matrix() const;
  /// Eigenvalues of Sigma(q) as cached by the family (unordered).
  Vector metric_eigenvalues() const;

  /// Non-null only for the SoftAbs family.
  const SoftAbsPieces* softabs_pieces() const;
  const HessianPartials* hessian_partials() const;

private:
  friend MetricState refresh(const MetricConfig&, const TargetModel&, const Vector&);

  using Cache = std::variant<detail::EuclideanCache, detail::SoftAbsCache, detail::DiagSoftAbsCache,
                             detail::OuterSoftAbsCache, detail::DiagOuterSoftAbsCache>;

  MetricFamily family_ = MetricFamily::Euclidean;
  Vector q_;
  double potential_ = 0.0;
  Vector grad_;
  double half_log_det_ = 0.0;
  Cache cache_;
};

/// Evaluates the target and builds the family's cache at q. For SoftAbs this
/// is one eigendecomposition plus one call to hessian_partials. Target and
/// eigensolver failures propagate as DivergenceError.
MetricState refresh(const MetricConfig& config, const TargetModel& model, const Vector& q);

} // namespace softabs
