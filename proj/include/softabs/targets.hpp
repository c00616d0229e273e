#pragma once

#include "softabs/types.hpp"

#include <memory>
#include <string>
#include <string_view>

namespace softabs {

/// A target density pi(q) ∝ exp(-V(q)) with derivatives of V through third order.
///
/// New targets implement potential, gradient and hessian; hessian_partials
/// falls back to central differences of the Hessian when not overridden.
class TargetModel {
public:
  virtual ~TargetModel() = default;

  virtual int dim() const = 0;
  virtual std::string name() const = 0;

  /// V(q) with additive constants dropped.
  virtual double potential(const Vector& q) const = 0;
  virtual Vector gradient(const Vector& q) const = 0;
  virtual Matrix hessian(const Vector& q) const = 0;
  /// Slice n is dH/dq_n.
  virtual HessianPartials hessian_partials(const Vector& q) const;
  /// D(n, i) = dH_ii / dq_n. Only the diagonal third derivatives, for the
  /// diagonal metric family.
  virtual Matrix hessian_diagonal_partials(const Vector& q) const;

protected:
  /// Throws std::invalid_argument on a length mismatch and DivergenceError on non-finite entries.
  void check_point(const Vector& q) const;
};

/// Central differences of model.hessian with step h along each coordinate,
/// symmetrized. Throws std::invalid_argument for h <= 0.
HessianPartials fd_hessian_partials(const TargetModel& model, const Vector& q, double h);

/// Neal's funnel: x_i ~ N(0, e^{-v}) for i = 1..n, v ~ N(0, 9).
/// Coordinates are laid out as q = (x_1, ..., x_n, v).
class FunnelModel final : public TargetModel {
public:
  explicit FunnelModel(int n);

  int dim() const override { return n_ + 1; }
  std::string name() const override { return "funnel"; }
  int n() const { return n_; }
  int v_index() const { return n_; }

  double potential(const Vector& q) const override;
  Vector gradient(const Vector& q) const override;
  Matrix hessian(const Vector& q) const override;
  HessianPartials hessian_partials(const Vector& q) const override;
  Matrix hessian_diagonal_partials(const Vector& q) const override;

private:
  double exp_v(const Vector& q) const;

  int n_;
};

/// Zero-mean multivariate normal with covariance S: V = q^T S^{-1} q / 2.
class GaussianModel final : public TargetModel {
public:
  explicit GaussianModel(const Matrix& covariance);
  static GaussianModel standard(int dim);

  int dim() const override { return static_cast<int>(precision_.rows()); }
  std::string name() const override { return "gaussian"; }
  const Matrix& precision() const { return precision_; }

  double potential(const Vector& q) const override;
  Vector gradient(const Vector& q) const override;
  Matrix hessian(const Vector& q) const override;
  HessianPartials hessian_partials(const Vector& q) const override;
  Matrix hessian_diagonal_partials(const Vector& q) const override;

private:
  Matrix precision_;
};

/// Builds a target by name: "funnel" (n x-coordinates, dim n+1) or
/// "gaussian" (standard normal of dimension n). Throws ConfigError otherwise.
std::unique_ptr<TargetModel> make_target(std::string_view name, int n);

} // namespace softabs
