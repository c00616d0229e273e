#pragma once

#include <Eigen/Dense>

namespace softabs {

/// Regime thresholds on x = alpha * lambda for the scalar SoftAbs map.
inline constexpr double kTaylorThreshold = 1e-4;
inline constexpr double kSaturationThreshold = 18.0;
/// Relative gap below which two eigenvalues are treated as tied.
inline constexpr double kTieTolerance = 1e-10;

/// Eigendecomposition H = Q diag(lambda) Q^T of a symmetric matrix.
/// Eigenvalues are in fixed correspondence with the columns of Q; no
/// ordering is promised.
struct SymEig {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
};

/// Cached spectral data for one SoftAbs metric evaluation.
struct SoftAbsPieces {
  double alpha = 1.0;
  SymEig eig;
  Eigen::VectorXd lambda_soft; ///< lambda_i coth(alpha lambda_i)
  Eigen::MatrixXd jmat;        ///< divided differences of the SoftAbs map

  int dim() const { return static_cast<int>(lambda_soft.size()); }
  /// Q diag(lambda_soft) Q^T.
  Eigen::MatrixXd metric() const;
};

/// Symmetrizes H and decomposes it. Throws DivergenceError on non-finite input.
SymEig sym_eigen(const Eigen::MatrixXd& H);

/// lambda coth(alpha lambda), evaluated without large exponentials.
double softabs_scalar(double lambda, double alpha);

/// d/dlambda of lambda coth(alpha lambda) = coth(x) - x / sinh^2(x), x = alpha lambda.
double softabs_scalar_deriv(double lambda, double alpha);

/// (f(a) - f(b)) / (a - b) for the SoftAbs scalar map f, switching to f'
/// at the midpoint when a and b are tied.
double softabs_divided_difference(double a, double b, double alpha);

SoftAbsPieces build_pieces(const Eigen::MatrixXd& H, double alpha);

namespace detail {
/// sinh(y) - y without cancellation.
double sinh_minus_identity(double y);
/// x cosh(x) - sinh(x) without cancellation.
double xcosh_minus_sinh(double x);
/// coth(x) - 1/x, odd, finite at 0.
double coth_minus_reciprocal(double x);
} // namespace detail

} // namespace softabs
