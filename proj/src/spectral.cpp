#include "softabs/spectral.hpp"

#include "softabs/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace softabs {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw std::invalid_argument("SoftAbs alpha must be positive and finite");
}

void check_finite(double lambda) {
  if (!std::isfinite(lambda))
    throw DivergenceError("non-finite eigenvalue passed to the SoftAbs map");
}

// sinh(d)/d
double sinhc(double d) {
  if (std::abs(d) < 1e-4)
    return 1.0 + d * d / 6.0;
  return std::sinh(d) / d;
}

} // namespace

namespace detail {

double sinh_minus_identity(double y) {
  if (std::abs(y) >= 2.0)
    return std::sinh(y) - y;
  // sum_{k>=1} y^{2k+1} / (2k+1)!
  const double y2 = y * y;
  double term = y * y2 / 6.0;
  double sum = term;
  for (int k = 1; k < 30; ++k) {
    term *= y2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
    sum += term;
    if (std::abs(term) <= 1e-18 * std::abs(sum))
      break;
  }
  return sum;
}

double xcosh_minus_sinh(double x) {
  if (std::abs(x) >= 2.0)
    return x * std::cosh(x) - std::sinh(x);
  // sum_{k>=1} 2k x^{2k+1} / (2k+1)!
  const double x2 = x * x;
  double power = x * x2 / 6.0;
  double sum = 2.0 * power;
  for (int k = 2; k < 30; ++k) {
    power *= x2 / ((2.0 * k) * (2.0 * k + 1.0));
    const double term = 2.0 * k * power;
    sum += term;
    if (std::abs(term) <= 1e-18 * std::abs(sum))
      break;
  }
  return sum;
}

double coth_minus_reciprocal(double x) {
  const double ax = std::abs(x);
  if (ax <= kTaylorThreshold)
    return x / 3.0 - x * x * x / 45.0;
  if (ax > 20.0)
    return std::copysign(1.0, x) - 1.0 / x;
  return xcosh_minus_sinh(x) / (x * std::sinh(x));
}

} // namespace detail

SymEig sym_eigen(const Eigen::MatrixXd& H) {
  if (H.rows() != H.cols())
    throw std::invalid_argument("sym_eigen requires a square matrix");
  if (!H.allFinite())
    throw DivergenceError("non-finite Hessian entry");
  const Eigen::MatrixXd symmetric = 0.5 * (H + H.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric);
  if (solver.info() != Eigen::Success)
    throw DivergenceError("symmetric eigensolver failed to converge");
  return SymEig{solver.eigenvalues(), solver.eigenvectors()};
}

double softabs_scalar(double lambda, double alpha) {
  check_alpha(alpha);
  check_finite(lambda);
  const double x = alpha * lambda;
  const double ax = std::abs(x);
  if (ax <= kTaylorThreshold) {
    // x coth x = 1 + x^2/3 - x^4/45 + 2 x^6/945 - ...
    const double x2 = x * x;
    return (1.0 + x2 * (1.0 / 3.0 + x2 * (-1.0 / 45.0 + x2 * (2.0 / 945.0)))) / alpha;
  }
  if (ax >= kSaturationThreshold)
    return std::abs(lambda);
  return lambda / std::tanh(x);
}

double softabs_scalar_deriv(double lambda, double alpha) {
  check_alpha(alpha);
  check_finite(lambda);
  const double x = alpha * lambda;
  const double ax = std::abs(x);
  if (ax <= kTaylorThreshold) {
    const double x2 = x * x;
    return x * (2.0 / 3.0 + x2 * (-4.0 / 45.0 + x2 * (12.0 / 945.0)));
  }
  if (ax >= kSaturationThreshold)
    return std::copysign(1.0, lambda);
  const double s = std::sinh(x);
  return detail::sinh_minus_identity(2.0 * x) / (2.0 * s * s);
}

double softabs_divided_difference(double a, double b, double alpha) {
  check_alpha(alpha);
  check_finite(a);
  check_finite(b);
  const double gap = std::abs(a - b);
  if (gap <= kTieTolerance * (1.0 + std::abs(a) + std::abs(b)))
    return softabs_scalar_deriv(0.5 * (a + b), alpha);

  const double A = alpha * a;
  const double B = alpha * b;
  const double big = std::max(std::abs(A), std::abs(B));
  if (big <= kTaylorThreshold) {
    // Divided difference of the truncated series for x coth x in x-space.
    const double s2 = A * A + B * B;
    const double quartic = A * A * A * A + A * A * A * B + A * A * B * B + A * B * B * B + B * B * B * B;
    return (A + B) / 3.0 - (A + B) * s2 / 45.0 + 2.0 * quartic / 945.0;
  }
  if (std::abs(A - B) <= 0.5 * big && big < 40.0) {
    // Close, same-sign pair: use
    //   g(A) - g(B) = (A - B) coth A - B sinh(A - B) / (sinh A sinh B),  g(x) = x coth x
    // averaged with its A <-> B mirror, which avoids dividing a difference
    // of nearly equal values by a small gap.
    const double sa = std::sinh(A);
    const double sb = std::sinh(B);
    return 0.5 * (1.0 / std::tanh(A) + 1.0 / std::tanh(B)) -
           0.5 * (A + B) * sinhc(A - B) / (sa * sb);
  }
  return (softabs_scalar(a, alpha) - softabs_scalar(b, alpha)) / (a - b);
}

SoftAbsPieces build_pieces(const Eigen::MatrixXd& H, double alpha) {
  check_alpha(alpha);
  SoftAbsPieces pieces;
  pieces.alpha = alpha;
  pieces.eig = sym_eigen(H);
  const Eigen::VectorXd& lambda = pieces.eig.eigenvalues;
  const Eigen::Index n = lambda.size();
  pieces.lambda_soft.resize(n);
  pieces.jmat.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    pieces.lambda_soft(i) = softabs_scalar(lambda(i), alpha);
    pieces.jmat(i, i) = softabs_scalar_deriv(lambda(i), alpha);
    for (Eigen::Index j = 0; j < i; ++j) {
      const double dd = softabs_divided_difference(lambda(i), lambda(j), alpha);
      pieces.jmat(i, j) = dd;
      pieces.jmat(j, i) = dd;
    }
  }
  return pieces;
}

Eigen::MatrixXd SoftAbsPieces::metric() const {
  const Eigen::MatrixXd& Q = eig.eigenvectors;
  return Q * lambda_soft.asDiagonal() * Q.transpose();
}

} // namespace softabs
