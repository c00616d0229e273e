#include "softabs/targets.hpp"

#include "softabs/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace softabs {

namespace {

constexpr double kMaxExponent = 700.0;

double checked(double value, const char* what) {
  if (!std::isfinite(value))
    throw DivergenceError(std::string("non-finite ") + what);
  return value;
}

} // namespace

void TargetModel::check_point(const Vector& q) const {
  if (q.size() != dim())
    throw std::invalid_argument("position has length " + std::to_string(q.size()) +
                                ", target expects " + std::to_string(dim()));
  if (!q.allFinite())
    throw DivergenceError("non-finite position");
}

HessianPartials TargetModel::hessian_partials(const Vector& q) const {
  return fd_hessian_partials(*this, q, 1e-5);
}

Matrix TargetModel::hessian_diagonal_partials(const Vector& q) const {
  const HessianPartials slices = hessian_partials(q);
  const int n = dim();
  Matrix d(n, n);
  for (int k = 0; k < n; ++k)
    d.row(k) = slices[static_cast<std::size_t>(k)].diagonal().transpose();
  return d;
}

HessianPartials fd_hessian_partials(const TargetModel& model, const Vector& q, double h) {
  if (!(h > 0.0) || !std::isfinite(h))
    throw std::invalid_argument("finite-difference step must be positive");
  if (!q.allFinite())
    throw DivergenceError("non-finite probe point");
  const int n = model.dim();
  HessianPartials slices(static_cast<std::size_t>(n));
  Vector probe = q;
  for (int k = 0; k < n; ++k) {
    probe(k) = q(k) + h;
    const Matrix up = model.hessian(probe);
    probe(k) = q(k) - h;
    const Matrix down = model.hessian(probe);
    probe(k) = q(k);
    Matrix slice = (up - down) / (2.0 * h);
    slices[static_cast<std::size_t>(k)] = 0.5 * (slice + slice.transpose());
  }
  return slices;
}

// ---------------------------------------------------------------------------
// Funnel
// ---------------------------------------------------------------------------

FunnelModel::FunnelModel(int n) : n_(n) {
  if (n < 1)
    throw std::invalid_argument("funnel needs at least one x coordinate");
}

double FunnelModel::exp_v(const Vector& q) const {
  check_point(q);
  const double v = q(n_);
  if (v > kMaxExponent)
    throw DivergenceError("funnel: exp(v) overflows");
  return std::exp(v);
}

double FunnelModel::potential(const Vector& q) const {
  const double ev = exp_v(q);
  const double v = q(n_);
  const double sq = q.head(n_).squaredNorm();
  return checked(0.5 * ev * sq - 0.5 * n_ * v + v * v / 18.0, "funnel potential");
}

Vector FunnelModel::gradient(const Vector& q) const {
  const double ev = exp_v(q);
  const double v = q(n_);
  Vector g(n_ + 1);
  g.head(n_) = ev * q.head(n_);
  g(n_) = 0.5 * ev * q.head(n_).squaredNorm() - 0.5 * n_ + v / 9.0;
  if (!g.allFinite())
    throw DivergenceError("non-finite funnel gradient");
  return g;
}

Matrix FunnelModel::hessian(const Vector& q) const {
  const double ev = exp_v(q);
  Matrix H = Matrix::Zero(n_ + 1, n_ + 1);
  H.topLeftCorner(n_, n_).diagonal().setConstant(ev);
  H.col(n_).head(n_) = ev * q.head(n_);
  H.row(n_).head(n_) = H.col(n_).head(n_).transpose();
  H(n_, n_) = 0.5 * ev * q.head(n_).squaredNorm() + 1.0 / 9.0;
  if (!H.allFinite())
    throw DivergenceError("non-finite funnel Hessian");
  return H;
}

HessianPartials FunnelModel::hessian_partials(const Vector& q) const {
  const double ev = exp_v(q);
  const int d = n_ + 1;
  HessianPartials slices(static_cast<std::size_t>(d), Matrix::Zero(d, d));
  // d/dx_k: only the (x_k, v) pair and the (v, v) entry depend on x_k.
  for (int k = 0; k < n_; ++k) {
    Matrix& s = slices[static_cast<std::size_t>(k)];
    s(k, n_) = ev;
    s(n_, k) = ev;
    s(n_, n_) = ev * q(k);
  }
  // d/dv: every nonzero Hessian entry carries a factor e^v.
  Matrix& sv = slices[static_cast<std::size_t>(n_)];
  sv.topLeftCorner(n_, n_).diagonal().setConstant(ev);
  sv.col(n_).head(n_) = ev * q.head(n_);
  sv.row(n_).head(n_) = sv.col(n_).head(n_).transpose();
  sv(n_, n_) = 0.5 * ev * q.head(n_).squaredNorm();
  for (const auto& s : slices)
    if (!s.allFinite())
      throw DivergenceError("non-finite funnel third derivatives");
  return slices;
}

Matrix FunnelModel::hessian_diagonal_partials(const Vector& q) const {
  const double ev = exp_v(q);
  const int d = n_ + 1;
  Matrix D = Matrix::Zero(d, d);
  for (int k = 0; k < n_; ++k)
    D(k, n_) = ev * q(k);
  D.row(n_).head(n_).setConstant(ev);
  D(n_, n_) = 0.5 * ev * q.head(n_).squaredNorm();
  if (!D.allFinite())
    throw DivergenceError("non-finite funnel third derivatives");
  return D;
}

// ---------------------------------------------------------------------------
// Gaussian
// ---------------------------------------------------------------------------

GaussianModel::GaussianModel(const Matrix& covariance) {
  if (covariance.rows() < 1 || covariance.rows() != covariance.cols())
    throw std::invalid_argument("Gaussian covariance must be square and non-empty");
  Eigen::LLT<Matrix> llt(0.5 * (covariance + covariance.transpose()));
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("Gaussian covariance must be positive definite");
  precision_ = llt.solve(Matrix::Identity(covariance.rows(), covariance.cols()));
  precision_ = 0.5 * (precision_ + precision_.transpose());
}

GaussianModel GaussianModel::standard(int dim) {
  if (dim < 1)
    throw std::invalid_argument("Gaussian dimension must be positive");
  return GaussianModel(Matrix::Identity(dim, dim));
}

double GaussianModel::potential(const Vector& q) const {
  check_point(q);
  return checked(0.5 * q.dot(precision_ * q), "Gaussian potential");
}

Vector GaussianModel::gradient(const Vector& q) const {
  check_point(q);
  return precision_ * q;
}

Matrix GaussianModel::hessian(const Vector& q) const {
  check_point(q);
  return precision_;
}

HessianPartials GaussianModel::hessian_partials(const Vector& q) const {
  check_point(q);
  const int d = dim();
  return HessianPartials(static_cast<std::size_t>(d), Matrix::Zero(d, d));
}

Matrix GaussianModel::hessian_diagonal_partials(const Vector& q) const {
  check_point(q);
  return Matrix::Zero(dim(), dim());
}

std::unique_ptr<TargetModel> make_target(std::string_view name, int n) {
  if (n < 1)
    throw ConfigError("target dimension parameter must be positive");
  if (name == "funnel")
    return std::make_unique<FunnelModel>(n);
  if (name == "gaussian")
    return std::make_unique<GaussianModel>(GaussianModel::standard(n));
  throw ConfigError("unknown target '" + std::string(name) + "' (expected funnel or gaussian)");
}

} // namespace softabs
