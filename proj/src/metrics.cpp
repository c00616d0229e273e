#include "softabs/metrics.hpp"

#include "softabs/errors.hpp"
#include "softabs/kernels.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace softabs {

namespace {

constexpr double kOuterMaxExponent = 700.0;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// sinh(x) / x
double sinhc(double x) {
  if (std::abs(x) < 1e-4)
    return 1.0 + x * x / 6.0;
  return std::sinh(x) / x;
}

// d/dx sinh(x) / x
double sinhc_deriv(double x) {
  if (std::abs(x) < 1e-4)
    return x / 3.0 + x * x * x / 30.0;
  return detail::xcosh_minus_sinh(x) / (x * x);
}

// Rank-one coefficient of the inverse, Sigma^{-1} = alpha S(x) I - alpha^2 W(x) g g^T, with
// W(x) = tanh(x) (cosh(x) - 1) / x^2. Returns W / x, which is finite at 0.
double outer_w_over_x(double x) {
  const double h = sinhc(0.5 * x);
  return sinhc(x) / std::cosh(x) * 0.5 * h * h;
}

double outer_w_deriv(double x) {
  const double wx = outer_w_over_x(x);
  const double w = x * wx;
  return w * (detail::coth_minus_reciprocal(x) + detail::coth_minus_reciprocal(0.5 * x) - std::tanh(x)) + wx;
}

// tanh(x) / x^2 and its derivative, used for 1 / (s b) away from x = 0.
double tanh_over_sq(double x) { return std::tanh(x) / (x * x); }
double tanh_over_sq_deriv(double x) {
  const double c = std::cosh(x);
  return 1.0 / (c * c * x * x) - 2.0 * std::tanh(x) / (x * x * x);
}

Vector require_finite(Vector v, const char* what) {
  if (!v.allFinite())
    throw DivergenceError(std::string("non-finite ") + what);
  return v;
}

double require_finite(double v, const char* what) {
  if (!std::isfinite(v))
    throw DivergenceError(std::string("non-finite ") + what);
  return v;
}

} // namespace

std::string_view to_string(MetricFamily family) {
  switch (family) {
  case MetricFamily::Euclidean: return "euclidean";
  case MetricFamily::SoftAbs: return "softabs";
  case MetricFamily::DiagSoftAbs: return "diag-softabs";
  case MetricFamily::OuterSoftAbs: return "outer-softabs";
  case MetricFamily::DiagOuterSoftAbs: return "diag-outer-softabs";
  }
  return "unknown";
}

MetricFamily parse_metric_family(std::string_view name) {
  for (auto f : {MetricFamily::Euclidean, MetricFamily::SoftAbs, MetricFamily::DiagSoftAbs,
                 MetricFamily::OuterSoftAbs, MetricFamily::DiagOuterSoftAbs})
    if (to_string(f) == name)
      return f;
  throw ConfigError("unknown metric '" + std::string(name) +
                    "' (expected euclidean, softabs, diag-softabs, outer-softabs or diag-outer-softabs)");
}

void MetricConfig::validate(int dim) const {
  if (family != MetricFamily::Euclidean && (!(alpha > 0.0) || !std::isfinite(alpha)))
    throw ConfigError("alpha must be positive and finite");
  if (mass_diag.size() != 0) {
    if (mass_diag.size() != dim)
      throw ConfigError("mass diagonal has length " + std::to_string(mass_diag.size()) + ", expected " +
                        std::to_string(dim));
    if (!mass_diag.allFinite() || (mass_diag.array() <= 0.0).any())
      throw ConfigError("mass diagonal entries must be positive");
  }
}

// ---------------------------------------------------------------------------
// Approximate-metric primitives
// ---------------------------------------------------------------------------

OuterSoftAbsFactors outer_softabs_metric(const Vector& g, double alpha) {
  if (!(alpha > 0.0))
    throw std::invalid_argument("SoftAbs alpha must be positive");
  if (!g.allFinite())
    throw DivergenceError("non-finite gradient in outer-product metric");
  OuterSoftAbsFactors f;
  f.alpha = alpha;
  f.g = g;
  f.s = g.squaredNorm();
  f.x = alpha * f.s;
  if (!(f.x <= kOuterMaxExponent))
    throw DivergenceError("outer-product SoftAbs: alpha * g.g = " + std::to_string(f.x) +
                          " overflows sinh/cosh");
  f.a = 1.0 / (alpha * sinhc(f.x));
  f.b = softabs_scalar(f.s, alpha);
  return f;
}

Matrix OuterSoftAbsFactors::metric() const {
  const auto n = g.size();
  // (b - a) / s = tanh(x / 2)
  Matrix m = a * Matrix::Identity(n, n);
  if (s > 0.0)
    m += std::tanh(0.5 * x) * (g * g.transpose());
  return m;
}

Vector diag_softabs_transform(const Vector& h_diag, double alpha) {
  Vector out(h_diag.size());
  for (Eigen::Index i = 0; i < h_diag.size(); ++i)
    out(i) = softabs_scalar(h_diag(i), alpha);
  return out;
}

Vector diag_outer_softabs(const Vector& g, double alpha) {
  return diag_softabs_transform(g.array().square().matrix(), alpha);
}

// ---------------------------------------------------------------------------
// refresh
// ---------------------------------------------------------------------------

MetricState refresh(const MetricConfig& config, const TargetModel& model, const Vector& q) {
  MetricState st;
  st.family_ = config.family;
  st.q_ = q;
  st.potential_ = require_finite(model.potential(q), "potential");
  st.grad_ = require_finite(model.gradient(q), "potential gradient");
  const double alpha = config.alpha;
  const int n = model.dim();

  switch (config.family) {
  case MetricFamily::Euclidean: {
    detail::EuclideanCache c;
    if (config.mass_diag.size() == 0) {
      c.inv_mass = Vector::Ones(n);
      c.sqrt_mass = Vector::Ones(n);
    } else {
      c.inv_mass = config.mass_diag.cwiseInverse();
      c.sqrt_mass = config.mass_diag.cwiseSqrt();
    }
    st.cache_ = std::move(c);
    break;
  }
  case MetricFamily::SoftAbs: {
    detail::SoftAbsCache c;
    c.pieces = build_pieces(model.hessian(q), alpha);
    c.partials = model.hessian_partials(q);
    st.half_log_det_ = 0.5 * c.pieces.lambda_soft.array().log().sum();
    st.cache_ = std::move(c);
    break;
  }
  case MetricFamily::DiagSoftAbs: {
    detail::DiagSoftAbsCache c;
    const Vector h = model.hessian(q).diagonal();
    if (!h.allFinite())
      throw DivergenceError("non-finite Hessian diagonal");
    c.lambda_soft = diag_softabs_transform(h, alpha);
    c.slope.resize(n);
    for (int i = 0; i < n; ++i)
      c.slope(i) = softabs_scalar_deriv(h(i), alpha);
    c.diag_partials = model.hessian_diagonal_partials(q);
    st.half_log_det_ = 0.5 * c.lambda_soft.array().log().sum();
    st.cache_ = std::move(c);
    break;
  }
  case MetricFamily::OuterSoftAbs: {
    detail::OuterSoftAbsCache c;
    c.factors = outer_softabs_metric(st.grad_, alpha);
    c.hessian = model.hessian(q);
    if (!c.hessian.allFinite())
      throw DivergenceError("non-finite Hessian");
    st.half_log_det_ = 0.5 * ((n - 1) * std::log(c.factors.a) + std::log(c.factors.b));
    st.cache_ = std::move(c);
    break;
  }
  case MetricFamily::DiagOuterSoftAbs: {
    detail::DiagOuterSoftAbsCache c;
    c.lambda_soft = diag_outer_softabs(st.grad_, alpha);
    c.slope.resize(n);
    for (int i = 0; i < n; ++i)
      c.slope(i) = softabs_scalar_deriv(st.grad_(i) * st.grad_(i), alpha);
    c.hessian = model.hessian(q);
    if (!c.hessian.allFinite())
      throw DivergenceError("non-finite Hessian");
    st.half_log_det_ = 0.5 * c.lambda_soft.array().log().sum();
    st.cache_ = std::move(c);
    break;
  }
  }
  require_finite(st.half_log_det_, "metric log-determinant");
  return st;
}

// ---------------------------------------------------------------------------
// Energies and gradients
// ---------------------------------------------------------------------------

double MetricState::phi() const { return potential_ + half_log_det_; }

double MetricState::tau(const Vector& p) const {
  const double value = std::visit(
      overloaded{
          [&](const detail::EuclideanCache& c) { return 0.5 * p.cwiseAbs2().dot(c.inv_mass); },
          [&](const detail::SoftAbsCache& c) {
            const Vector y = c.pieces.eig.eigenvectors.transpose() * p;
            return 0.5 * y.cwiseAbs2().cwiseQuotient(c.pieces.lambda_soft).sum();
          },
          [&](const detail::DiagSoftAbsCache& c) { return 0.5 * p.cwiseAbs2().cwiseQuotient(c.lambda_soft).sum(); },
          [&](const detail::OuterSoftAbsCache& c) {
            const auto& f = c.factors;
            const double gp = f.g.dot(p);
            if (f.x < 1.0) {
              const double w = f.x * outer_w_over_x(f.x);
              return 0.5 * (f.alpha * sinhc(f.x) * p.squaredNorm() - f.alpha * f.alpha * w * gp * gp);
            }
            // Split p into its parts along and across g; the two inverse
            // eigenvalues differ by orders of magnitude here.
            const Vector perp = p - (gp / f.s) * f.g;
            const double inv_sb = f.alpha * f.alpha * tanh_over_sq(f.x);
            return 0.5 * (perp.squaredNorm() / f.a + gp * gp * inv_sb);
          },
          [&](const detail::DiagOuterSoftAbsCache& c) {
            return 0.5 * p.cwiseAbs2().cwiseQuotient(c.lambda_soft).sum();
          },
      },
      cache_);
  return require_finite(value, "kinetic energy");
}

Vector MetricState::dtau_dp(const Vector& p) const {
  Vector out = std::visit(
      overloaded{
          [&](const detail::EuclideanCache& c) -> Vector { return p.cwiseProduct(c.inv_mass); },
          [&](const detail::SoftAbsCache& c) -> Vector {
            const Matrix& Q = c.pieces.eig.eigenvectors;
            return Q * (Q.transpose() * p).cwiseQuotient(c.pieces.lambda_soft);
          },
          [&](const detail::DiagSoftAbsCache& c) -> Vector { return p.cwiseQuotient(c.lambda_soft); },
          [&](const detail::OuterSoftAbsCache& c) -> Vector {
            const auto& f = c.factors;
            const double gp = f.g.dot(p);
            if (f.x < 1.0) {
              const double w = f.x * outer_w_over_x(f.x);
              return f.alpha * sinhc(f.x) * p - (f.alpha * f.alpha * w * gp) * f.g;
            }
            const Vector perp = p - (gp / f.s) * f.g;
            const double inv_sb = f.alpha * f.alpha * tanh_over_sq(f.x);
            return perp / f.a + (gp * inv_sb) * f.g;
          },
          [&](const detail::DiagOuterSoftAbsCache& c) -> Vector { return p.cwiseQuotient(c.lambda_soft); },
      },
      cache_);
  return require_finite(std::move(out), "dtau/dp");
}

Vector MetricState::dtau_dq(const Vector& p) const {
  Vector out = std::visit(
      overloaded{
          [&](const detail::EuclideanCache&) -> Vector { return Vector::Zero(p.size()); },
          [&](const detail::SoftAbsCache& c) -> Vector {
            // -1/2 Tr[Q (u u^T ∘ J) Q^T dH_n],  u = Q^T p / lambda_soft
            const Matrix& Q = c.pieces.eig.eigenvectors;
            const Vector u = (Q.transpose() * p).cwiseQuotient(c.pieces.lambda_soft);
            const Matrix inner = (u * u.transpose()).cwiseProduct(c.pieces.jmat);
            const Matrix kernel = Q * inner * Q.transpose();
            Vector traces;
            kernels::trace_contract(kernel, c.partials, traces);
            return -0.5 * traces;
          },
          [&](const detail::DiagSoftAbsCache& c) -> Vector {
            const Vector w = p.cwiseQuotient(c.lambda_soft).cwiseAbs2().cwiseProduct(c.slope);
            return -0.5 * (c.diag_partials * w);
          },
          [&](const detail::OuterSoftAbsCache& c) -> Vector {
            const auto& f = c.factors;
            const double al = f.alpha;
            const double gp = f.g.dot(p);
            Vector dg;
            if (f.x < 1.0) {
              const double w = f.x * outer_w_over_x(f.x);
              dg = (al * al * sinhc_deriv(f.x) * p.squaredNorm() - al * al * al * outer_w_deriv(f.x) * gp * gp) * f.g -
                   (al * al * w * gp) * p;
            } else {
              const Vector perp = p - (gp / f.s) * f.g;
              const double inv_a = 1.0 / f.a;
              const double inv_sb = al * al * tanh_over_sq(f.x);
              dg = -(gp / f.s) * inv_a * perp +
                   (perp.squaredNorm() * al * al * sinhc_deriv(f.x) + gp * gp * al * al * al * tanh_over_sq_deriv(f.x)) *
                       f.g +
                   (gp * inv_sb) * p;
            }
            return c.hessian * dg;
          },
          [&](const detail::DiagOuterSoftAbsCache& c) -> Vector {
            const Vector w = p.cwiseQuotient(c.lambda_soft).cwiseAbs2().cwiseProduct(c.slope).cwiseProduct(grad_);
            return -(c.hessian * w);
          },
      },
      cache_);
  return require_finite(std::move(out), "dtau/dq");
}

Vector MetricState::dphi_dq() const {
  Vector out = std::visit(
      overloaded{
          [&](const detail::EuclideanCache&) -> Vector { return grad_; },
          [&](const detail::SoftAbsCache& c) -> Vector {
            // 1/2 Tr[Q (R ∘ J) Q^T dH_n] + dV/dq_n, R = diag(1 / lambda_soft)
            const Matrix& Q = c.pieces.eig.eigenvectors;
            const Vector r = c.pieces.jmat.diagonal().cwiseQuotient(c.pieces.lambda_soft);
            const Matrix kernel = Q * r.asDiagonal() * Q.transpose();
            Vector traces;
            kernels::trace_contract(kernel, c.partials, traces);
            return 0.5 * traces + grad_;
          },
          [&](const detail::DiagSoftAbsCache& c) -> Vector {
            return 0.5 * (c.diag_partials * c.slope.cwiseQuotient(c.lambda_soft)) + grad_;
          },
          [&](const detail::OuterSoftAbsCache& c) -> Vector {
            const auto& f = c.factors;
            const double n = static_cast<double>(f.g.size());
            // d log a / ds = -alpha (coth x - 1/x),  d log b / ds = f'(s) / f(s)
            const double coef = -(n - 1.0) * f.alpha * detail::coth_minus_reciprocal(f.x) +
                                softabs_scalar_deriv(f.s, f.alpha) / f.b;
            return coef * (c.hessian * f.g) + grad_;
          },
          [&](const detail::DiagOuterSoftAbsCache& c) -> Vector {
            return c.hessian * c.slope.cwiseQuotient(c.lambda_soft).cwiseProduct(grad_) + grad_;
          },
      },
      cache_);
  return require_finite(std::move(out), "dphi/dq");
}

Vector MetricState::sample_momentum(Rng& rng) const {
  const Eigen::Index n = q_.size();
  Vector z(n);
  for (Eigen::Index i = 0; i < n; ++i)
    z(i) = rng.normal();
  return std::visit(
      overloaded{
          [&](const detail::EuclideanCache& c) -> Vector { return z.cwiseProduct(c.sqrt_mass); },
          [&](const detail::SoftAbsCache& c) -> Vector {
            return c.pieces.eig.eigenvectors * z.cwiseProduct(c.pieces.lambda_soft.cwiseSqrt());
          },
          [&](const detail::DiagSoftAbsCache& c) -> Vector { return z.cwiseProduct(c.lambda_soft.cwiseSqrt()); },
          [&](const detail::OuterSoftAbsCache& c) -> Vector {
            // Symmetric square root: sqrt(a) I + (sqrt(b) - sqrt(a)) g g^T / s, where
            // (sqrt(b) - sqrt(a)) / s = tanh(x / 2) / (sqrt(a) + sqrt(b)).
            const auto& f = c.factors;
            const double ra = std::sqrt(f.a);
            const double rb = std::sqrt(f.b);
            const double coef = std::tanh(0.5 * f.x) / (ra + rb);
            return ra * z + (coef * f.g.dot(z)) * f.g;
          },
          [&](const detail::DiagOuterSoftAbsCache& c) -> Vector {
            return z.cwiseProduct(c.lambda_soft.cwiseSqrt());
          },
      },
      cache_);
}

Matrix MetricState::metric_matrix() const {
  return std::visit(
      overloaded{
          [&](const detail::EuclideanCache& c) -> Matrix { return c.inv_mass.cwiseInverse().asDiagonal(); },
          [&](const detail::SoftAbsCache& c) -> Matrix { return c.pieces.metric(); },
          [&](const detail::DiagSoftAbsCache& c) -> Matrix { return c.lambda_soft.asDiagonal(); },
          [&](const detail::OuterSoftAbsCache& c) -> Matrix { return c.factors.metric(); },
          [&](const detail::DiagOuterSoftAbsCache& c) -> Matrix { return c.lambda_soft.asDiagonal(); },
      },
      cache_);
}

Vector MetricState::metric_eigenvalues() const {
  return std::visit(
      overloaded{
          [&](const detail::EuclideanCache& c) -> Vector { return c.inv_mass.cwiseInverse(); },
          [&](const detail::SoftAbsCache& c) -> Vector { return c.pieces.lambda_soft; },
          [&](const detail::DiagSoftAbsCache& c) -> Vector { return c.lambda_soft; },
          [&](const detail::OuterSoftAbsCache& c) -> Vector {
            Vector ev = Vector::Constant(c.factors.g.size(), c.factors.a);
            ev(0) = c.factors.b;
            return ev;
          },
          [&](const detail::DiagOuterSoftAbsCache& c) -> Vector { return c.lambda_soft; },
      },
      cache_);
}

const SoftAbsPieces* MetricState::softabs_pieces() const {
  if (const auto* c = std::get_if<detail::SoftAbsCache>(&cache_))
    return &c->pieces;
  return nullptr;
}

const HessianPartials* MetricState::hessian_partials() const {
  if (const auto* c = std::get_if<detail::SoftAbsCache>(&cache_))
    return &c->partials;
  return nullptr;
}

} // namespace softabs
