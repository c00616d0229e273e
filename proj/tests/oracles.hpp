#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include "softabs/metrics.hpp"
#include "softabs/rng.hpp"
#include "softabs/targets.hpp"

#include <algorithm>
#include <cmath>

namespace oracle {

using softabs::Matrix;
using softabs::Vector;

/// dSigma/dq_n built densely, Q (J o (Q^T dH_n Q)) Q^T, one slice at a time.
inline Matrix softabs_metric_partial(const softabs::SoftAbsPieces& pieces, const Matrix& dH) {
  const Matrix& Q = pieces.eig.eigenvectors;
  const Matrix rotated = Q.transpose() * dH * Q;
  return Q * pieces.jmat.cwiseProduct(rotated) * Q.transpose();
}

/// -1/2 p^T Sigma^{-1} dSigma_n Sigma^{-1} p via explicit inverses and per-slice metric partials.
inline Vector direct_dtau_dq(const softabs::SoftAbsPieces& pieces, const softabs::HessianPartials& dH,
                             const Vector& p) {
  const Matrix sigma_inv = pieces.metric().inverse();
  const Vector w = sigma_inv * p;
  Vector out(static_cast<Eigen::Index>(dH.size()));
  for (std::size_t n = 0; n < dH.size(); ++n)
    out(static_cast<Eigen::Index>(n)) = -0.5 * w.dot(softabs_metric_partial(pieces, dH[n]) * w);
  return out;
}

/// 1/2 Tr[Sigma^{-1} dSigma_n] + dV_n.
inline Vector direct_dphi_dq(const softabs::SoftAbsPieces& pieces, const softabs::HessianPartials& dH,
                             const Vector& grad_v) {
  const Matrix sigma_inv = pieces.metric().inverse();
  Vector out(static_cast<Eigen::Index>(dH.size()));
  for (std::size_t n = 0; n < dH.size(); ++n)
    out(static_cast<Eigen::Index>(n)) =
        0.5 * (sigma_inv * softabs_metric_partial(pieces, dH[n])).trace() + grad_v(static_cast<Eigen::Index>(n));
  return out;
}

/// Central differences of tau(p, .) at fixed p.
inline Vector fd_dtau_dq(const softabs::MetricConfig& cfg, const softabs::TargetModel& model, const Vector& q,
                         const Vector& p, double h) {
  Vector out(q.size());
  for (Eigen::Index n = 0; n < q.size(); ++n) {
    Vector qp = q, qm = q;
    qp(n) += h;
    qm(n) -= h;
    out(n) = (softabs::refresh(cfg, model, qp).tau(p) - softabs::refresh(cfg, model, qm).tau(p)) / (2.0 * h);
  }
  return out;
}

inline Vector fd_dphi_dq(const softabs::MetricConfig& cfg, const softabs::TargetModel& model, const Vector& q,
                         double h) {
  Vector out(q.size());
  for (Eigen::Index n = 0; n < q.size(); ++n) {
    Vector qp = q, qm = q;
    qp(n) += h;
    qm(n) -= h;
    out(n) = (softabs::refresh(cfg, model, qp).phi() - softabs::refresh(cfg, model, qm).phi()) / (2.0 * h);
  }
  return out;
}

inline Vector fd_dtau_dp(const softabs::MetricState& m, const Vector& p, double h) {
  Vector out(p.size());
  for (Eigen::Index n = 0; n < p.size(); ++n) {
    Vector pp = p, pm = p;
    pp(n) += h;
    pm(n) -= h;
    out(n) = (m.tau(pp) - m.tau(pm)) / (2.0 * h);
  }
  return out;
}

/// max |a - b| / max(|b|_inf, floor)
inline double rel_error(const Vector& a, const Vector& b, double floor = 1e-8) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(b.cwiseAbs().maxCoeff(), floor);
}

inline Vector uniform_vector(softabs::Rng& rng, int dim, double lo, double hi) {
  Vector v(dim);
  for (int i = 0; i < dim; ++i)
    v(i) = rng.uniform(lo, hi);
  return v;
}

inline Vector normal_vector(softabs::Rng& rng, int dim) {
  Vector v(dim);
  for (int i = 0; i < dim; ++i)
    v(i) = rng.normal();
  return v;
}

} // namespace oracle
