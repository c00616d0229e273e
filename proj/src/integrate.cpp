#include "softabs/integrate.hpp"

#include "softabs/errors.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>

namespace softabs {

namespace {

double max_abs_diff(const Vector& a, const Vector& b) {
  const double d = (a - b).cwiseAbs().maxCoeff();
  if (!std::isfinite(d))
    throw DivergenceError("non-finite fixed-point iterate");
  return d;
}

} // namespace

void IntegratorConfig::validate() const {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
    throw ConfigError("step size must be finite and non-negative");
  if (n_steps < 0)
    throw ConfigError("number of integration steps must be non-negative");
  if (!(fp_threshold > 0.0) || !std::isfinite(fp_threshold))
    throw ConfigError("fixed-point threshold must be positive");
  if (fp_max_iters < 1)
    throw ConfigError("fixed-point iteration cap must be at least 1");
}

PhaseState make_phase_state(const MetricConfig& config, const TargetModel& model, Vector q, Vector p) {
  if (p.size() != q.size())
    throw std::invalid_argument("position and momentum lengths differ");
  MetricState metric = refresh(config, model, q);
  return PhaseState{std::move(q), std::move(p), std::move(metric)};
}

PhaseState leapfrog_step(const TargetModel& model, const MetricConfig& config, const PhaseState& state,
                         double epsilon) {
  if (config.family != MetricFamily::Euclidean)
    throw std::invalid_argument("explicit leapfrog requires the Euclidean metric");
  const double half = 0.5 * epsilon;
  Vector p = state.p - half * state.metric.potential_gradient();
  Vector q = state.q + epsilon * state.metric.dtau_dp(p);
  MetricState metric = refresh(config, model, q);
  p -= half * metric.potential_gradient();
  if (!p.allFinite())
    throw DivergenceError("non-finite momentum");
  return PhaseState{std::move(q), std::move(p), std::move(metric)};
}

std::pair<PhaseState, ConvergenceReport> gen_leapfrog_step(const TargetModel& model, const MetricConfig& config,
                                                           const PhaseState& state,
                                                           const IntegratorConfig& integrator) {
  const double half = 0.5 * integrator.epsilon;
  const double tol = integrator.fp_threshold;
  ConvergenceReport report;

  Vector p = state.p - half * state.metric.dphi_dq();

  const Vector rho = p;
  double delta = 0.0;
  do {
    if (++report.momentum_iters > integrator.fp_max_iters)
      throw DivergenceError("momentum fixed-point iteration did not converge");
    Vector next = rho - half * state.metric.dtau_dq(p);
    delta = max_abs_diff(next, p);
    p = std::move(next);
  } while (delta > tol);

  const Vector& sigma = state.q;
  // Stop once the next iterate would move by at most tol; this reuses the
  // velocity at the refreshed metric, so a constant metric takes one pass.
  const Vector velocity_at_sigma = state.metric.dtau_dp(p);
  Vector velocity = velocity_at_sigma;
  Vector q;
  std::optional<MetricState> latest;
  do {
    if (++report.position_iters > integrator.fp_max_iters)
      throw DivergenceError("position fixed-point iteration did not converge");
    q = sigma + half * (velocity_at_sigma + velocity);
    latest = refresh(config, model, q);
    Vector next = latest->dtau_dp(p);
    delta = half * max_abs_diff(next, velocity);
    velocity = std::move(next);
  } while (delta > tol);

  p -= half * latest->dtau_dq(p);
  p -= half * latest->dphi_dq();
  if (!p.allFinite())
    throw DivergenceError("non-finite momentum");
  return {PhaseState{std::move(q), std::move(p), std::move(*latest)}, report};
}

TrajectoryResult integrate_trajectory(const TargetModel& model, const MetricConfig& config, const PhaseState& start,
                                      const IntegratorConfig& integrator, bool record_log) {
  TrajectoryResult result;
  result.final_state = start;
  if (record_log)
    result.log.push_back({0, start.q, start.p, start.hamiltonian()});
  const bool explicit_scheme = config.family == MetricFamily::Euclidean;
  for (int step = 1; step <= integrator.n_steps; ++step) {
    try {
      if (explicit_scheme) {
        result.final_state = leapfrog_step(model, config, result.final_state, integrator.epsilon);
      } else {
        auto [next, report] = gen_leapfrog_step(model, config, result.final_state, integrator);
        result.final_state = std::move(next);
        result.momentum_iters += report.momentum_iters;
        result.position_iters += report.position_iters;
        result.max_iters = std::max({result.max_iters, report.momentum_iters, report.position_iters});
      }
      result.steps_taken = step;
      if (record_log)
        result.log.push_back({step, result.final_state.q, result.final_state.p, result.final_state.hamiltonian()});
    } catch (const DivergenceError& e) {
      result.divergent = true;
      result.divergence_message = e.what();
      break;
    }
  }
  return result;
}

} // namespace softabs
