#pragma once

#include "softabs/metrics.hpp"
#include "softabs/targets.hpp"

#include <string>
#include <utility>
#include <vector>

namespace softabs {

struct IntegratorConfig {
  double epsilon = 0.1; ///< step size
  int n_steps = 10;     ///< steps per trajectory, L
  /// Fixed-point iterations stop once max_i |x_i' - x_i| <= fp_threshold.
  double fp_threshold = 1e-12;
  int fp_max_iters = 100;

  /// Throws ConfigError on negative or non-finite values.
  void validate() const;
};

/// A point z = (q, p) in phase space with the metric evaluated at q.
struct PhaseState {
  Vector q;
  Vector p;
  MetricState metric;

  double hamiltonian() const { return metric.hamiltonian(p); }
};

/// Builds a PhaseState, refreshing the metric at q.
PhaseState make_phase_state(const MetricConfig& config, const TargetModel& model, Vector q, Vector p);

struct ConvergenceReport {
  int momentum_iters = 0;
  int position_iters = 0;
};

/// Explicit leapfrog for the Euclidean family: half kick, drift by eps M^{-1} p, half kick.
PhaseState leapfrog_step(const TargetModel& model, const MetricConfig& config, const PhaseState& state, double epsilon);

/// One step of the implicit generalized leapfrog for H = tau + phi:
///
///   p <- p - eps/2 dphi/dq(q)
///   p <- rho - eps/2 dtau/dq(p, q)                                  (solved by fixed point, rho = p)
///   q <- sigma + eps/2 [dtau/dp(p, sigma) + dtau/dp(p, q)]          (solved by fixed point, sigma = q)
///   p <- p - eps/2 dtau/dq(p, q)
///   p <- p - eps/2 dphi/dq(q)
///
/// The metric is refreshed at every position iterate, so the closing kicks
/// see Sigma at the final q. Throws DivergenceError when an iteration fails
/// to converge within fp_max_iters or produces non-finite values; the input
/// state is never modified.
std::pair<PhaseState, ConvergenceReport> gen_leapfrog_step(const TargetModel& model, const MetricConfig& config,
                                                           const PhaseState& state, const IntegratorConfig& integrator);

struct TrajectoryPoint {
  int step = 0;
  Vector q;
  Vector p;
  double hamiltonian = 0.0;
};

struct TrajectoryResult {
  PhaseState final_state;
  bool divergent = false;
  std::string divergence_message;
  int steps_taken = 0;
  long momentum_iters = 0;
  long position_iters = 0;
  int max_iters = 0;
  /// Rows 0..steps_taken when logging was requested.
  std::vector<TrajectoryPoint> log;
};

/// Composes n_steps steps of the integrator matching the metric family:
/// explicit leapfrog for Euclidean, generalized leapfrog otherwise. The
/// first divergent step stops the trajectory; final_state then holds the
/// last good point and divergent is set.
TrajectoryResult integrate_trajectory(const TargetModel& model, const MetricConfig& config, const PhaseState& start,
                                      const IntegratorConfig& integrator, bool record_log = false);

} // namespace softabs
