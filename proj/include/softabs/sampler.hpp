#pragma once

#include "softabs/integrate.hpp"
#include "softabs/metrics.hpp"
#include "softabs/rng.hpp"
#include "softabs/targets.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace softabs {

/// Dual-averaging step-size adaptation toward a target acceptance rate.
struct DualAveragingState {
  double gamma = 0.05;
  double t0 = 10.0;
  double kappa = 0.75;
  double mu = 0.0;            ///< shrinkage point, log(10 eps_init)
  double target = 0.65;       ///< r
  double log_epsilon = 0.0;   ///< current iterate
  double log_epsilon_bar = 0.0;
  double h_bar = 0.0;         ///< running mean of (target - accept_prob)
  long iteration = 0;

  static DualAveragingState start(double epsilon_init, double target_accept);
  double epsilon() const;
  double averaged_epsilon() const;
};

DualAveragingState dual_avg_update(DualAveragingState state, double accept_prob);

struct ChainConfig {
  std::string target = "funnel";
  int target_param = 10; ///< funnel: number of x coordinates; gaussian: dimension
  MetricConfig metric;
  /// integrator.epsilon doubles as the initial step size when adapting.
  IntegratorConfig integrator;
  int n_warmup = 1000;
  int n_samples = 1000;
  bool adapt = false;
  double target_accept = 0.65;
  std::uint64_t seed = 0;
  double init_lo = -1.0;
  double init_hi = 1.0;

  /// Throws ConfigError.
  void validate() const;
};

struct TransitionResult {
  bool accepted = false;
  bool divergent = false;
  double delta_H = 0.0;
  double accept_prob = 0.0;
  long fixed_point_iters = 0; ///< momentum plus position iterations over the trajectory
  int steps = 0;
  std::string divergence_message;
};

/// One Metropolis-corrected HMC transition from state. A fresh momentum is
/// drawn from the metric at state.q; on rejection or divergence state keeps
/// its position and metric untouched.
TransitionResult hmc_transition(PhaseState& state, const TargetModel& model, const MetricConfig& metric,
                                const IntegratorConfig& integrator, Rng& rng);

enum class ChainStatus { Ok, Failed };

struct ChainOutput {
  ChainStatus status = ChainStatus::Ok;
  std::string failure_message;
  Matrix samples;                     ///< n_samples x N
  std::vector<unsigned char> accepted;
  std::vector<double> delta_H;
  double accept_rate = 0.0;           ///< accepted fraction over the sampling phase
  double mean_accept_prob = 0.0;      ///< mean min(1, exp(-dH)) over the sampling phase
  double epsilon_final = 0.0;
  std::vector<double> warmup_epsilon; ///< step size used by each warm-up transition
  int n_divergent = 0;                ///< sampling phase
  int n_warmup_divergent = 0;
  double mean_fixed_point_iters = 0.0; ///< per integration step, over all transitions
  double wall_seconds = 0.0;
};

/// Runs one chain: q ~ U(init_lo, init_hi)^N, n_warmup transitions (adapting
/// eps when requested), then n_samples transitions at the frozen step size.
/// Deterministic given config.seed.
ChainOutput run_chain(const TargetModel& model, const ChainConfig& config);
/// Builds the target named in the config and runs the chain on it.
ChainOutput run_chain(const ChainConfig& config);

/// Runs the configs independently, in parallel when OpenMP threads are
/// available; results are returned in input order.
std::vector<ChainOutput> run_chains(const std::vector<ChainConfig>& configs);

} // namespace softabs
