#include "softabs/sampler.hpp"

#include "softabs/errors.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <optional>

namespace softabs {

DualAveragingState DualAveragingState::start(double epsilon_init, double target_accept) {
  DualAveragingState s;
  s.mu = std::log(10.0 * epsilon_init);
  s.target = target_accept;
  s.log_epsilon = std::log(epsilon_init);
  s.log_epsilon_bar = 0.0;
  return s;
}

double DualAveragingState::epsilon() const { return std::exp(log_epsilon); }

double DualAveragingState::averaged_epsilon() const { return std::exp(log_epsilon_bar); }

DualAveragingState dual_avg_update(DualAveragingState s, double accept_prob) {
  if (!std::isfinite(accept_prob))
    accept_prob = 0.0;
  s.iteration += 1;
  const auto m = static_cast<double>(s.iteration);
  const double w = 1.0 / (m + s.t0);
  s.h_bar = (1.0 - w) * s.h_bar + w * (s.target - accept_prob);
  s.log_epsilon = s.mu - std::sqrt(m) / s.gamma * s.h_bar;
  const double decay = std::pow(m, -s.kappa);
  s.log_epsilon_bar = decay * s.log_epsilon + (1.0 - decay) * s.log_epsilon_bar;
  return s;
}

void ChainConfig::validate() const {
  if (n_warmup < 0 || n_samples < 0)
    throw ConfigError("warm-up and sample counts must be non-negative");
  if (!(target_accept > 0.0 && target_accept < 1.0))
    throw ConfigError("target acceptance rate must lie in (0, 1)");
  if (!(init_lo < init_hi))
    throw ConfigError("initialization range must satisfy lo < hi");
  integrator.validate();
  if (adapt && !(integrator.epsilon > 0.0))
    throw ConfigError("adaptation needs a positive initial step size");
}

TransitionResult hmc_transition(PhaseState& state, const TargetModel& model, const MetricConfig& metric,
                                const IntegratorConfig& integrator, Rng& rng) {
  TransitionResult out;
  state.p = state.metric.sample_momentum(rng);
  double h0 = 0.0;
  TrajectoryResult traj;
  try {
    h0 = state.hamiltonian();
    traj = integrate_trajectory(model, metric, state, integrator);
    out.fixed_point_iters = traj.momentum_iters + traj.position_iters;
    out.steps = traj.steps_taken;
    if (!traj.divergent) {
      out.delta_H = traj.final_state.hamiltonian() - h0;
      if (!std::isfinite(out.delta_H)) {
        traj.divergent = true;
        traj.divergence_message = "non-finite energy error";
      }
    }
  } catch (const DivergenceError& e) {
    traj.divergent = true;
    traj.divergence_message = e.what();
  }
  const double u = rng.uniform();
  if (traj.divergent) {
    out.divergent = true;
    out.divergence_message = traj.divergence_message;
    out.delta_H = std::numeric_limits<double>::infinity();
    out.accept_prob = 0.0;
    return out;
  }
  out.accept_prob = out.delta_H <= 0.0 ? 1.0 : std::exp(-out.delta_H);
  if (u < out.accept_prob) {
    out.accepted = true;
    state = std::move(traj.final_state);
  }
  return out;
}

ChainOutput run_chain(const TargetModel& model, const ChainConfig& config) {
  config.validate();
  config.metric.validate(model.dim());
  const auto clock_start = std::chrono::steady_clock::now();
  ChainOutput out;
  Rng rng(config.seed);
  const int dim = model.dim();

  std::optional<PhaseState> state;
  std::string init_error;
  for (int attempt = 0; attempt < 100 && !state; ++attempt) {
    Vector q(dim);
    for (int i = 0; i < dim; ++i)
      q(i) = rng.uniform(config.init_lo, config.init_hi);
    try {
      state = make_phase_state(config.metric, model, q, Vector::Zero(dim));
    } catch (const DivergenceError& e) {
      init_error = e.what();
    }
  }
  long fp_iters = 0;
  long fp_steps = 0;
  auto finish = [&] {
    if (fp_steps > 0)
      out.mean_fixed_point_iters = static_cast<double>(fp_iters) / static_cast<double>(fp_steps);
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
    return out;
  };
  if (!state) {
    out.status = ChainStatus::Failed;
    out.failure_message = "could not initialize the chain: " + init_error;
    out.samples.resize(0, dim);
    return finish();
  }

  IntegratorConfig integrator = config.integrator;
  DualAveragingState da = DualAveragingState::start(integrator.epsilon, config.target_accept);

  out.warmup_epsilon.reserve(static_cast<std::size_t>(config.n_warmup));
  for (int it = 0; it < config.n_warmup; ++it) {
    out.warmup_epsilon.push_back(integrator.epsilon);
    const TransitionResult t = hmc_transition(*state, model, config.metric, integrator, rng);
    fp_iters += t.fixed_point_iters;
    fp_steps += t.steps;
    if (t.divergent)
      ++out.n_warmup_divergent;
    if (config.adapt) {
      da = dual_avg_update(da, t.accept_prob);
      integrator.epsilon = da.epsilon();
    }
  }
  if (config.adapt && config.n_warmup > 0)
    integrator.epsilon = da.averaged_epsilon();
  out.epsilon_final = integrator.epsilon;

  if (config.n_warmup > 0 && out.n_warmup_divergent >= 0.99 * config.n_warmup) {
    out.status = ChainStatus::Failed;
    out.failure_message = "warm-up diverged in " + std::to_string(out.n_warmup_divergent) + " of " +
                          std::to_string(config.n_warmup) + " transitions";
    out.samples.resize(0, dim);
    return finish();
  }

  out.samples.resize(config.n_samples, dim);
  out.accepted.reserve(static_cast<std::size_t>(config.n_samples));
  out.delta_H.reserve(static_cast<std::size_t>(config.n_samples));
  long n_accepted = 0;
  double prob_sum = 0.0;
  for (int it = 0; it < config.n_samples; ++it) {
    const TransitionResult t = hmc_transition(*state, model, config.metric, integrator, rng);
    out.samples.row(it) = state->q.transpose();
    out.accepted.push_back(t.accepted ? 1 : 0);
    out.delta_H.push_back(t.delta_H);
    n_accepted += t.accepted ? 1 : 0;
    prob_sum += t.accept_prob;
    fp_iters += t.fixed_point_iters;
    fp_steps += t.steps;
    if (t.divergent)
      ++out.n_divergent;
  }
  if (config.n_samples > 0) {
    out.accept_rate = static_cast<double>(n_accepted) / config.n_samples;
    out.mean_accept_prob = prob_sum / config.n_samples;
  }
  return finish();
}

ChainOutput run_chain(const ChainConfig& config) {
  const auto model = make_target(config.target, config.target_param);
  return run_chain(*model, config);
}

std::vector<ChainOutput> run_chains(const std::vector<ChainConfig>& configs) {
  std::vector<ChainOutput> outputs(configs.size());
  std::vector<std::exception_ptr> errors(configs.size());
  const auto count = static_cast<long>(configs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < count; ++i) {
    try {
      outputs[static_cast<std::size_t>(i)] = run_chain(configs[static_cast<std::size_t>(i)]);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e)
      std::rethrow_exception(e);
  return outputs;
}

} // namespace softabs
