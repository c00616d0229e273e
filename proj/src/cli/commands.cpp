#include "softabs/cli.hpp"

#include "softabs/errors.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace softabs::cli {

namespace {

namespace fs = std::filesystem;

std::ofstream open_output(const std::string& path) {
  const fs::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw ConfigError("cannot write " + path);
  return out;
}

std::string default_output_dir() {
  const char* env = std::getenv(kOutputDirEnv);
  return env && *env ? std::string(env) : std::string(".");
}

std::string output_path(const std::string& dir, const std::string& stem, const std::string& suffix) {
  return (fs::path(dir) / (stem + suffix)).string();
}

Vector parse_vector(const std::string& text, int dim, const std::string& what) {
  std::string cleaned = text;
  for (char& c : cleaned)
    if (c == ',')
      c = ' ';
  std::istringstream in(cleaned);
  std::vector<double> values;
  std::string token;
  while (in >> token) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size())
      throw ConfigError("bad number in " + what + ": '" + token + "'");
    values.push_back(x);
  }
  if (static_cast<int>(values.size()) != dim)
    throw ConfigError(what + " needs " + std::to_string(dim) + " values, got " + std::to_string(values.size()));
  return Eigen::Map<const Vector>(values.data(), dim);
}

// Keys shared by every run-oriented subcommand; each maps onto apply_setting.
const char* const kValueKeys[] = {"label",         "target", "n",       "metric", "alpha",
                                  "epsilon",       "init-epsilon",      "target-accept",
                                  "steps",         "integration-time",  "warmup", "samples",
                                  "seed",          "fp-threshold",      "fp-max-iters"};

struct RunOptions {
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  CLI::Option* adapt = nullptr;
  std::string config;

  void attach(CLI::App& app) {
    for (const char* key : kValueKeys)
      options[key] = app.add_option(std::string("--") + key, values[key]);
    adapt = app.add_flag("--adapt", "adapt the step size during warm-up");
    app.add_option("--config", config, "flat key=value file with the same keys");
  }

  // Config file first, explicit flags on top.
  RunSpec resolve() const {
    RunSpec spec;
    if (!config.empty())
      apply_config_file(spec, config);
    for (const auto& [key, opt] : options)
      if (opt->count() > 0)
        apply_setting(spec, key, values.at(key));
    if (adapt->count() > 0)
      spec.adapt = true;
    spec.validate();
    return spec;
  }
};

std::string stem_for(const RunSpec& spec) { return spec.label.empty() ? "run" : spec.label; }

} // namespace

int cmd_sample(const RunSpec& spec, const SampleFiles& files) {
  const ChainConfig config = spec.to_chain_config();
  const ChainOutput chain = run_chain(config);
  const int dim = static_cast<int>(chain.samples.cols());
  {
    auto out = open_output(files.samples_csv);
    write_samples_csv(out, chain, dim > 0 ? dim : make_target(spec.target, spec.n)->dim());
  }
  {
    auto out = open_output(files.summary_json);
    out << summary_json(spec, chain).dump(2) << '\n';
  }
  if (chain.status != ChainStatus::Ok) {
    std::cerr << "chain failed: " << chain.failure_message << '\n';
    return kExitChainFailure;
  }
  return kExitOk;
}

int cmd_trajectory(const TrajectoryRequest& request) {
  const RunSpec& spec = request.spec;
  spec.validate();
  if (spec.adapt)
    throw ConfigError("trajectory needs a fixed epsilon, not adapt");
  const ChainConfig config = spec.to_chain_config();
  const auto model = make_target(spec.target, spec.n);
  const int dim = model->dim();
  config.metric.validate(dim);
  Rng rng(spec.seed);
  Vector q(dim);
  if (request.init_q) {
    if (request.init_q->size() != dim)
      throw ConfigError("initial position has the wrong dimension");
    q = *request.init_q;
  } else {
    for (int i = 0; i < dim; ++i)
      q(i) = rng.uniform(config.init_lo, config.init_hi);
  }
  PhaseState start = make_phase_state(config.metric, *model, q, Vector::Zero(dim));
  if (request.init_p) {
    if (request.init_p->size() != dim)
      throw ConfigError("initial momentum has the wrong dimension");
    start.p = *request.init_p;
  } else {
    start.p = start.metric.sample_momentum(rng);
  }
  const TrajectoryResult traj = integrate_trajectory(*model, config.metric, start, config.integrator, true);
  {
    auto out = open_output(request.output_csv);
    write_trajectory_csv(out, traj.log, dim);
  }
  if (traj.divergent) {
    std::cerr << "trajectory diverged after " << traj.steps_taken << " steps: " << traj.divergence_message << '\n';
    return kExitChainFailure;
  }
  return kExitOk;
}

int cmd_benchmark(const std::vector<RunSpec>& specs, const std::string& csv_path, const std::string& json_path) {
  std::vector<ChainConfig> configs;
  for (const auto& spec : specs)
    configs.push_back(spec.to_chain_config());
  const std::vector<ChainOutput> chains = run_chains(configs);
  std::vector<BenchmarkRow> rows;
  bool all_ok = true;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    rows.push_back(benchmark_row(specs[i], chains[i]));
    all_ok = all_ok && chains[i].status == ChainStatus::Ok;
  }
  {
    auto out = open_output(csv_path);
    write_benchmark_csv(out, rows);
  }
  {
    auto out = open_output(json_path);
    out << benchmark_json(specs, rows).dump(2) << '\n';
  }
  return all_ok ? kExitOk : kExitChainFailure;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"RMHMC sampler with the SoftAbs metric"};
  app.require_subcommand(1);

  auto* sample = app.add_subcommand("sample", "run one chain and write samples and a summary");
  RunOptions sample_opts;
  sample_opts.attach(*sample);
  std::string out_dir, samples_csv, summary_path;
  sample->add_option("--out-dir", out_dir, "default output directory (env " + std::string(kOutputDirEnv) + ")");
  sample->add_option("--samples-csv", samples_csv);
  sample->add_option("--summary-json", summary_path);

  auto* trajectory = app.add_subcommand("trajectory", "integrate one trajectory and dump it");
  RunOptions traj_opts;
  traj_opts.attach(*trajectory);
  std::string init_text, momentum_text, traj_out, traj_dir;
  trajectory->add_option("--init", init_text, "initial position, comma separated");
  trajectory->add_option("--momentum", momentum_text, "initial momentum, comma separated");
  trajectory->add_option("--output", traj_out);
  trajectory->add_option("--out-dir", traj_dir);

  auto* bench = app.add_subcommand("benchmark", "run several specs and tabulate them");
  std::vector<std::string> spec_lines;
  std::string spec_file, bench_dir, bench_csv, bench_json;
  bench->add_option("--spec", spec_lines, "key=value list describing one run (repeatable)");
  bench->add_option("--specs", spec_file, "file with one spec per line");
  bench->add_option("--out-dir", bench_dir);
  bench->add_option("--csv", bench_csv);
  bench->add_option("--json", bench_json);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (sample->parsed()) {
      const RunSpec spec = sample_opts.resolve();
      const std::string dir = out_dir.empty() ? default_output_dir() : out_dir;
      SampleFiles files;
      files.samples_csv = samples_csv.empty() ? output_path(dir, stem_for(spec), "_samples.csv") : samples_csv;
      files.summary_json = summary_path.empty() ? output_path(dir, stem_for(spec), "_summary.json") : summary_path;
      return cmd_sample(spec, files);
    }
    if (trajectory->parsed()) {
      TrajectoryRequest request;
      request.spec = traj_opts.resolve();
      const int dim = make_target(request.spec.target, request.spec.n)->dim();
      if (!init_text.empty())
        request.init_q = parse_vector(init_text, dim, "--init");
      if (!momentum_text.empty())
        request.init_p = parse_vector(momentum_text, dim, "--momentum");
      const std::string dir = traj_dir.empty() ? default_output_dir() : traj_dir;
      request.output_csv =
          traj_out.empty() ? output_path(dir, stem_for(request.spec), "_trajectory.csv") : traj_out;
      return cmd_trajectory(request);
    }
    std::vector<RunSpec> specs;
    if (!spec_file.empty())
      specs = read_spec_file(spec_file);
    for (const auto& line : spec_lines)
      specs.push_back(parse_spec_line(line));
    for (const auto& spec : specs)
      spec.validate();
    const std::string dir = bench_dir.empty() ? default_output_dir() : bench_dir;
    return cmd_benchmark(specs, bench_csv.empty() ? output_path(dir, "benchmark", ".csv") : bench_csv,
                         bench_json.empty() ? output_path(dir, "benchmark", ".json") : bench_json);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << '\n';
    return kExitChainFailure;
  }
}

} // namespace softabs::cli
