#pragma once

#include "softabs/diagnostics.hpp"
#include "softabs/integrate.hpp"
#include "softabs/sampler.hpp"

#include "json.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace softabs::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitChainFailure = 3;

inline constexpr const char* kSummarySchemaVersion = "softabs.summary/1";
inline constexpr const char* kOutputDirEnv = "SOFTABS_OUTPUT_DIR";

/// Everything needed to reproduce one run.
struct RunSpec {
  std::string label;
  std::string target = "funnel";
  int n = 10;
  MetricFamily metric = MetricFamily::SoftAbs;
  double alpha = 1e6;
  std::optional<double> epsilon; ///< fixed step size; exclusive with adapt
  bool adapt = false;
  double init_epsilon = 0.1;     ///< starting point for adaptation
  double target_accept = 0.65;
  std::optional<int> steps;
  std::optional<double> integration_time;
  int warmup = 1000;
  int samples = 1000;
  std::uint64_t seed = 0;
  double fp_threshold = 1e-12;
  int fp_max_iters = 100;

  /// Throws ConfigError on inconsistent settings (fixed eps together with adapt, ...).
  void validate() const;
  /// Step size the run starts from: the fixed eps, or init_epsilon when adapting.
  double starting_epsilon() const;
  /// L as given, else ceil(T / starting_epsilon()) with T = integration_time
  /// or the family default (8 for Euclidean, 25 otherwise).
  int resolved_steps() const;
  ChainConfig to_chain_config() const;
  nlohmann::json to_json() const;
};

/// Applies key=value settings (flag names without the leading dashes, e.g.
/// "target-accept=0.95"). Throws ConfigError on unknown keys or bad values.
void apply_setting(RunSpec& spec, const std::string& key, const std::string& value);
/// Parses a whitespace- or comma-separated list of key=value tokens on top of base.
RunSpec parse_spec_line(const std::string& line, const RunSpec& base = {});
/// Reads one spec per non-empty, non-comment line.
std::vector<RunSpec> read_spec_file(const std::string& path, const RunSpec& base = {});

/// Applies a flat key=value file (same keys as apply_setting; '#' starts a comment).
void apply_config_file(RunSpec& spec, const std::string& path);

/// Coordinate names: x_1..x_n, v for the funnel; q_0.. otherwise.
std::vector<std::string> coordinate_names(const std::string& target, int dim);

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

/// Header iter,q_0,...,q_{N-1},accept,delta_H; reals printed with 17 significant digits.
void write_samples_csv(std::ostream& os, const ChainOutput& chain, int dim);

struct SamplesTable {
  Matrix samples;
  std::vector<unsigned char> accepted;
  std::vector<double> delta_H;
};
/// Inverse of write_samples_csv. Throws ConfigError on malformed input.
SamplesTable read_samples_csv(std::istream& is);

/// Header step,q_0..,p_0..,H.
void write_trajectory_csv(std::ostream& os, const std::vector<TrajectoryPoint>& log, int dim);

nlohmann::json summary_json(const RunSpec& spec, const ChainOutput& chain);

struct BenchmarkRow {
  std::string label;
  std::string algorithm;
  int warmup = 0;
  int samples = 0;
  double epsilon = 0.0;
  double accept_rate = 0.0;
  double seconds = 0.0; ///< chain wall time
  double ess = 0.0;
  double ess_per_second = 0.0;
  double ess_per_sample = 0.0;
  double v_mean = 0.0;
  double v_var = 0.0;
  int n_divergent = 0;
  std::string status;
};

BenchmarkRow benchmark_row(const RunSpec& spec, const ChainOutput& chain);
void write_benchmark_csv(std::ostream& os, const std::vector<BenchmarkRow>& rows);
nlohmann::json benchmark_json(const std::vector<RunSpec>& specs, const std::vector<BenchmarkRow>& rows);

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

struct SampleFiles {
  std::string samples_csv;
  std::string summary_json;
};

/// Runs the chain and writes both files. Returns kExitOk or kExitChainFailure.
int cmd_sample(const RunSpec& spec, const SampleFiles& files);

struct TrajectoryRequest {
  RunSpec spec;
  std::optional<Vector> init_q; ///< default: U(-1, 1) from the seed
  std::optional<Vector> init_p; ///< default: drawn from the metric at init_q
  std::string output_csv;
};

/// Integrates one trajectory with the fixed step size and writes its log.
int cmd_trajectory(const TrajectoryRequest& request);

/// Runs every spec (in parallel when threads are available) and writes the
/// comparison table as CSV and JSON, rows in spec order.
int cmd_benchmark(const std::vector<RunSpec>& specs, const std::string& csv_path, const std::string& json_path);

/// Entry point used by the softabs executable.
int run_cli(int argc, char** argv);

} // namespace softabs::cli
