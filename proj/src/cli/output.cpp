#include "softabs/cli.hpp"

#include "softabs/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace softabs::cli {

namespace {

std::string real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ','))
    cells.push_back(cell);
  if (!line.empty() && line.back() == ',')
    cells.emplace_back();
  return cells;
}

double read_real(const std::string& cell) {
  double out = 0.0;
  const char* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, out);
  if (ec != std::errc() || ptr != end)
    throw ConfigError("malformed number in samples CSV: '" + cell + "'");
  return out;
}

nlohmann::json number_or_null(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

int ess_column(const RunSpec& spec, int dim) { return spec.target == "funnel" ? dim - 1 : 0; }

} // namespace

void write_samples_csv(std::ostream& os, const ChainOutput& chain, int dim) {
  os << "iter";
  for (int i = 0; i < dim; ++i)
    os << ",q_" << i;
  os << ",accept,delta_H\n";
  for (Eigen::Index r = 0; r < chain.samples.rows(); ++r) {
    os << r;
    for (int i = 0; i < dim; ++i)
      os << ',' << real(chain.samples(r, i));
    os << ',' << int(chain.accepted[r]) << ',' << real(chain.delta_H[r]) << '\n';
  }
}

SamplesTable read_samples_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line))
    throw ConfigError("samples CSV is empty");
  const auto header = split_csv(line);
  if (header.size() < 3 || header.front() != "iter" || header[header.size() - 2] != "accept" ||
      header.back() != "delta_H")
    throw ConfigError("samples CSV header not recognized");
  const int dim = static_cast<int>(header.size()) - 3;
  std::vector<std::vector<double>> rows;
  SamplesTable table;
  while (std::getline(is, line)) {
    if (line.empty())
      continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size())
      throw ConfigError("samples CSV row has " + std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(header.size()));
    std::vector<double> q(dim);
    for (int i = 0; i < dim; ++i)
      q[i] = read_real(cells[i + 1]);
    rows.push_back(std::move(q));
    const std::string& acc = cells[dim + 1];
    if (acc != "0" && acc != "1")
      throw ConfigError("accept column must be 0 or 1");
    table.accepted.push_back(acc == "1");
    table.delta_H.push_back(read_real(cells[dim + 2]));
  }
  table.samples.resize(static_cast<Eigen::Index>(rows.size()), dim);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (int i = 0; i < dim; ++i)
      table.samples(static_cast<Eigen::Index>(r), i) = rows[r][i];
  return table;
}

void write_trajectory_csv(std::ostream& os, const std::vector<TrajectoryPoint>& log, int dim) {
  os << "step";
  for (int i = 0; i < dim; ++i)
    os << ",q_" << i;
  for (int i = 0; i < dim; ++i)
    os << ",p_" << i;
  os << ",H\n";
  for (const auto& pt : log) {
    os << pt.step;
    for (int i = 0; i < dim; ++i)
      os << ',' << real(pt.q(i));
    for (int i = 0; i < dim; ++i)
      os << ',' << real(pt.p(i));
    os << ',' << real(pt.hamiltonian) << '\n';
  }
}

nlohmann::json summary_json(const RunSpec& spec, const ChainOutput& chain) {
  const int dim = static_cast<int>(chain.samples.cols());
  nlohmann::json j;
  j["schema"] = kSummarySchemaVersion;
  j["status"] = chain.status == ChainStatus::Ok ? "ok" : "failed";
  if (chain.status != ChainStatus::Ok)
    j["failure_message"] = chain.failure_message;
  j["target"] = spec.target;
  j["metric"] = std::string(to_string(spec.metric));
  j["alpha"] = spec.alpha;
  j["seed"] = spec.seed;
  j["epsilon_final"] = number_or_null(chain.epsilon_final);
  j["steps"] = spec.resolved_steps();
  j["n_samples"] = chain.samples.rows();
  j["accept_rate"] = chain.accept_rate;
  j["mean_accept_prob"] = chain.mean_accept_prob;
  j["n_divergent"] = chain.n_divergent;
  j["n_warmup_divergent"] = chain.n_warmup_divergent;
  j["mean_fixed_point_iters"] = chain.mean_fixed_point_iters;

  nlohmann::json ess = nlohmann::json::object();
  const auto names = coordinate_names(spec.target, dim);
  for (int i = 0; i < dim; ++i) {
    const Vector col = chain.samples.col(i);
    double value = std::numeric_limits<double>::quiet_NaN();
    try {
      value = softabs::ess({col.data(), static_cast<std::size_t>(col.size())}).ess;
    } catch (const std::invalid_argument&) {
      // too short or constant: no autocorrelation to speak of
    }
    ess[names[i]] = number_or_null(value);
  }
  j["ess"] = ess;

  if (spec.target == "funnel" && chain.samples.rows() >= 2) {
    const MomentSummary v = summarize(chain.samples, dim - 1, 0.0, 9.0);
    j["v"] = {{"mean", number_or_null(v.mean)},
              {"var", number_or_null(v.variance)},
              {"z", number_or_null(v.z)},
              {"min", chain.samples.col(dim - 1).minCoeff()},
              {"max", chain.samples.col(dim - 1).maxCoeff()}};
  }
  j["elapsed_seconds"] = chain.wall_seconds;
  j["config"] = spec.to_json();
  return j;
}

BenchmarkRow benchmark_row(const RunSpec& spec, const ChainOutput& chain) {
  BenchmarkRow row;
  row.label = spec.label;
  row.algorithm = std::string(to_string(spec.metric));
  row.warmup = spec.warmup;
  row.samples = static_cast<int>(chain.samples.rows());
  row.epsilon = chain.epsilon_final;
  row.accept_rate = chain.accept_rate;
  row.seconds = chain.wall_seconds;
  row.n_divergent = chain.n_divergent;
  row.status = chain.status == ChainStatus::Ok ? "ok" : "failed";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  row.ess = row.ess_per_second = row.ess_per_sample = row.v_mean = row.v_var = nan;
  if (chain.samples.rows() >= 2) {
    const MomentSummary m = summarize(chain.samples, ess_column(spec, static_cast<int>(chain.samples.cols())), 0.0,
                                      spec.target == "funnel" ? 9.0 : 1.0);
    row.ess = m.ess;
    row.ess_per_sample = m.ess / row.samples;
    row.ess_per_second = row.seconds > 0.0 ? m.ess / row.seconds : nan;
    row.v_mean = m.mean;
    row.v_var = m.variance;
  }
  return row;
}

void write_benchmark_csv(std::ostream& os, const std::vector<BenchmarkRow>& rows) {
  os << "label,algorithm,warmup,samples,epsilon,accept_rate,seconds,ess,ess_per_second,ess_per_sample,v_mean,v_var,"
        "n_divergent,status\n";
  for (const auto& r : rows) {
    os << r.label << ',' << r.algorithm << ',' << r.warmup << ',' << r.samples << ',' << real(r.epsilon) << ','
       << real(r.accept_rate) << ',' << real(r.seconds) << ',' << real(r.ess) << ',' << real(r.ess_per_second) << ','
       << real(r.ess_per_sample) << ',' << real(r.v_mean) << ',' << real(r.v_var) << ',' << r.n_divergent << ','
       << r.status << '\n';
  }
}

nlohmann::json benchmark_json(const std::vector<RunSpec>& specs, const std::vector<BenchmarkRow>& rows) {
  nlohmann::json out;
  out["schema"] = "softabs.benchmark/1";
  out["rows"] = nlohmann::json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    out["rows"].push_back({{"label", r.label},
                           {"algorithm", r.algorithm},
                           {"warmup", r.warmup},
                           {"samples", r.samples},
                           {"epsilon", number_or_null(r.epsilon)},
                           {"accept_rate", r.accept_rate},
                           {"seconds", r.seconds},
                           {"ess", number_or_null(r.ess)},
                           {"ess_per_second", number_or_null(r.ess_per_second)},
                           {"ess_per_sample", number_or_null(r.ess_per_sample)},
                           {"v_mean", number_or_null(r.v_mean)},
                           {"v_var", number_or_null(r.v_var)},
                           {"n_divergent", r.n_divergent},
                           {"status", r.status},
                           {"config", specs[i].to_json()}});
  }
  return out;
}

} // namespace softabs::cli
