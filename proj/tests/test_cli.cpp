#include "doctest.h"

#include "softabs/cli.hpp"
#include "softabs/errors.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

using namespace softabs;
using namespace softabs::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("softabs_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "softabs");
  std::vector<char*> argv;
  for (auto& a : args)
    argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

RunSpec quick_spec() {
  RunSpec s = parse_spec_line("metric=diag-softabs adapt target-accept=0.8 steps=10 warmup=20 samples=30 seed=4");
  s.n = 3;
  return s;
}

} // namespace

TEST_CASE("spec parsing") {
  const RunSpec s = parse_spec_line("label=a, metric=euclidean epsilon=0.005 warmup=10 samples=20 seed=7");
  CHECK(s.label == "a");
  CHECK(s.metric == MetricFamily::Euclidean);
  CHECK(*s.epsilon == 0.005);
  CHECK(s.seed == 7u);
  CHECK(s.resolved_steps() == 1600);
  CHECK(RunSpec{}.resolved_steps() == 250);
  RunSpec t;
  t.integration_time = 1.0;
  CHECK(t.resolved_steps() == 10);

  RunSpec bad;
  CHECK_THROWS_AS(apply_setting(bad, "colour", "red"), ConfigError);
  CHECK_THROWS_AS(apply_setting(bad, "n", "ten"), ConfigError);
  CHECK_THROWS_AS(apply_setting(bad, "alpha", "1e6x"), ConfigError);
  CHECK_THROWS_AS(apply_setting(bad, "seed", "-1"), ConfigError);
  CHECK_THROWS_AS(apply_setting(bad, "metric", "flat"), ConfigError);
  CHECK_THROWS_AS(parse_spec_line("epsilon=0.1 adapt").validate(), ConfigError);
  CHECK_THROWS_AS(parse_spec_line("steps=3 integration-time=2").validate(), ConfigError);
  CHECK_THROWS_AS(parse_spec_line("target-accept=1.5").validate(), ConfigError);
  CHECK_NOTHROW(parse_spec_line("adapt=false epsilon=0.1").validate());
}

TEST_CASE("spec and config files") {
  const fs::path dir = scratch_dir("files");
  {
    std::ofstream out(dir / "specs.txt");
    out << "# comment\n\nlabel=one metric=softabs\nlabel=two metric=euclidean epsilon=0.2\n";
    std::ofstream cfg(dir / "run.cfg");
    cfg << "metric = euclidean  # flat\nepsilon=0.3\nlabel=\"cfg\"\n";
  }
  const auto specs = read_spec_file((dir / "specs.txt").string());
  REQUIRE(specs.size() == 2);
  CHECK(specs[1].label == "two");
  CHECK(*specs[1].epsilon == 0.2);
  RunSpec s;
  apply_config_file(s, (dir / "run.cfg").string());
  CHECK(s.metric == MetricFamily::Euclidean);
  CHECK(*s.epsilon == 0.3);
  CHECK(s.label == "cfg");
  CHECK_THROWS_AS(read_spec_file((dir / "missing.txt").string()), ConfigError);
}

TEST_CASE("coordinate names") {
  const auto f = coordinate_names("funnel", 3);
  CHECK(f == std::vector<std::string>{"x_1", "x_2", "v"});
  CHECK(coordinate_names("gaussian", 2) == std::vector<std::string>{"q_0", "q_1"});
}

TEST_CASE("samples CSV round-trips exactly") {
  Rng rng(12);
  ChainOutput chain;
  chain.samples.resize(25, 4);
  for (int i = 0; i < 25; ++i) {
    for (int j = 0; j < 4; ++j)
      chain.samples(i, j) = rng.normal() * std::pow(10.0, rng.uniform(-30.0, 30.0));
    chain.accepted.push_back(rng.uniform() < 0.5);
    chain.delta_H.push_back(rng.normal());
  }
  chain.samples(3, 1) = 5e-324;
  chain.samples(4, 2) = -0.0;
  chain.delta_H[7] = std::numeric_limits<double>::infinity();
  std::stringstream ss;
  write_samples_csv(ss, chain, 4);
  const std::string header = ss.str().substr(0, ss.str().find('\n'));
  CHECK(header == "iter,q_0,q_1,q_2,q_3,accept,delta_H");
  const SamplesTable t = read_samples_csv(ss);
  CHECK(t.samples == chain.samples);
  CHECK(t.accepted == chain.accepted);
  CHECK(t.delta_H == chain.delta_H);

  std::stringstream bad("iter,q_0,accept,delta_H\n0,1.0,1\n");
  CHECK_THROWS_AS(read_samples_csv(bad), ConfigError);
  std::stringstream bad2("iter,q_0,accept,delta_H\n0,abc,1,0\n");
  CHECK_THROWS_AS(read_samples_csv(bad2), ConfigError);
}

TEST_CASE("sample command writes deterministic files") {
  const fs::path dir = scratch_dir("sample");
  const RunSpec spec = quick_spec();
  SampleFiles a{(dir / "a.csv").string(), (dir / "a.json").string()};
  SampleFiles b{(dir / "b.csv").string(), (dir / "b.json").string()};
  CHECK(cmd_sample(spec, a) == kExitOk);
  CHECK(cmd_sample(spec, b) == kExitOk);
  CHECK(slurp(a.samples_csv) == slurp(b.samples_csv));
  auto ja = nlohmann::json::parse(slurp(a.summary_json));
  auto jb = nlohmann::json::parse(slurp(b.summary_json));
  CHECK(ja["schema"] == kSummarySchemaVersion);
  CHECK(ja["ess"].contains("v"));
  CHECK(ja["v"].contains("z"));
  ja.erase("elapsed_seconds");
  jb.erase("elapsed_seconds");
  CHECK(ja == jb);

  std::ifstream in(a.samples_csv);
  const SamplesTable t = read_samples_csv(in);
  CHECK(t.samples.rows() == 30);
  CHECK(t.samples.cols() == 4);
}

TEST_CASE("empty sampling phase writes a header-only CSV") {
  const fs::path dir = scratch_dir("empty");
  RunSpec spec = quick_spec();
  spec.samples = 0;
  SampleFiles f{(dir / "s.csv").string(), (dir / "s.json").string()};
  CHECK(cmd_sample(spec, f) == kExitOk);
  CHECK(slurp(f.samples_csv) == "iter,q_0,q_1,q_2,q_3,accept,delta_H\n");
  const auto j = nlohmann::json::parse(slurp(f.summary_json));
  CHECK(j["n_samples"] == 0);
  CHECK(!j.contains("v"));
}

TEST_CASE("trajectory command") {
  const fs::path dir = scratch_dir("traj");
  SUBCASE("zero steps") {
    TrajectoryRequest r;
    r.spec = parse_spec_line("epsilon=0.1 steps=0 n=2");
    r.output_csv = (dir / "t0.csv").string();
    CHECK(cmd_trajectory(r) == kExitOk);
    std::istringstream in(slurp(r.output_csv));
    std::string line;
    int rows = 0;
    std::getline(in, line);
    CHECK(line == "step,q_0,q_1,q_2,p_0,p_1,p_2,H");
    while (std::getline(in, line))
      ++rows;
    CHECK(rows == 1);
  }
  SUBCASE("constant metric conserves energy") {
    TrajectoryRequest r;
    r.spec = parse_spec_line("target=gaussian n=2 metric=softabs epsilon=0.01 steps=100");
    r.init_q = Vector(2);
    *r.init_q << 0.2, -0.1;
    r.init_p = Vector(2);
    *r.init_p << 0.1, 0.3;
    r.output_csv = (dir / "t1.csv").string();
    CHECK(cmd_trajectory(r) == kExitOk);
    std::istringstream in(slurp(r.output_csv));
    std::string line;
    std::getline(in, line);
    std::vector<double> H;
    while (std::getline(in, line))
      H.push_back(std::stod(line.substr(line.rfind(',') + 1)));
    REQUIRE(H.size() == 101);
    CHECK(std::abs(H.back() - H.front()) <= 1e-6);
  }
  SUBCASE("adapt is rejected") {
    TrajectoryRequest r;
    r.spec = parse_spec_line("adapt");
    r.output_csv = (dir / "t2.csv").string();
    CHECK_THROWS_AS(cmd_trajectory(r), ConfigError);
  }
}

TEST_CASE("benchmark command") {
  const fs::path dir = scratch_dir("bench");
  SUBCASE("empty list") {
    CHECK(cmd_benchmark({}, (dir / "e.csv").string(), (dir / "e.json").string()) == kExitOk);
    const std::string csv = slurp(dir / "e.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1);
    CHECK(nlohmann::json::parse(slurp(dir / "e.json"))["rows"].empty());
  }
  SUBCASE("rows in spec order") {
    RunSpec a = quick_spec();
    a.label = "first";
    RunSpec b = quick_spec();
    b.label = "second";
    b.metric = MetricFamily::Euclidean;
    b.adapt = true;
    CHECK(cmd_benchmark({a, b}, (dir / "b.csv").string(), (dir / "b.json").string()) == kExitOk);
    const auto j = nlohmann::json::parse(slurp(dir / "b.json"));
    REQUIRE(j["rows"].size() == 2);
    CHECK(j["rows"][0]["label"] == "first");
    CHECK(j["rows"][1]["algorithm"] == "euclidean");
  }
}

TEST_CASE("command line exit codes") {
  const fs::path dir = scratch_dir("exit");
  const std::string out = dir.string();
  CHECK(run({"sample", "--bogus"}) == kExitConfigError);
  CHECK(run({"sample", "--epsilon", "0.1", "--adapt", "--out-dir", out}) == kExitConfigError);
  CHECK(run({"sample", "--metric", "nope", "--out-dir", out}) == kExitConfigError);
  CHECK(run({"sample", "--n", "3", "--metric", "diag-softabs", "--adapt", "--steps", "5", "--warmup", "10",
             "--samples", "10", "--label", "ok", "--out-dir", out}) == kExitOk);
  CHECK(fs::exists(dir / "ok_samples.csv"));
  CHECK(fs::exists(dir / "ok_summary.json"));
  CHECK(run({"sample", "--metric", "outer-softabs", "--alpha", "1", "--epsilon", "1e-3", "--steps", "20",
             "--warmup", "20", "--samples", "10", "--seed", "1", "--label", "bad", "--out-dir", out}) ==
        kExitChainFailure);
  CHECK(fs::exists(dir / "bad_summary.json"));
}

TEST_CASE("config file and environment defaults") {
  const fs::path dir = scratch_dir("env");
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "n=2\nmetric=euclidean\nepsilon=0.2\nsteps=5\nwarmup=5\nsamples=7\nlabel=fromcfg\n";
  }
  setenv(kOutputDirEnv, dir.string().c_str(), 1);
  CHECK(run({"sample", "--config", (dir / "run.cfg").string(), "--samples", "9"}) == kExitOk);
  unsetenv(kOutputDirEnv);
  std::ifstream in(dir / "fromcfg_samples.csv");
  REQUIRE(in.good());
  const SamplesTable t = read_samples_csv(in);
  CHECK(t.samples.rows() == 9);
  CHECK(t.samples.cols() == 3);
}
