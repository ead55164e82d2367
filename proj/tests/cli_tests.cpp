// End-to-end tests of the installed command-line interface: each case writes
// input files, invokes the real binary, and inspects exit codes and outputs.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "lcca/dataset.hpp"
#include "lcca/rng.hpp"
#include "lcca/simulator.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* cli_path() { return LCCA_CLI_PATH; }

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run(const std::string& args) {
  const fs::path log = fs::temp_directory_path() / "lcca_cli_test_out.txt";
  const std::string cmd =
      std::string(cli_path()) + " " + args + " > " + log.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  RunResult result;
  result.exit_code = raw == -1 ? -1 : WEXITSTATUS(raw);
  std::ifstream in(log);
  std::stringstream buffer;
  buffer << in.rdbuf();
  result.output = buffer.str();
  return result;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("lcca_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Small paired setting-1 dataset written as CSV files.
void write_pair(const fs::path& dir, int n, int p, int q, std::uint64_t seed,
                bool single_visit_subject = false) {
  lcca::SimConfig config;
  config.setting = 1;
  config.n = n;
  config.seed = seed;
  config.p = p;
  config.q = q;
  const auto loadings = lcca::study_loadings(config);
  lcca::Rng rng = lcca::derive_stream(config.seed, 0);
  auto times_x = lcca::gen_visit_times(config.n, rng);
  auto times_y = lcca::gen_visit_times(config.n, rng);
  const auto truth = lcca::gen_ground_truth(config, loadings, rng);
  auto ds_x =
      lcca::synthesize(loadings.x, truth.scores_x, times_x, config.noise_sd, "x", rng);
  auto ds_y =
      lcca::synthesize(loadings.y, truth.scores_y, times_y, config.noise_sd, "y", rng);
  if (single_visit_subject) {
    ds_x.visit_times[0].conservativeResize(1);
    ds_x.observations[0].conservativeResize(1, Eigen::NoChange);
  }
  std::ofstream x(dir / "x.csv", std::ios::binary);
  lcca::serialize_long_csv(ds_x, x);
  std::ofstream y(dir / "y.csv", std::ios::binary);
  lcca::serialize_long_csv(ds_y, y);
}

}  // namespace

TEST_CASE("fit: exit 0, schema-valid outputs, deterministic bytes") {
  const fs::path dir = fresh_dir("fit");
  write_pair(dir, 80, 12, 8, 42);
  const std::string data_args =
      "fit --x " + (dir / "x.csv").string() + " --y " + (dir / "y.csv").string();

  const auto first = run(data_args + " --out " + (dir / "out1").string());
  CHECK(first.exit_code == 0);
  for (const char* name :
       {"model.json", "cca.json", "canonical_vectors.csv", "variates.csv"})
    CHECK(fs::exists(dir / "out1" / name));

  const json cca = json::parse(slurp(dir / "out1" / "cca.json"));
  CHECK(cca.at("method") == "lcca");
  CHECK(cca.at("correlations").is_array());
  CHECK(cca.at("tests").is_array());
  const json model = json::parse(slurp(dir / "out1" / "model.json"));
  CHECK(model.at("x").at("basis").at("kind") == "linear");
  CHECK(model.at("y").at("eigenvalues").is_array());

  const auto second = run(data_args + " --out " + (dir / "out2").string());
  CHECK(second.exit_code == 0);
  for (const char* name :
       {"model.json", "cca.json", "canonical_vectors.csv", "variates.csv"})
    CHECK(slurp(dir / "out1" / name) == slurp(dir / "out2" / name));
}

TEST_CASE("fit: missing input file exits 2 without partial outputs") {
  const fs::path dir = fresh_dir("missing");
  write_pair(dir, 20, 4, 4, 7);
  const fs::path out = dir / "out";
  const auto result = run("fit --x " + (dir / "nope.csv").string() + " --y " +
                          (dir / "y.csv").string() + " --out " + out.string());
  CHECK(result.exit_code == 2);
  CHECK(!fs::exists(out / "cca.json"));
  CHECK(!fs::exists(out / "model.json"));
}

TEST_CASE("fit: selected_d >= 1 on a setting-1 pair at n = 400, r = 0.5") {
  const fs::path dir = fresh_dir("fit400");
  lcca::SimConfig config;
  config.setting = 1;
  config.n = 400;
  config.r = 0.5;
  config.seed = 4242;
  const auto loadings = lcca::study_loadings(config);
  lcca::Rng rng = lcca::derive_stream(config.seed, 0);
  auto times_x = lcca::gen_visit_times(config.n, rng);
  auto times_y = lcca::gen_visit_times(config.n, rng);
  const auto truth = lcca::gen_ground_truth(config, loadings, rng);
  {
    std::ofstream x(dir / "x.csv", std::ios::binary);
    lcca::serialize_long_csv(
        lcca::synthesize(loadings.x, truth.scores_x, times_x, config.noise_sd, "x", rng), x);
    std::ofstream y(dir / "y.csv", std::ios::binary);
    lcca::serialize_long_csv(
        lcca::synthesize(loadings.y, truth.scores_y, times_y, config.noise_sd, "y", rng), y);
  }
  const auto result = run("fit --x " + (dir / "x.csv").string() + " --y " +
                          (dir / "y.csv").string() + " --out " + (dir / "out").string());
  CHECK(result.exit_code == 0);
  const json cca = json::parse(slurp(dir / "out" / "cca.json"));
  CHECK(cca.at("selected_d").get<int>() >= 1);
}

TEST_CASE("naive: shared schema, self-pair correlations, single-visit rejection") {
  const fs::path dir = fresh_dir("naive");
  write_pair(dir, 60, 10, 6, 11);

  const auto self = run("naive --x " + (dir / "x.csv").string() + " --y " +
                        (dir / "x.csv").string() + " --out " + (dir / "self").string());
  CHECK(self.exit_code == 0);
  const json report = json::parse(slurp(dir / "self" / "naive.json"));
  CHECK(report.at("method") == "naive");
  for (const auto& r : report.at("correlations"))
    CHECK(r.get<double>() == doctest::Approx(1.0).epsilon(1e-3));

  write_pair(dir, 30, 6, 4, 12, /*single_visit_subject=*/true);
  const auto bad = run("naive --x " + (dir / "x.csv").string() + " --y " +
                       (dir / "y.csv").string() + " --out " + (dir / "bad").string());
  CHECK(bad.exit_code == 2);
  CHECK(bad.output.find("s1") != std::string::npos);
  CHECK(!fs::exists(dir / "bad" / "naive.json"));
}

TEST_CASE("simulate: smoke run, determinism, config file, invalid config") {
  const fs::path dir = fresh_dir("simulate");
  const std::string base = "simulate --setting 1 --n 100 --r 0.1 --reps 5 --seed 1 "
                           "--p 16 --q 8";

  const auto first = run(base + " --out " + (dir / "a").string());
  CHECK(first.exit_code == 0);
  const std::string csv = slurp(dir / "a" / "replicates.csv");
  // 5 replicates x 2 methods + header
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 11);
  CHECK(json::parse(slurp(dir / "a" / "report.json")).at("aggregates").contains("naive"));

  const auto second = run(base + " --out " + (dir / "b").string());
  CHECK(second.exit_code == 0);
  CHECK(slurp(dir / "a" / "replicates.csv") == slurp(dir / "b" / "replicates.csv"));
  CHECK(slurp(dir / "a" / "report.json") == slurp(dir / "b" / "report.json"));

  {
    std::ofstream cfg(dir / "config.json");
    cfg << R"({"setting": 1, "n": 100, "r": 0.1, "reps": 5, "seed": 1, "p": 16, "q": 8})";
  }
  const auto from_file = run("simulate --config " + (dir / "config.json").string() +
                             " --out " + (dir / "c").string());
  CHECK(from_file.exit_code == 0);
  CHECK(slurp(dir / "c" / "replicates.csv") == slurp(dir / "a" / "replicates.csv"));

  {
    std::ofstream cfg(dir / "bad.json");
    cfg << R"({"setting": 9})";
  }
  const auto invalid = run("simulate --config " + (dir / "bad.json").string() +
                           " --out " + (dir / "d").string());
  CHECK(invalid.exit_code == 2);

  const auto unparsable = run("simulate --setting 1 --n 3 --reps 1");
  CHECK(unparsable.exit_code == 2);
}

TEST_CASE("unknown flags exit 2") {
  const auto result = run("fit --bogus 1");
  CHECK(result.exit_code == 2);
}

TEST_CASE("fit accepts a bspline basis") {
  const fs::path dir = fresh_dir("bspline");
  write_pair(dir, 80, 8, 6, 88);
  const auto result = run("fit --x " + (dir / "x.csv").string() + " --y " +
                          (dir / "y.csv").string() +
                          " --basis bspline --degree 2 --knots 3,6 --out " +
                          (dir / "out").string());
  CHECK(result.exit_code == 0);
  const json model = json::parse(slurp(dir / "out" / "model.json"));
  CHECK(model.at("x").at("basis").at("kind") == "bspline");
  CHECK(model.at("x").at("basis").at("degree") == 2);
}

TEST_CASE("numerical failure exits 3 and names the stage") {
  const fs::path dir = fresh_dir("exit3");
  // every visit at one shared time: the centering design cannot be identified
  std::ofstream x(dir / "x.csv");
  x << "subject_id,time,v1\na,1.0,0.5\nb,1.0,0.7\nc,1.0,0.9\n";
  x.close();
  const auto result = run("fit --x " + (dir / "x.csv").string() + " --y " +
                          (dir / "x.csv").string() + " --out " + (dir / "out").string());
  CHECK(result.exit_code == 3);
  CHECK(result.output.find("rank-deficient") != std::string::npos);
  CHECK(!fs::exists(dir / "out" / "cca.json"));
}
