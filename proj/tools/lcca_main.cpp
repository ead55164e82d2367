#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "lcca/errors.hpp"
#include "lcca/pipeline.hpp"
#include "lcca/serialize.hpp"
#include "lcca/simulator.hpp"

namespace fs = std::filesystem;

namespace {

std::vector<double> parse_list(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::string::size_type start = 0;
  while (start <= text.size()) {
    const auto pos = text.find(',', start);
    const std::string item =
        pos == std::string::npos ? text.substr(start) : text.substr(start, pos - start);
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw lcca::ValidationError(std::string(flag) + ": bad number '" + item + "'");
    }
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

struct FitArgs {
  std::string x_path, y_path, out_dir;
  double threshold = 0.9;
  double alpha = 0.05;
  double ridge = 1e-8;
  std::string basis = "linear";
  std::string knots;
  int degree = 3;
  std::string time_grid = "0,1,2,3,4";
  double zcut = 1.64;
};

void add_fit_options(CLI::App* cmd, FitArgs& args) {
  cmd->add_option("--x", args.x_path, "CSV for the first variable set")->required();
  cmd->add_option("--y", args.y_path, "CSV for the second variable set")->required();
  cmd->add_option("--threshold", args.threshold, "variance-explained threshold");
  cmd->add_option("--alpha", args.alpha, "level of the sequential test");
  cmd->add_option("--ridge", args.ridge, "relative ridge for CCA whitening");
  cmd->add_option("--basis", args.basis, "linear or bspline")
      ->check(CLI::IsMember({"linear", "bspline"}));
  cmd->add_option("--knots", args.knots, "comma-separated interior knots (bspline)");
  cmd->add_option("--degree", args.degree, "bspline degree");
  cmd->add_option("--out", args.out_dir, "output directory")->required();
}

lcca::BasisSpec make_basis(const FitArgs& args, const lcca::LongitudinalDataset& x,
                           const lcca::LongitudinalDataset& y) {
  if (args.basis == "linear") return lcca::BasisSpec::linear();
  // Boundary range spans both datasets so every visit is evaluable.
  const auto range = [](const lcca::LongitudinalDataset& ds) {
    double lo = ds.visit_times.front().minCoeff();
    double hi = ds.visit_times.front().maxCoeff();
    for (const auto& t : ds.visit_times) {
      lo = std::min(lo, t.minCoeff());
      hi = std::max(hi, t.maxCoeff());
    }
    return std::pair{lo, hi};
  };
  const auto [xlo, xhi] = range(x);
  const auto [ylo, yhi] = range(y);
  return lcca::BasisSpec::bspline(args.degree, parse_list(args.knots, "--knots"),
                                  std::min(xlo, ylo), std::max(xhi, yhi));
}

void print_warnings(const lcca::ValidationReport& report, const char* tag) {
  for (const auto& w : report.warnings) std::cerr << "warning (" << tag << "): " << w << '\n';
}

// Buffered output: nothing touches the filesystem until every result exists.
void write_files(const std::string& dir,
                 const std::vector<std::pair<std::string, std::string>>& files) {
  fs::create_directories(dir);
  for (const auto& [name, content] : files) {
    std::ofstream out(fs::path(dir) / name, std::ios::binary);
    if (!out) throw lcca::ValidationError("cannot write " + name + " in " + dir);
    out << content;
  }
}

int run_fit(const FitArgs& args) {
  const auto x = lcca::parse_long_csv_file(args.x_path);
  const auto y = lcca::parse_long_csv_file(args.y_path);
  lcca::FitOptions options;
  options.basis = make_basis(args, x, y);
  options.threshold = args.threshold;
  options.alpha = args.alpha;
  options.ridge = args.ridge;

  const lcca::LccaFit fit = lcca::fit_lcca(x, y, options);
  print_warnings(fit.validation_x, "x");
  print_warnings(fit.validation_y, "y");

  const std::vector<double> grid = parse_list(args.time_grid, "--time-grid");
  const auto table_x = lcca::standardize_for_display(fit.model_x, fit.cca.weights_x,
                                                     x.variable_names, grid, args.zcut);
  const auto table_y = lcca::standardize_for_display(fit.model_y, fit.cca.weights_y,
                                                     y.variable_names, grid, args.zcut);

  lcca::json model_json{{"x", lcca::lpca_to_json(fit.model_x)},
                        {"y", lcca::lpca_to_json(fit.model_y)}};
  write_files(args.out_dir,
              {{"model.json", model_json.dump(2) + "\n"},
               {"cca.json", lcca::cca_report_json(fit.cca, fit.wilks, "lcca").dump(2) + "\n"},
               {"canonical_vectors.csv", lcca::display_tables_csv(table_x, table_y)},
               {"variates.csv", lcca::variates_csv(fit.cca, fit.scores_x.subject_ids)}});

  std::cout << "selected_d " << fit.wilks.selected_d << ", correlations";
  for (Eigen::Index i = 0; i < fit.cca.correlations.size(); ++i)
    std::cout << ' ' << lcca::format_double(fit.cca.correlations[i]);
  std::cout << '\n';
  return 0;
}

int run_naive(const FitArgs& args) {
  const auto x = lcca::parse_long_csv_file(args.x_path);
  const auto y = lcca::parse_long_csv_file(args.y_path);
  lcca::FitOptions options;
  options.basis = make_basis(args, x, y);
  options.threshold = args.threshold;
  options.alpha = args.alpha;
  options.ridge = args.ridge;

  const lcca::NaiveFit fit = lcca::fit_naive(x, y, options);
  print_warnings(fit.validation_x, "x");
  print_warnings(fit.validation_y, "y");
  if (fit.naive.pca_reduced)
    std::cerr << "note: stacked effects were PCA-reduced before CCA\n";

  write_files(args.out_dir,
              {{"naive.json",
                lcca::cca_report_json(fit.naive.cca, fit.naive.wilks, "naive").dump(2) + "\n"}});

  std::cout << "selected_d " << fit.naive.wilks.selected_d << ", correlations";
  for (Eigen::Index i = 0; i < fit.naive.cca.correlations.size(); ++i)
    std::cout << ' ' << lcca::format_double(fit.naive.cca.correlations[i]);
  std::cout << '\n';
  return 0;
}

struct SimArgs {
  std::string config_path, out_dir = ".";
  lcca::SimConfig config;
};

int run_simulate(const SimArgs& args) {
  lcca::SimConfig config = args.config;
  if (!args.config_path.empty()) {
    std::ifstream in(args.config_path);
    if (!in) throw lcca::ValidationError("cannot open config: " + args.config_path);
    lcca::json j;
    try {
      in >> j;
    } catch (const std::exception& e) {
      throw lcca::ValidationError(std::string("bad config JSON: ") + e.what());
    }
    config = lcca::sim_config_from_json(j);
  } else {
    config.check();
  }

  const lcca::SimReport report = lcca::run_study(config);
  write_files(args.out_dir,
              {{"report.json", lcca::sim_report_to_json(report).dump(2) + "\n"},
               {"replicates.csv", lcca::replicates_csv(report)}});

  const auto line = [](const char* name, const lcca::MethodAggregates& agg) {
    std::printf("%-6s %8.3f %8.3f %+9.4f %10.4f %10.4f %9d\n", name, agg.mean_selected,
                agg.frac_selected_one, agg.bias, agg.mean_cos_x, agg.mean_cos_y,
                agg.failures);
  };
  std::printf("%-6s %8s %8s %9s %10s %10s %9s\n", "method", "mean_d", "frac_d1", "bias",
              "mean|cos|x", "mean|cos|y", "failures");
  line("lcca", report.lcca);
  line("naive", report.naive);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Longitudinal canonical correlation analysis"};
  app.require_subcommand(1);

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "fit the longitudinal CCA model");
  add_fit_options(fit_cmd, fit_args);
  fit_cmd->add_option("--time-grid", fit_args.time_grid,
                      "comma-separated times for canonical vector export");
  fit_cmd->add_option("--zcut", fit_args.zcut, "standardized magnitude cutoff");

  FitArgs naive_args;
  auto* naive_cmd = app.add_subcommand("naive", "fit the intercept/slope baseline");
  add_fit_options(naive_cmd, naive_args);

  SimArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "run a Monte Carlo study");
  sim_cmd->add_option("--config", sim_args.config_path, "JSON config file");
  sim_cmd->add_option("--setting", sim_args.config.setting, "simulation setting (1, 2, 3)");
  sim_cmd->add_option("--n", sim_args.config.n, "subjects per replicate");
  sim_cmd->add_option("--r", sim_args.config.r, "target latent correlation");
  sim_cmd->add_option("--threshold", sim_args.config.threshold, "variance threshold");
  sim_cmd->add_option("--reps", sim_args.config.reps, "replicate count");
  sim_cmd->add_option("--seed", sim_args.config.seed, "base RNG seed");
  sim_cmd->add_option("--noise-sd", sim_args.config.noise_sd, "observation noise sd");
  sim_cmd->add_option("--alpha", sim_args.config.alpha, "test level");
  sim_cmd->add_option("--p", sim_args.config.p, "first set dimension");
  sim_cmd->add_option("--q", sim_args.config.q, "second set dimension");
  sim_cmd->add_option("--subgroup-proportion", sim_args.config.subgroup_proportion,
                      "setting 3 subgroup proportion");
  sim_cmd->add_option("--subgroup-mean", sim_args.config.subgroup_mean,
                      "setting 3 subgroup mean");
  sim_cmd->add_option("--subgroup-scale", sim_args.config.subgroup_scale,
                      "setting 3 main group scale");
  sim_cmd->add_option("--out", sim_args.out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (fit_cmd->parsed()) return run_fit(fit_args);
    if (naive_cmd->parsed()) return run_naive(naive_args);
    return run_simulate(sim_args);
  } catch (const lcca::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const lcca::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const lcca::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
