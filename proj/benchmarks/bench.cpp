// Compares the parallel kernels with their serial reference implementations
// on a synthetic dataset shaped like the default simulation setting.

#include <chrono>
#include <cstdio>
#include <string>

#include "lcca/covariance.hpp"
#include "lcca/dataset.hpp"
#include "lcca/lpca.hpp"
#include "lcca/naive.hpp"
#include "lcca/parallel.hpp"
#include "lcca/rng.hpp"
#include "lcca/simulator.hpp"

using namespace lcca;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

template <class Fn>
double time_once(Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  fn();
  return seconds_since(start);
}

}  // namespace

int main(int argc, char** argv) {
  int n = argc > 1 ? std::stoi(argv[1]) : 400;
  int p = argc > 2 ? std::stoi(argv[2]) : 144;

  SimConfig config;
  config.setting = 1;
  config.n = n;
  config.p = p;
  config.q = p;
  config.r = 0.5;
  config.seed = 7;

  const LoadingSet loadings = study_loadings(config);
  Rng rng = derive_stream(config.seed, 0);
  const auto times = gen_visit_times(config.n, rng);
  const GroundTruth truth = gen_ground_truth(config, loadings, rng);
  const LongitudinalDataset raw =
      synthesize(loadings.x, truth.scores_x, times, config.noise_sd, "x", rng);
  const auto [centered, mean] = center(raw, BasisSpec::linear());

  std::printf("n = %d subjects, p = %d variables, %d thread(s)\n", config.n, p,
              max_threads());

  const double t_cov_serial = time_once(
      [&] { (void)estimate_covariance_serial(centered, BasisSpec::linear()); });
  const double t_cov = time_once([&] { (void)estimate_covariance(centered, BasisSpec::linear()); });
  std::printf("covariance   serial reference %8.3fs   parallel kernel %8.3fs   (%.1fx)\n",
              t_cov_serial, t_cov, t_cov_serial / t_cov);

  const auto est = estimate_covariance(centered, BasisSpec::linear());
  const auto [sigma, noise] = assemble_and_symmetrize(est);
  const auto model = eigendecompose_select(sigma, 0.9, BasisSpec::linear(), noise);

  ScoreMatrix scores;
  const double t_blup = time_once([&] { scores = blup_scores(model, centered); });
  std::printf("blup scores  parallel kernel  %8.3fs (N = %d)\n", t_blup, model.dimension());

  const double t_ols = time_once([&] { (void)subject_ols_effects(centered); });
  std::printf("subject ols  parallel kernel  %8.3fs\n", t_ols);

  config.reps = 4;
  config.n = std::min(config.n, 100);
  SimReport report;
  const double t_study = time_once([&] { report = run_study(config); });
  std::printf("study        %d replicates at n = %d: %8.3fs (lcca mean d %.2f)\n",
              config.reps, config.n, t_study, report.lcca.mean_selected);
  return 0;
}
