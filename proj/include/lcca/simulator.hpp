#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lcca/dataset.hpp"
#include "lcca/pipeline.hpp"
#include "lcca/rng.hpp"

namespace lcca {

/// One Monte Carlo study: a generating model (setting 1, 2 or 3), the sample
/// size and target latent correlation, and the fitting options shared by the
/// longitudinal and the naive method.
struct SimConfig {
  int setting = 1;
  int n = 100;
  double r = 0.5;           // latent correlation of the second component pair
  double threshold = 0.9;   // variance-explained threshold
  int reps = 100;
  std::uint64_t seed = 0;
  double noise_sd = 0.18;
  double alpha = 0.05;
  double ridge = 1e-8;
  int p = 144;
  int q = 81;
  // setting 3 only: mixture of MVN(0, scale I) and N(mean 1, I) for the
  // correlated component pair, with the given subgroup proportion.
  double subgroup_proportion = 0.1;
  double subgroup_mean = 8.0;
  double subgroup_scale = 17.2;

  /// Throws ValidationError when out of range.
  void check() const;

  int latent_dim() const { return setting == 1 ? 3 : 5; }
  Eigen::VectorXd spectrum() const;
};

/// Generating loadings for both sets, columns orthonormal in the stacked
/// (intercept, slope) space.
struct LoadingSet {
  Eigen::MatrixXd x;  // 2p x N
  Eigen::MatrixXd y;  // 2q x N
};

struct Subgroup3 {
  double proportion = 0.1;
  double mean = 8.0;
  double scale = 17.2;
};

struct ScoreDraw {
  Eigen::MatrixXd x;        // n x N
  Eigen::MatrixXd y;        // n x N
  std::vector<int> labels;  // setting 3 group labels, empty otherwise
};

struct GroundTruth {
  LoadingSet loadings;
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd scores_x, scores_y;
  std::vector<int> labels;
  int correlated_component = 1;  // 0-based column of the correlated pair
};

/// Visit schedules: J_i = 3 + Poisson(1) visits, first at t = 0, gaps iid
/// U[1, 2]. X and Y schedules come from separate calls, so grids misalign.
std::vector<Eigen::VectorXd> gen_visit_times(int n, Rng& rng);

/// Setting 1: deterministic piecewise-constant components on disjoint index
/// blocks of the stacked space (no randomness consumed). Settings 2-3:
/// Gaussian draws smoothed with a moving average of window p/10 per
/// (intercept, slope) block. Both Gram-Schmidt orthonormalized.
LoadingSet gen_loadings(int setting, int p, int q, int n_components, Rng& rng);

/// Independent N(0, lambda_k) scores except the second component, which is
/// drawn jointly with correlation r for both sets; setting 3 replaces that
/// pair with the two-group mixture and returns labels.
ScoreDraw gen_scores(int n, const Eigen::VectorXd& eigenvalues, double r,
                     const std::optional<Subgroup3>& subgroups, Rng& rng);

/// X_ij = sum_l xi_il (Phi_l^(0) + t_ij Phi_l^(1)) + eps, eps iid
/// N(0, noise_sd^2) per coordinate. Variables named <prefix>1..<prefix>p.
LongitudinalDataset synthesize(const Eigen::MatrixXd& loadings,
                               const Eigen::MatrixXd& scores,
                               const std::vector<Eigen::VectorXd>& times,
                               double noise_sd, const std::string& variable_prefix,
                               Rng& rng);

struct ReplicateMetrics {
  int rep = 0;
  bool lcca_ok = false;
  bool naive_ok = false;
  int lcca_d = 0;
  int naive_d = 0;
  double lcca_r1 = 0.0;
  double naive_r1 = 0.0;
  double lcca_cos_x = 0.0, lcca_cos_y = 0.0;
  double naive_cos_x = 0.0, naive_cos_y = 0.0;
  // setting 3: |corr| between true component-2 scores and first variates
  double lcca_varcor_x = 0.0, lcca_varcor_y = 0.0;
  double naive_varcor_x = 0.0, naive_varcor_y = 0.0;
  std::string lcca_error, naive_error;
};

struct MethodAggregates {
  double mean_selected = 0.0;
  double frac_selected_one = 0.0;  // share of replicates with d = 1
  double mean_r1 = 0.0;
  double bias = 0.0;  // mean_r1 - r
  double sd_r1 = 0.0;
  double mean_cos_x = 0.0, sd_cos_x = 0.0;
  double mean_cos_y = 0.0, sd_cos_y = 0.0;
  double mean_varcor_x = 0.0, mean_varcor_y = 0.0;
  int failures = 0;
};

struct SimReport {
  SimConfig config;
  std::vector<ReplicateMetrics> replicates;
  MethodAggregates lcca;
  MethodAggregates naive;
};

/// Loadings are drawn once per study from a dedicated stream of the base
/// seed, mirroring a fixed generating model across replicates.
LoadingSet study_loadings(const SimConfig& config);

/// Scores for one replicate; consumes the replicate stream after the visit
/// schedules have been drawn.
GroundTruth gen_ground_truth(const SimConfig& config, const LoadingSet& loadings, Rng& rng);

/// Cosine and correlation metrics for one replicate. Null fits (hard
/// failures) are recorded with zero metrics and the ok flag cleared.
ReplicateMetrics evaluate_replicate(const GroundTruth& truth, const LccaFit* lcca_fit,
                                    const NaiveFit* naive_fit);

/// One full replicate: generate with the stream derived from (seed, rep),
/// fit both methods, evaluate.
ReplicateMetrics run_replicate(const SimConfig& config, const LoadingSet& loadings, int rep);

/// Runs all replicates (concurrently when OpenMP is enabled; results are
/// bit-identical to the sequential run) and aggregates in replicate order.
SimReport run_study(const SimConfig& config);

}  // namespace lcca
