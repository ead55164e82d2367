#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "lcca/lpca.hpp"

namespace lcca {

/// Canonical correlations and weights between two latent score sets.
/// Variate columns have unit sample variance; within a set, distinct variates
/// are uncorrelated.
struct CcaModel {
  Eigen::VectorXd correlations;  // M = min(N_X, N_Y), nonincreasing in [0, 1]
  Eigen::MatrixXd weights_x;     // N_X x M
  Eigen::MatrixXd weights_y;     // N_Y x M
  Eigen::MatrixXd variates_x;    // n x M
  Eigen::MatrixXd variates_y;    // n x M
  double ridge = 0.0;            // relative ridge actually applied

  int pair_count() const { return static_cast<int>(correlations.size()); }
};

/// One step of the sequential dimension test.
struct WilksTest {
  int m = 0;
  double lambda = 1.0;  // Wilks statistic
  double nu = 1.0;
  double df1 = 0.0;
  double df2 = 0.0;
  double f = 0.0;
  double p_value = 1.0;
};

struct WilksReport {
  std::vector<WilksTest> tests;
  int selected_d = 0;
  double alpha = 0.05;
};

/// CCA via symmetric whitening: T = Sxx^{-1/2} Sxy Syy^{-1/2}, SVD of T.
/// ridge is relative (each covariance gets ridge * trace/dim * I). Weights are
/// rescaled so variates have unit sample variance; signs fixed so the first
/// nonzero entry of each x-weight is positive and paired variates correlate
/// nonnegatively. Throws NumericalError for singular covariances at ridge 0.
CcaModel fit_latent_cca(const Eigen::MatrixXd& scores_x, const Eigen::MatrixXd& scores_y,
                        double ridge = 1e-8);

/// Overload checking subject alignment of the two score matrices.
CcaModel fit_latent_cca(const ScoreMatrix& scores_x, const ScoreMatrix& scores_y,
                        double ridge = 1e-8);

/// Sequential Wilks test with Rao's F approximation: tests H0 d = m for
/// m = 0, 1, ... and stops at the first acceptance. selected_d is that m, or
/// M when every null is rejected. Throws NumericalError when df2 <= 0.
WilksReport wilks_sequential(const Eigen::VectorXd& correlations, int n_subjects,
                             int n_x, int n_y, double alpha = 0.05);

/// Time-varying canonical loading (sum_r b_r(t) Phi^(r)) u.
Eigen::VectorXd canonical_vector_at_time(const LpcaModel& model,
                                         const Eigen::VectorXd& weight, double t);

struct DisplayRow {
  int pair = 0;           // canonical pair index, 0-based
  int variable = 0;       // variable index into variable_names
  double time = 0.0;
  double value = 0.0;     // standardized loading value
};

struct DisplayTable {
  std::vector<std::string> variable_names;
  std::vector<double> time_grid;
  std::vector<DisplayRow> rows;
};

/// Canonical vectors over a time grid, each pair's family divided by the
/// standard deviation of its pooled entries; only variables whose
/// standardized magnitude exceeds zcut at some grid time are emitted.
DisplayTable standardize_for_display(const LpcaModel& model, const Eigen::MatrixXd& weights,
                                     const std::vector<std::string>& variable_names,
                                     const std::vector<double>& time_grid, double zcut);

}  // namespace lcca
