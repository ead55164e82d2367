#pragma once

#include <Eigen/Core>

#include "lcca/cca.hpp"
#include "lcca/dataset.hpp"

namespace lcca {

/// Baseline feature extraction: per-subject, per-variable simple linear
/// regression on time. Row i is (intercept_1..p, slope_1..p). Every subject
/// needs at least two distinct visit times; offenders are listed in the error.
Eigen::MatrixXd subject_ols_effects(const CenteredDataset& ds);

/// Classical CCA on stacked per-subject effects, with a PCA pre-reduction at
/// the given variance threshold whenever either stacked dimension reaches the
/// sample count (raw CCA would be singular there).
struct NaiveResult {
  CcaModel cca;
  WilksReport wilks;
  bool pca_reduced = false;
  Eigen::MatrixXd pca_loadings_x;  // 2p x k when reduced, empty otherwise
  Eigen::MatrixXd pca_loadings_y;

  /// Canonical weight vector mapped back to the stacked 2p (or 2q) space.
  Eigen::VectorXd stacked_vector(int pair, bool x_side) const;
};

NaiveResult naive_cca_pipeline(const Eigen::MatrixXd& x_effects,
                               const Eigen::MatrixXd& y_effects, double threshold,
                               double alpha, double ridge = 1e-8);

}  // namespace lcca
