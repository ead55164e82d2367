#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "lcca/basis.hpp"
#include "lcca/dataset.hpp"

namespace lcca {

/// Longitudinal PCA model: orthonormal loadings over the stacked
/// (basis x coordinate) space, the retained eigenvalues, and the scalar noise
/// variance used for BLUP scoring.
struct LpcaModel {
  BasisSpec basis;
  int p = 0;                            // observed dimension
  Eigen::MatrixXd loadings;             // (R p) x N, orthonormal columns
  Eigen::VectorXd eigenvalues;          // N, strictly positive, nonincreasing
  double noise_variance = 0.0;          // sigma^2 >= 0
  Eigen::VectorXd variance_explained;   // cumulative fractions, length N

  int dimension() const { return static_cast<int>(eigenvalues.size()); }

  /// p x N matrix sum_r b_r(t) Phi^(r): maps latent scores to the observed
  /// space at time t.
  Eigen::MatrixXd loading_at_time(double t) const;
};

/// Per-subject latent scores, rows aligned with the dataset's subjects.
struct ScoreMatrix {
  Eigen::MatrixXd values;  // n x N
  std::vector<std::string> subject_ids;
};

/// Smallest count of leading eigenvalues whose cumulative share of the total
/// reaches the threshold. Eigenvalues must be nonnegative and nonincreasing.
int select_count_by_variance(const Eigen::VectorXd& eigenvalues, double threshold);

/// Flips each column so its largest-magnitude entry is positive.
void fix_sign_convention(Eigen::MatrixXd& columns);

/// Full symmetric eigendecomposition of sigma with negative eigenvalues
/// clipped to zero, dimension chosen by the variance threshold, and the sign
/// convention applied. Throws NumericalError when no eigenvalue is positive.
LpcaModel eigendecompose_select(const Eigen::MatrixXd& sigma, double threshold,
                                const BasisSpec& basis, double noise_variance = 0.0);

/// BLUP eigenscores: per subject, the mixed-model posterior mean
/// (B'B/s2 + Lambda^-1)^-1 B'x / s2, with the pseudo-inverse least-squares
/// limit when s2 = 0. Subjects are independent, so the loop is parallel.
ScoreMatrix blup_scores(const LpcaModel& model, const CenteredDataset& ds);

/// Predicted centered trajectory value for one subject at time t.
Eigen::VectorXd reconstruct(const LpcaModel& model, const ScoreMatrix& scores,
                            int subject_index, double t);

}  // namespace lcca
