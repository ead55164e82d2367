#include "lcca/lpca.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <string>

#include "lcca/errors.hpp"
#include "lcca/parallel.hpp"

namespace lcca {

Eigen::MatrixXd LpcaModel::loading_at_time(double t) const {
  const Eigen::VectorXd b = eval_basis(basis, t);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(p, dimension());
  for (int r = 0; r < basis.size(); ++r)
    out.noalias() += b[r] * loadings.middleRows(static_cast<Eigen::Index>(r) * p, p);
  return out;
}

int select_count_by_variance(const Eigen::VectorXd& eigenvalues, double threshold) {
  const double total = eigenvalues.sum();
  double cum = 0.0;
  for (Eigen::Index k = 0; k < eigenvalues.size(); ++k) {
    cum += eigenvalues[k];
    if (cum >= threshold * total) return static_cast<int>(k) + 1;
  }
  return static_cast<int>(eigenvalues.size());
}

void fix_sign_convention(Eigen::MatrixXd& columns) {
  for (Eigen::Index c = 0; c < columns.cols(); ++c) {
    Eigen::Index at = 0;
    columns.col(c).cwiseAbs().maxCoeff(&at);
    if (columns(at, c) < 0.0) columns.col(c) = -columns.col(c);
  }
}

LpcaModel eigendecompose_select(const Eigen::MatrixXd& sigma, double threshold,
                                const BasisSpec& basis, double noise_variance) {
  if (sigma.rows() != sigma.cols()) throw ValidationError("sigma must be square");
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw ValidationError("variance threshold must be in (0, 1]");
  const int r = basis.size();
  if (sigma.rows() % r != 0)
    throw ValidationError("sigma dimension is not a multiple of the basis count");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
  if (eig.info() != Eigen::Success)
    throw NumericalError("eigendecomposition failed to converge");

  // Eigen returns ascending order; flip and clip to the PSD cone.
  const Eigen::Index dim = sigma.rows();
  Eigen::VectorXd values = eig.eigenvalues().reverse();
  Eigen::MatrixXd vectors = eig.eigenvectors().rowwise().reverse();
  values = values.cwiseMax(0.0);
  if (values[0] <= 0.0)
    throw NumericalError("covariance has no positive eigenvalue (no signal)");

  const int selected = select_count_by_variance(values, threshold);
  const double total = values.sum();

  LpcaModel model;
  model.basis = basis;
  model.p = static_cast<int>(dim) / r;
  model.noise_variance = noise_variance;
  model.eigenvalues = values.head(selected);
  model.loadings = vectors.leftCols(selected);
  fix_sign_convention(model.loadings);
  model.variance_explained.resize(selected);
  double cum = 0.0;
  for (int k = 0; k < selected; ++k) {
    cum += values[k];
    model.variance_explained[k] = cum / total;
  }
  return model;
}

namespace {

// Stacked per-subject design: visit j contributes the p x N row block
// sum_r b_r(t_ij) Phi^(r).
Eigen::MatrixXd subject_design(const LpcaModel& model, const Eigen::VectorXd& times) {
  const int p = model.p;
  const Eigen::Index j_count = times.size();
  Eigen::MatrixXd design(j_count * p, model.dimension());
  for (Eigen::Index j = 0; j < j_count; ++j)
    design.middleRows(j * p, p) = model.loading_at_time(times[j]);
  return design;
}

}  // namespace

ScoreMatrix blup_scores(const LpcaModel& model, const CenteredDataset& ds) {
  const int p = ds.data.p();
  if (p != model.p)
    throw ValidationError("dataset dimension " + std::to_string(p) +
                          " does not match model dimension " + std::to_string(model.p));
  const int n = ds.data.n();
  const int dim = model.dimension();
  const double s2 = model.noise_variance;

  ScoreMatrix scores;
  scores.values.resize(n, dim);
  scores.subject_ids = ds.data.subject_ids;

  parallel_for_index(n, [&](std::ptrdiff_t i) {
    const Eigen::MatrixXd design = subject_design(model, ds.data.visit_times[i]);
    Eigen::VectorXd stacked(design.rows());
    const auto& obs = ds.data.observations[i];
    for (Eigen::Index j = 0; j < obs.rows(); ++j)
      stacked.segment(j * p, p) = obs.row(j).transpose();

    if (s2 > 0.0) {
      Eigen::MatrixXd lhs = design.transpose() * design / s2;
      lhs += model.eigenvalues.cwiseInverse().asDiagonal();
      scores.values.row(i) =
          lhs.ldlt().solve(design.transpose() * stacked / s2).transpose();
    } else {
      // Noise-free limit: minimum-norm least squares.
      scores.values.row(i) =
          design.completeOrthogonalDecomposition().solve(stacked).transpose();
    }
  });
  return scores;
}

Eigen::VectorXd reconstruct(const LpcaModel& model, const ScoreMatrix& scores,
                            int subject_index, double t) {
  if (subject_index < 0 || subject_index >= scores.values.rows())
    throw ValidationError("subject index out of range");
  return model.loading_at_time(t) * scores.values.row(subject_index).transpose();
}

}  // namespace lcca
