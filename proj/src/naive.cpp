#include "lcca/naive.hpp"

#include <Eigen/Dense>
#include <string>
#include <utility>

#include "lcca/errors.hpp"
#include "lcca/lpca.hpp"
#include "lcca/parallel.hpp"

namespace lcca {

Eigen::MatrixXd subject_ols_effects(const CenteredDataset& ds) {
  const int n = ds.data.n();
  const int p = ds.data.p();

  std::string offenders;
  for (int i = 0; i < n; ++i) {
    const auto& times = ds.data.visit_times[i];
    const bool ok = times.size() >= 2 && times.minCoeff() < times.maxCoeff();
    if (!ok) {
      if (!offenders.empty()) offenders += ", ";
      offenders += ds.data.subject_ids[i];
    }
  }
  if (!offenders.empty())
    throw ValidationError(
        "per-subject regression needs at least two distinct visit times; offending "
        "subjects: " +
        offenders);

  Eigen::MatrixXd effects(n, 2 * p);
  parallel_for_index(n, [&](std::ptrdiff_t i) {
    const auto& times = ds.data.visit_times[i];
    const auto& obs = ds.data.observations[i];
    const double t_mean = times.mean();
    const Eigen::VectorXd t_dev = times.array() - t_mean;
    const double denom = t_dev.squaredNorm();
    for (int v = 0; v < p; ++v) {
      const double v_mean = obs.col(v).mean();
      const double slope = t_dev.dot(obs.col(v)) / denom;
      effects(i, v) = v_mean - slope * t_mean;
      effects(i, p + v) = slope;
    }
  });
  return effects;
}

namespace {

// PCA at the variance-explained threshold: returns (scores, loadings).
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> pca_reduce(const Eigen::MatrixXd& data,
                                                       double threshold) {
  const Eigen::MatrixXd centered = data.rowwise() - data.colwise().mean();
  const Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(data.rows() - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success)
    throw NumericalError("PCA pre-reduction failed to converge");
  Eigen::VectorXd values = eig.eigenvalues().reverse().cwiseMax(0.0);
  Eigen::MatrixXd vectors = eig.eigenvectors().rowwise().reverse();
  if (values[0] <= 0.0) throw NumericalError("PCA pre-reduction found no variance");
  const int keep = select_count_by_variance(values, threshold);
  Eigen::MatrixXd loadings = vectors.leftCols(keep);
  fix_sign_convention(loadings);
  return {centered * loadings, std::move(loadings)};
}

}  // namespace

NaiveResult naive_cca_pipeline(const Eigen::MatrixXd& x_effects,
                               const Eigen::MatrixXd& y_effects, double threshold,
                               double alpha, double ridge) {
  const Eigen::Index n = x_effects.rows();
  if (y_effects.rows() != n)
    throw ValidationError("effect matrices must have the same number of subjects");

  NaiveResult result;
  Eigen::MatrixXd x_in = x_effects;
  Eigen::MatrixXd y_in = y_effects;
  // Raw CCA is singular once either stacked dimension reaches n.
  if (x_effects.cols() >= n || y_effects.cols() >= n) {
    result.pca_reduced = true;
    std::tie(x_in, result.pca_loadings_x) = pca_reduce(x_effects, threshold);
    std::tie(y_in, result.pca_loadings_y) = pca_reduce(y_effects, threshold);
  }
  result.cca = fit_latent_cca(x_in, y_in, ridge);
  result.wilks = wilks_sequential(result.cca.correlations, static_cast<int>(n),
                                  static_cast<int>(x_in.cols()),
                                  static_cast<int>(y_in.cols()), alpha);
  return result;
}

Eigen::VectorXd NaiveResult::stacked_vector(int pair, bool x_side) const {
  const Eigen::MatrixXd& weights = x_side ? cca.weights_x : cca.weights_y;
  if (pair < 0 || pair >= weights.cols()) throw ValidationError("pair index out of range");
  if (!pca_reduced) return weights.col(pair);
  const Eigen::MatrixXd& loadings = x_side ? pca_loadings_x : pca_loadings_y;
  return loadings * weights.col(pair);
}

}  // namespace lcca
