#include "lcca/cca.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/fisher_f.hpp>
#include <cmath>
#include <iostream>
#include <limits>

#include "lcca/errors.hpp"

namespace lcca {

namespace {

Eigen::MatrixXd column_centered(const Eigen::MatrixXd& m) {
  return m.rowwise() - m.colwise().mean();
}

// Symmetric inverse square root, with a relative ridge added beforehand.
// Throws when the (ridged) matrix is numerically singular.
Eigen::MatrixXd inverse_sqrt(const Eigen::MatrixXd& cov, double ridge, const char* name) {
  const Eigen::Index dim = cov.rows();
  Eigen::MatrixXd work = cov;
  if (ridge > 0.0)
    work += (ridge * cov.trace() / dim) * Eigen::MatrixXd::Identity(dim, dim);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(work);
  if (eig.info() != Eigen::Success)
    throw NumericalError(std::string("whitening of ") + name + " failed to converge");
  const double top = eig.eigenvalues().maxCoeff();
  if (!(top > 0.0) ||
      eig.eigenvalues().minCoeff() <= top * std::numeric_limits<double>::epsilon() * dim)
    throw NumericalError(std::string(name) +
                         " is singular; pass a positive ridge to regularize");
  return eig.eigenvectors() *
         eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
         eig.eigenvectors().transpose();
}

double column_sd(const Eigen::VectorXd& centered_column) {
  return std::sqrt(centered_column.squaredNorm() / (centered_column.size() - 1));
}

}  // namespace

CcaModel fit_latent_cca(const Eigen::MatrixXd& scores_x, const Eigen::MatrixXd& scores_y,
                        double ridge) {
  const Eigen::Index n = scores_x.rows();
  if (scores_y.rows() != n)
    throw ValidationError("score matrices must have the same number of subjects");
  if (n <= 1) throw NumericalError("CCA needs at least two subjects");
  if (ridge < 0.0) throw ValidationError("ridge must be nonnegative");
  const Eigen::Index n_x = scores_x.cols();
  const Eigen::Index n_y = scores_y.cols();
  if (n <= std::max(n_x, n_y))
    std::cerr << "warning: CCA with n = " << n << " subjects and " << std::max(n_x, n_y)
              << " latent dimensions is ill-determined\n";

  const Eigen::MatrixXd xc = column_centered(scores_x);
  const Eigen::MatrixXd yc = column_centered(scores_y);
  const double denom = static_cast<double>(n - 1);
  const Eigen::MatrixXd s_xx = xc.transpose() * xc / denom;
  const Eigen::MatrixXd s_yy = yc.transpose() * yc / denom;
  const Eigen::MatrixXd s_xy = xc.transpose() * yc / denom;

  const Eigen::MatrixXd wx = inverse_sqrt(s_xx, ridge, "S_XX");
  const Eigen::MatrixXd wy = inverse_sqrt(s_yy, ridge, "S_YY");

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(wx * s_xy * wy,
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  const int m = static_cast<int>(std::min(n_x, n_y));

  CcaModel model;
  model.ridge = ridge;
  model.correlations = svd.singularValues().head(m).cwiseMin(1.0).cwiseMax(0.0);
  model.weights_x = wx * svd.matrixU().leftCols(m);
  model.weights_y = wy * svd.matrixV().leftCols(m);
  model.variates_x = xc * model.weights_x;
  model.variates_y = yc * model.weights_y;

  for (int c = 0; c < m; ++c) {
    // Unit sample variance of each variate column.
    const double sd_x = column_sd(model.variates_x.col(c));
    const double sd_y = column_sd(model.variates_y.col(c));
    if (sd_x > 0.0) {
      model.weights_x.col(c) /= sd_x;
      model.variates_x.col(c) /= sd_x;
    }
    if (sd_y > 0.0) {
      model.weights_y.col(c) /= sd_y;
      model.variates_y.col(c) /= sd_y;
    }
    // Sign: first nonzero x-weight entry positive, paired correlation >= 0.
    const double scale = model.weights_x.col(c).cwiseAbs().maxCoeff();
    for (Eigen::Index k = 0; k < n_x; ++k) {
      const double v = model.weights_x(k, c);
      if (std::abs(v) > 1e-12 * scale) {
        if (v < 0.0) {
          model.weights_x.col(c) = -model.weights_x.col(c);
          model.variates_x.col(c) = -model.variates_x.col(c);
        }
        break;
      }
    }
    if (model.variates_x.col(c).dot(model.variates_y.col(c)) < 0.0) {
      model.weights_y.col(c) = -model.weights_y.col(c);
      model.variates_y.col(c) = -model.variates_y.col(c);
    }
  }
  return model;
}

CcaModel fit_latent_cca(const ScoreMatrix& scores_x, const ScoreMatrix& scores_y,
                        double ridge) {
  if (scores_x.subject_ids != scores_y.subject_ids)
    throw ValidationError("score matrices are not aligned on the same subjects");
  return fit_latent_cca(scores_x.values, scores_y.values, ridge);
}

WilksReport wilks_sequential(const Eigen::VectorXd& correlations, int n_subjects,
                             int n_x, int n_y, double alpha) {
  if (n_subjects <= 0 || n_x <= 0 || n_y <= 0)
    throw ValidationError("wilks test requires positive n, N_X, N_Y");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must be in (0, 1)");
  const int m_max = static_cast<int>(correlations.size());

  WilksReport report;
  report.alpha = alpha;
  report.selected_d = m_max;
  for (int m = 0; m < m_max; ++m) {
    WilksTest test;
    test.m = m;
    test.lambda = 1.0;
    for (int j = m; j < m_max; ++j) test.lambda *= 1.0 - correlations[j] * correlations[j];
    test.lambda = std::clamp(test.lambda, std::numeric_limits<double>::min(), 1.0);

    test.df1 = static_cast<double>(n_x - m) * (n_y - m);
    const double nu_den = static_cast<double>(n_x - m) * (n_x - m) +
                          static_cast<double>(n_y - m) * (n_y - m) - 5.0;
    const double nu_num = test.df1 * test.df1 - 4.0;
    test.nu = (nu_den <= 0.0 || nu_num <= 0.0) ? 1.0 : std::sqrt(nu_num / nu_den);
    test.df2 = (n_subjects - 1.5 - 0.5 * (n_x + n_y)) * test.nu - 0.5 * test.df1 + 1.0;
    if (test.df2 <= 0.0) {
      const int min_n = static_cast<int>(std::floor(
                            1.5 + 0.5 * (n_x + n_y) + (0.5 * test.df1 - 1.0) / test.nu)) +
                        1;
      throw NumericalError("wilks test at m = " + std::to_string(m) + " has df2 <= 0; need n >= " +
                           std::to_string(min_n) + " subjects");
    }

    const double root = std::pow(test.lambda, 1.0 / test.nu);
    test.f = root > 0.0 ? (test.df2 / test.df1) * (1.0 - root) / root
                        : std::numeric_limits<double>::infinity();
    if (std::isfinite(test.f)) {
      boost::math::fisher_f_distribution<double> dist(test.df1, test.df2);
      test.p_value = boost::math::cdf(boost::math::complement(dist, test.f));
    } else {
      test.p_value = 0.0;
    }
    report.tests.push_back(test);
    if (test.p_value >= alpha) {
      report.selected_d = m;
      break;
    }
  }
  return report;
}

Eigen::VectorXd canonical_vector_at_time(const LpcaModel& model,
                                         const Eigen::VectorXd& weight, double t) {
  if (weight.size() != model.dimension())
    throw ValidationError("weight length " + std::to_string(weight.size()) +
                          " does not match model dimension " +
                          std::to_string(model.dimension()));
  return model.loading_at_time(t) * weight;
}

DisplayTable standardize_for_display(const LpcaModel& model, const Eigen::MatrixXd& weights,
                                     const std::vector<std::string>& variable_names,
                                     const std::vector<double>& time_grid, double zcut) {
  if (time_grid.empty()) throw ValidationError("display time grid must be nonempty");
  if (static_cast<int>(variable_names.size()) != model.p)
    throw ValidationError("variable_names size does not match model dimension");

  DisplayTable table;
  table.variable_names = variable_names;
  table.time_grid = time_grid;
  const int grid = static_cast<int>(time_grid.size());

  for (Eigen::Index pair = 0; pair < weights.cols(); ++pair) {
    Eigen::MatrixXd family(model.p, grid);
    for (int g = 0; g < grid; ++g)
      family.col(g) = canonical_vector_at_time(model, weights.col(pair), time_grid[g]);

    // Standardize by the pooled standard deviation of this pair's family.
    const double count = static_cast<double>(family.size());
    const double mean = family.mean();
    const double sd =
        count > 1 ? std::sqrt((family.array() - mean).square().sum() / (count - 1)) : 0.0;
    if (sd > 0.0) family /= sd;

    for (int v = 0; v < model.p; ++v) {
      if (family.row(v).cwiseAbs().maxCoeff() <= zcut) continue;
      for (int g = 0; g < grid; ++g)
        table.rows.push_back({static_cast<int>(pair), v, time_grid[g], family(v, g)});
    }
  }
  return table;
}

}  // namespace lcca
