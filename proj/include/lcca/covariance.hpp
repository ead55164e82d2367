#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "lcca/basis.hpp"
#include "lcca/dataset.hpp"

namespace lcca {

/// Method-of-moments OLS estimate of the random-effect covariance blocks.
/// blocks[r * R + s] holds the p x p estimate of E(Z_r Z_s'); error_block the
/// p x p residual covariance attached to same-visit pairs. gram is the
/// (R^2+1)-dimensional Gram of the pair regressors, pair_count = sum_i J_i^2.
struct CovarianceEstimate {
  BasisSpec basis;
  int p = 0;
  std::vector<Eigen::MatrixXd> blocks;
  Eigen::MatrixXd error_block;
  Eigen::MatrixXd gram;
  long pair_count = 0;

  int basis_count() const { return basis.size(); }
  const Eigen::MatrixXd& block(int r, int s) const {
    return blocks[static_cast<std::size_t>(r) * basis.size() + s];
  }
};

/// OLS covariance estimation over all ordered visit pairs (j1, j2) of every
/// subject, both orders and the diagonal included. The regressor for block
/// (r, s) is b_r(t_{j1}) b_s(t_{j2}); same-visit pairs carry an extra
/// indicator regressor for the error block. The p^2 x J response matrix is
/// never materialized: per-subject sufficient statistics are accumulated and
/// the (R^2+1)-dimensional normal equations solved at the end.
///
/// This kernel partitions subjects into fixed-size blocks, accumulates block
/// partials in parallel, and combines them in block order, so the result is
/// bit-identical for any thread count.
CovarianceEstimate estimate_covariance(const CenteredDataset& ds, const BasisSpec& basis);

/// Reference implementation: streams subjects in dataset order and visit
/// pairs in lexicographic (j1, j2) order, accumulating one outer product per
/// pair. Slow; kept for equivalence testing and benchmarking.
CovarianceEstimate estimate_covariance_serial(const CenteredDataset& ds, const BasisSpec& basis);

/// Places the blocks into an Rp x Rp matrix, averages transposed off-diagonal
/// pairs, symmetrizes diagonal blocks, and reduces the error block to the
/// scalar noise variance max(0, trace / p).
std::pair<Eigen::MatrixXd, double> assemble_and_symmetrize(const CovarianceEstimate& est);

}  // namespace lcca
