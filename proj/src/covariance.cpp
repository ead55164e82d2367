#include "lcca/covariance.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <string>
#include <vector>

#include "lcca/errors.hpp"
#include "lcca/parallel.hpp"

namespace lcca {

namespace {

std::string regressor_label(int k, int r) {
  if (k == r * r) return "same-visit indicator";
  return "b" + std::to_string(k / r) + "(t1)*b" + std::to_string(k % r) + "(t2)";
}

// Sufficient statistics of a contiguous subject range. Combining partials is
// plain matrix addition, so any partition reduces to the same sums.
struct Partial {
  Eigen::MatrixXd gram;
  std::vector<Eigen::MatrixXd> moments;  // K accumulators, p x p
  long pair_count = 0;

  Partial(int k, int p)
      : gram(Eigen::MatrixXd::Zero(k, k)),
        moments(k, Eigen::MatrixXd::Zero(p, p)) {}

  void add(const Partial& other) {
    gram += other.gram;
    for (std::size_t k = 0; k < moments.size(); ++k) moments[k] += other.moments[k];
    pair_count += other.pair_count;
  }
};

// Accumulates one subject through the factored identities
//   sum_{j1,j2} b_r(t_{j1}) b_s(t_{j2}) x_{j1} x_{j2}' = w_r w_s',
//   w_r = X' B e_r,
// which avoid touching the J^2 visit pairs individually.
void accumulate_subject(const Eigen::MatrixXd& obs, const Eigen::MatrixXd& bmat,
                        Partial& acc) {
  const int r = static_cast<int>(bmat.cols());
  const int k_delta = r * r;
  const long j_count = bmat.rows();

  const Eigen::MatrixXd c = bmat.transpose() * bmat;           // R x R
  const Eigen::MatrixXd w = obs.transpose() * bmat;            // p x R

  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b) {
      const int k1 = a * r + b;
      for (int a2 = 0; a2 < r; ++a2)
        for (int b2 = 0; b2 < r; ++b2)
          acc.gram(k1, a2 * r + b2) += c(a, a2) * c(b, b2);
      acc.gram(k1, k_delta) += c(a, b);
      acc.gram(k_delta, k1) += c(a, b);
      acc.moments[k1].noalias() += w.col(a) * w.col(b).transpose();
    }
  acc.gram(k_delta, k_delta) += static_cast<double>(j_count);
  acc.moments[k_delta].noalias() += obs.transpose() * obs;
  acc.pair_count += j_count * j_count;
}

CovarianceEstimate finish(const CenteredDataset& ds, const BasisSpec& basis, Partial&& acc) {
  const int r = basis.size();
  const int k_total = r * r + 1;

  if (acc.pair_count <= k_total)
    throw NumericalError("covariance estimation needs more visit pairs: sum J_i^2 = " +
                         std::to_string(acc.pair_count) + " <= " + std::to_string(k_total) +
                         " regressors");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(acc.gram);
  if (qr.rank() < k_total) {
    std::string collinear;
    const auto& perm = qr.colsPermutation().indices();
    for (int k = qr.rank(); k < k_total; ++k) {
      if (!collinear.empty()) collinear += ", ";
      collinear += regressor_label(perm[k], r);
    }
    throw NumericalError(
        "covariance regressor Gram is singular; collinear regressors: " + collinear +
        " (do all subjects share one visit time, or has every subject a single visit?)");
  }

  const Eigen::MatrixXd inv_gram = acc.gram.ldlt().solve(
      Eigen::MatrixXd::Identity(k_total, k_total));

  CovarianceEstimate est;
  est.basis = basis;
  est.p = ds.data.p();
  est.gram = std::move(acc.gram);
  est.pair_count = acc.pair_count;
  est.blocks.assign(static_cast<std::size_t>(r) * r,
                    Eigen::MatrixXd::Zero(est.p, est.p));
  est.error_block = Eigen::MatrixXd::Zero(est.p, est.p);
  for (int k = 0; k < k_total; ++k) {
    Eigen::MatrixXd* target = k < r * r ? &est.blocks[k] : &est.error_block;
    for (int k2 = 0; k2 < k_total; ++k2)
      if (inv_gram(k, k2) != 0.0) target->noalias() += inv_gram(k, k2) * acc.moments[k2];
  }
  return est;
}

void check_inputs(const CenteredDataset& ds) {
  if (ds.data.n() == 0) throw ValidationError("covariance estimation: empty dataset");
  bool any_repeat = false;
  for (const auto& t : ds.data.visit_times) any_repeat |= t.size() >= 2;
  if (!any_repeat)
    throw NumericalError(
        "covariance estimation: every subject has a single visit, so the same-visit "
        "indicator is collinear with the basis products (error block unidentifiable)");
}

}  // namespace

CovarianceEstimate estimate_covariance(const CenteredDataset& ds, const BasisSpec& basis) {
  check_inputs(ds);
  const int n = ds.data.n();
  const int p = ds.data.p();
  const int k_total = basis.size() * basis.size() + 1;

  // Fixed partition: the block layout depends only on the problem size, so
  // the reduction below is bit-identical for any thread count. Block count is
  // capped so the partials stay well under ~256 MB.
  const long bytes_per_partial = static_cast<long>(k_total) * p * p * 8;
  const long mem_cap = std::max<long>(1, (256l << 20) / std::max<long>(1, bytes_per_partial));
  const long n_blocks = std::max<long>(1, std::min<long>({32, (n + 3) / 4, mem_cap}));
  const long block_size = (n + n_blocks - 1) / n_blocks;

  std::vector<Partial> partials(n_blocks, Partial(k_total, p));
  parallel_for_index(n_blocks, [&](std::ptrdiff_t b) {
    const long lo = b * block_size;
    const long hi = std::min<long>(n, lo + block_size);
    for (long i = lo; i < hi; ++i) {
      const Eigen::MatrixXd bmat = basis_matrix(basis, ds.data.visit_times[i]);
      accumulate_subject(ds.data.observations[i], bmat, partials[b]);
    }
  });
  for (long b = 1; b < n_blocks; ++b) partials[0].add(partials[b]);
  return finish(ds, basis, std::move(partials[0]));
}

CovarianceEstimate estimate_covariance_serial(const CenteredDataset& ds, const BasisSpec& basis) {
  check_inputs(ds);
  const int r = basis.size();
  const int k_total = r * r + 1;
  const int p = ds.data.p();

  Partial acc(k_total, p);
  Eigen::VectorXd f(k_total);
  for (int i = 0; i < ds.data.n(); ++i) {
    const Eigen::MatrixXd bmat = basis_matrix(basis, ds.data.visit_times[i]);
    const auto& obs = ds.data.observations[i];
    const long j_count = bmat.rows();
    for (long j1 = 0; j1 < j_count; ++j1)
      for (long j2 = 0; j2 < j_count; ++j2) {
        for (int a = 0; a < r; ++a)
          for (int b = 0; b < r; ++b) f[a * r + b] = bmat(j1, a) * bmat(j2, b);
        f[k_total - 1] = j1 == j2 ? 1.0 : 0.0;
        acc.gram.noalias() += f * f.transpose();
        const Eigen::MatrixXd outer = obs.row(j1).transpose() * obs.row(j2);
        for (int k = 0; k < k_total; ++k)
          if (f[k] != 0.0) acc.moments[k].noalias() += f[k] * outer;
        ++acc.pair_count;
      }
  }
  return finish(ds, basis, std::move(acc));
}

std::pair<Eigen::MatrixXd, double> assemble_and_symmetrize(const CovarianceEstimate& est) {
  const int r = est.basis_count();
  const int p = est.p;
  Eigen::MatrixXd sigma(r * p, r * p);
  for (int a = 0; a < r; ++a) {
    sigma.block(a * p, a * p, p, p) =
        0.5 * (est.block(a, a) + est.block(a, a).transpose());
    for (int b = a + 1; b < r; ++b) {
      const Eigen::MatrixXd avg = 0.5 * (est.block(a, b) + est.block(b, a).transpose());
      sigma.block(a * p, b * p, p, p) = avg;
      sigma.block(b * p, a * p, p, p) = avg.transpose();
    }
  }
  const double noise = std::max(0.0, est.error_block.trace() / p);
  return {std::move(sigma), noise};
}

}  // namespace lcca
