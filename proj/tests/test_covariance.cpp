#include <doctest.h>

#include <Eigen/Dense>

#include "lcca/covariance.hpp"
#include "lcca/errors.hpp"
#include "lcca/rng.hpp"
#include "lcca/simulator.hpp"

using namespace lcca;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Noiseless x_ij = Z_i0 + t_ij Z_i1 on a shared time grid; on a balanced
// design the pooled OLS equals the unweighted sample second moments exactly.
struct BalancedCase {
  CenteredDataset data;
  MatrixXd z;  // n x 2p stacked effects
};

BalancedCase balanced_case(int n, int p, Rng& rng) {
  BalancedCase out;
  out.z.resize(n, 2 * p);
  VectorXd times(3);
  times << 0.0, 1.0, 2.5;
  out.data.data.variable_names.resize(p, "v");
  for (int i = 0; i < n; ++i) {
    out.data.data.subject_ids.push_back("s" + std::to_string(i));
    for (int k = 0; k < 2 * p; ++k) out.z(i, k) = rng.normal();
    MatrixXd obs(3, p);
    for (int j = 0; j < 3; ++j)
      obs.row(j) = out.z.row(i).head(p) + times[j] * out.z.row(i).tail(p);
    out.data.data.visit_times.push_back(times);
    out.data.data.observations.push_back(obs);
  }
  return out;
}

}  // namespace

TEST_CASE("noiseless balanced design: blocks equal sample second moments") {
  Rng rng(31);
  const auto c = balanced_case(25, 4, rng);
  const auto est = estimate_covariance(c.data, BasisSpec::linear());
  const int n = 25, p = 4;

  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const MatrixXd oracle = c.z.middleCols(a * p, p).transpose() *
                              c.z.middleCols(b * p, p) / double(n);
      CHECK((est.block(a, b) - oracle).norm() <= 1e-8 * oracle.norm());
    }
  CHECK(est.error_block.cwiseAbs().maxCoeff() < 1e-8);
  CHECK(est.pair_count == 25 * 9);

  const auto [sigma, noise] = assemble_and_symmetrize(est);
  CHECK(noise == 0.0);
  CHECK((sigma - sigma.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("all-zero centered data gives exactly zero blocks") {
  CenteredDataset ds;
  ds.data.variable_names = {"a", "b"};
  for (int i = 0; i < 4; ++i) {
    ds.data.subject_ids.push_back("s" + std::to_string(i));
    VectorXd t(2);
    t << 0.0, 1.0 + i;
    ds.data.visit_times.push_back(t);
    ds.data.observations.push_back(MatrixXd::Zero(2, 2));
  }
  const auto est = estimate_covariance(ds, BasisSpec::linear());
  for (int k = 0; k < 4; ++k) CHECK(est.blocks[k].cwiseAbs().maxCoeff() == 0.0);
  CHECK(est.error_block.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("parallel kernel matches the pair-streaming reference") {
  SimConfig config;
  config.setting = 1;
  config.n = 40;
  config.seed = 8;
  config.p = 6;
  config.q = 6;
  const LoadingSet loadings = study_loadings(config);
  Rng rng = derive_stream(config.seed, 0);
  const auto times = gen_visit_times(config.n, rng);
  const GroundTruth truth = gen_ground_truth(config, loadings, rng);
  const CenteredDataset ds{
      synthesize(loadings.x, truth.scores_x, times, 0.4, "x", rng)};

  const auto fast = estimate_covariance(ds, BasisSpec::linear());
  const auto ref = estimate_covariance_serial(ds, BasisSpec::linear());
  CHECK(fast.pair_count == ref.pair_count);
  CHECK((fast.gram - ref.gram).norm() <= 1e-10 * ref.gram.norm());
  for (int k = 0; k < 4; ++k)
    CHECK((fast.blocks[k] - ref.blocks[k]).norm() <=
          1e-10 * (ref.blocks[k].norm() + 1.0));
  CHECK((fast.error_block - ref.error_block).norm() <=
        1e-10 * (ref.error_block.norm() + 1.0));
}

TEST_CASE("repeated runs are bit-identical") {
  Rng rng(77);
  const auto c = balanced_case(17, 3, rng);
  const auto first = estimate_covariance(c.data, BasisSpec::linear());
  const auto second = estimate_covariance(c.data, BasisSpec::linear());
  CHECK(first.gram == second.gram);
  for (int k = 0; k < 4; ++k) CHECK(first.blocks[k] == second.blocks[k]);
  CHECK(first.error_block == second.error_block);
}

TEST_CASE("scaling data by c scales blocks and noise by c^2") {
  SimConfig config;
  config.setting = 1;
  config.n = 30;
  config.seed = 21;
  config.p = 8;
  config.q = 4;
  const LoadingSet loadings = study_loadings(config);
  Rng rng = derive_stream(config.seed, 0);
  const auto times = gen_visit_times(config.n, rng);
  const GroundTruth truth = gen_ground_truth(config, loadings, rng);
  CenteredDataset ds{synthesize(loadings.x, truth.scores_x, times, 0.3, "x", rng)};
  CenteredDataset scaled = ds;
  for (auto& obs : scaled.data.observations) obs *= 10.0;

  const auto [sigma, noise] = assemble_and_symmetrize(estimate_covariance(ds, BasisSpec::linear()));
  const auto [sigma_c, noise_c] =
      assemble_and_symmetrize(estimate_covariance(scaled, BasisSpec::linear()));
  CHECK((sigma_c - 100.0 * sigma).norm() <= 1e-8 * sigma.norm());
  CHECK(noise_c == doctest::Approx(100.0 * noise).epsilon(1e-10));
}

TEST_CASE("error paths: single-visit subjects and collinear regressors") {
  // every subject one visit: same-visit indicator unidentifiable
  CenteredDataset singles;
  singles.data.variable_names = {"v"};
  for (int i = 0; i < 6; ++i) {
    singles.data.subject_ids.push_back("s" + std::to_string(i));
    VectorXd t(1);
    t << 0.5 * i;
    singles.data.visit_times.push_back(t);
    singles.data.observations.push_back(MatrixXd::Constant(1, 1, i));
  }
  CHECK_THROWS_AS(estimate_covariance(singles, BasisSpec::linear()), NumericalError);

  // every subject the same two times: only four distinct regressor points
  CenteredDataset twopoint;
  twopoint.data.variable_names = {"v"};
  Rng rng(5);
  for (int i = 0; i < 6; ++i) {
    twopoint.data.subject_ids.push_back("s" + std::to_string(i));
    VectorXd t(2);
    t << 1.0, 2.0;
    twopoint.data.visit_times.push_back(t);
    MatrixXd obs(2, 1);
    obs << rng.normal(), rng.normal();
    twopoint.data.observations.push_back(obs);
  }
  CHECK_THROWS_WITH_AS(estimate_covariance(twopoint, BasisSpec::linear()),
                       doctest::Contains("collinear"), NumericalError);
}

TEST_CASE("assemble symmetrizes off-diagonal block pairs") {
  CovarianceEstimate est;
  est.basis = BasisSpec::linear();
  est.p = 2;
  est.blocks.assign(4, MatrixXd::Zero(2, 2));
  est.blocks[0] << 2.0, 0.1, 0.1, 1.0;           // (0,0) already symmetric
  est.blocks[1] << 0.0, 1.0, 2.0, 0.0;           // (0,1)
  est.blocks[2] << 0.0, 4.0, 3.0, 0.0;           // (1,0) != (0,1)^T
  est.blocks[3] << 1.0, 0.0, 0.0, 1.0;
  est.error_block = MatrixXd::Zero(2, 2);
  est.error_block(0, 0) = -3.0;                   // negative trace -> floored

  const auto [sigma, noise] = assemble_and_symmetrize(est);
  CHECK(noise == 0.0);
  // average of (0,1) and (1,0)^T entrywise: (0,1) entry pairs with (1,0)'s (1,0)
  CHECK(sigma(0, 3) == doctest::Approx(0.5 * (1.0 + 3.0)));
  CHECK(sigma(1, 2) == doctest::Approx(0.5 * (2.0 + 4.0)));
  CHECK((sigma - sigma.transpose()).cwiseAbs().maxCoeff() == 0.0);

  // already-symmetric estimate is a fixed point
  est.blocks[2] = est.blocks[1].transpose();
  est.error_block = MatrixXd::Identity(2, 2);
  const auto [sigma2, noise2] = assemble_and_symmetrize(est);
  CHECK(sigma2.block(0, 2, 2, 2) == est.blocks[1]);
  CHECK(noise2 == doctest::Approx(1.0));
}
