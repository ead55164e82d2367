#include "lcca/pipeline.hpp"

#include <string>
#include <utility>

#include "lcca/covariance.hpp"
#include "lcca/errors.hpp"

namespace lcca {

namespace {

template <class Fn>
auto stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(name) + ": " + e.what());
  }
}

struct SideFit {
  ValidationReport validation;
  MeanModel mean;
  LpcaModel model;
  ScoreMatrix scores;
};

SideFit fit_side(const LongitudinalDataset& ds, const FitOptions& options, const char* tag) {
  SideFit side;
  side.validation = validate(ds);
  auto centered = stage(tag, [&] { return center(ds, options.basis); });
  side.mean = std::move(centered.second);
  const auto est =
      stage(tag, [&] { return estimate_covariance(centered.first, options.basis); });
  auto assembled = assemble_and_symmetrize(est);
  side.model = stage(tag, [&] {
    return eigendecompose_select(assembled.first, options.threshold, options.basis,
                                 assembled.second);
  });
  side.scores = stage(tag, [&] { return blup_scores(side.model, centered.first); });
  return side;
}

}  // namespace

LccaFit fit_lcca(const LongitudinalDataset& x, const LongitudinalDataset& y,
                 const FitOptions& options) {
  SideFit sx = fit_side(x, options, "x");
  SideFit sy = fit_side(y, options, "y");

  LccaFit fit;
  fit.validation_x = std::move(sx.validation);
  fit.validation_y = std::move(sy.validation);
  fit.mean_x = std::move(sx.mean);
  fit.mean_y = std::move(sy.mean);
  fit.model_x = std::move(sx.model);
  fit.model_y = std::move(sy.model);
  fit.scores_x = std::move(sx.scores);
  fit.scores_y = std::move(sy.scores);
  fit.cca = stage("cca", [&] {
    return fit_latent_cca(fit.scores_x, fit.scores_y, options.ridge);
  });
  fit.wilks = stage("wilks", [&] {
    return wilks_sequential(fit.cca.correlations, fit.scores_x.values.rows(),
                            fit.model_x.dimension(), fit.model_y.dimension(),
                            options.alpha);
  });
  return fit;
}

NaiveFit fit_naive(const LongitudinalDataset& x, const LongitudinalDataset& y,
                   const FitOptions& options) {
  NaiveFit fit;
  fit.validation_x = validate(x);
  fit.validation_y = validate(y);
  auto centered_x = stage("x", [&] { return center(x, options.basis); });
  auto centered_y = stage("y", [&] { return center(y, options.basis); });
  fit.mean_x = std::move(centered_x.second);
  fit.mean_y = std::move(centered_y.second);
  const Eigen::MatrixXd x_effects = subject_ols_effects(centered_x.first);
  const Eigen::MatrixXd y_effects = subject_ols_effects(centered_y.first);
  fit.naive = stage("naive cca", [&] {
    return naive_cca_pipeline(x_effects, y_effects, options.threshold, options.alpha,
                              options.ridge);
  });
  return fit;
}

}  // namespace lcca
