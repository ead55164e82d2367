#pragma once

#include "lcca/cca.hpp"
#include "lcca/dataset.hpp"
#include "lcca/lpca.hpp"
#include "lcca/naive.hpp"

namespace lcca {

struct FitOptions {
  BasisSpec basis = BasisSpec::linear();
  double threshold = 0.9;  // variance-explained threshold for dimension selection
  double alpha = 0.05;     // level of the sequential Wilks test
  double ridge = 1e-8;     // relative ridge for CCA whitening
};

/// End-to-end longitudinal CCA fit of a paired dataset.
struct LccaFit {
  ValidationReport validation_x, validation_y;
  MeanModel mean_x, mean_y;
  LpcaModel model_x, model_y;
  ScoreMatrix scores_x, scores_y;
  CcaModel cca;
  WilksReport wilks;
};

/// validate -> center -> covariance -> eigendecompose -> BLUP -> CCA -> Wilks.
/// NumericalError messages name the failing stage.
LccaFit fit_lcca(const LongitudinalDataset& x, const LongitudinalDataset& y,
                 const FitOptions& options = {});

/// Baseline fit: per-subject OLS effects followed by classical CCA and the
/// same sequential test.
struct NaiveFit {
  ValidationReport validation_x, validation_y;
  MeanModel mean_x, mean_y;
  NaiveResult naive;
};

NaiveFit fit_naive(const LongitudinalDataset& x, const LongitudinalDataset& y,
                   const FitOptions& options = {});

}  // namespace lcca
