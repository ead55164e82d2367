#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lcca/basis.hpp"

namespace lcca {

/// Irregularly sampled multivariate longitudinal data: per subject, a strictly
/// increasing vector of visit times and a (visits x p) observation matrix.
/// Immutable after construction; all operations on it are pure.
struct LongitudinalDataset {
  std::vector<std::string> subject_ids;         // n, unique, first-appearance order
  std::vector<Eigen::VectorXd> visit_times;     // per subject, strictly increasing
  std::vector<Eigen::MatrixXd> observations;    // per subject, J_i x p
  std::vector<std::string> variable_names;      // p

  int n() const { return static_cast<int>(subject_ids.size()); }
  int p() const { return static_cast<int>(variable_names.size()); }
  long total_visits() const;
};

/// A dataset whose pooled mean trajectory has been removed. Distinct type so
/// the model-fitting operations cannot be fed raw data by accident.
struct CenteredDataset {
  LongitudinalDataset data;
};

/// Pooled fixed-effect mean: one basis-expanded mean curve per coordinate.
struct MeanModel {
  Eigen::MatrixXd coefficients;  // p x R
  BasisSpec basis;

  /// Mean vector mu(t).
  Eigen::VectorXd predict(double t) const;
};

struct ValidationReport {
  int n = 0;
  int p = 0;
  int visits_min = 0;
  int visits_max = 0;
  double visits_mean = 0.0;
  double time_lo = 0.0;
  double time_hi = 0.0;
  std::vector<std::string> warnings;
};

/// Parses long-format CSV with header `subject_id,time,<v1>,...,<vp>`.
/// Rows are grouped by subject in first-appearance order and sorted by time
/// within subject. Throws ParseError (with line number) on malformed rows,
/// ValidationError on duplicate (subject, time) pairs or an empty file.
LongitudinalDataset parse_long_csv(std::istream& in,
                                   std::optional<int> expected_dim = std::nullopt);
LongitudinalDataset parse_long_csv_file(const std::string& path,
                                        std::optional<int> expected_dim = std::nullopt);

/// Inverse of parse_long_csv; numbers at 17 significant digits so that
/// parse(serialize(ds)) reproduces every value bit-exactly.
void serialize_long_csv(const LongitudinalDataset& ds, std::ostream& out);
std::string serialize_long_csv(const LongitudinalDataset& ds);

/// Summary statistics plus warnings (single-visit subjects, constant
/// variables). Non-finite values are a hard ValidationError.
ValidationReport validate(const LongitudinalDataset& ds);

/// Removes the pooled least-squares mean curve (per coordinate, fitted across
/// all subjects and visits on the given basis). Throws NumericalError when the
/// pooled design is rank-deficient.
std::pair<CenteredDataset, MeanModel> center(const LongitudinalDataset& ds,
                                             const BasisSpec& basis);

}  // namespace lcca
