#pragma once

#include <Eigen/Core>
#include <vector>

namespace lcca {

/// Temporal basis for subject trajectories. Either the linear pair
/// b(t) = (1, t) or a clamped B-spline basis of a given degree over a fixed
/// interior knot sequence on [lo, hi].
struct BasisSpec {
  enum class Kind { Linear, BSpline };

  Kind kind = Kind::Linear;
  int degree = 3;                      // bspline only
  std::vector<double> interior_knots;  // strictly increasing, bspline only
  double lo = 0.0;                     // boundary range, bspline only
  double hi = 1.0;

  static BasisSpec linear() { return BasisSpec{}; }
  static BasisSpec bspline(int degree, std::vector<double> interior_knots,
                           double lo, double hi);

  /// Number of basis functions R.
  int size() const {
    return kind == Kind::Linear
               ? 2
               : static_cast<int>(interior_knots.size()) + degree + 1;
  }

  bool operator==(const BasisSpec&) const = default;
};

/// Basis values (b_1(t), ..., b_R(t)). For B-splines the values are computed
/// with the de Boor recurrence and sum to one on [lo, hi]; t outside the
/// boundary range is an error.
Eigen::VectorXd eval_basis(const BasisSpec& basis, double t);

/// Rows of eval_basis over a vector of times (J x R).
Eigen::MatrixXd basis_matrix(const BasisSpec& basis, const Eigen::VectorXd& times);

}  // namespace lcca
