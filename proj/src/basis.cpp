#include "lcca/basis.hpp"

#include <algorithm>
#include <cmath>

#include "lcca/errors.hpp"

namespace lcca {

BasisSpec BasisSpec::bspline(int degree, std::vector<double> interior_knots,
                             double lo, double hi) {
  if (degree < 0) throw ValidationError("bspline degree must be nonnegative");
  if (!(lo < hi)) throw ValidationError("bspline boundary range must satisfy lo < hi");
  for (std::size_t i = 0; i + 1 < interior_knots.size(); ++i) {
    if (!(interior_knots[i] < interior_knots[i + 1]))
      throw ValidationError("bspline knots must be strictly increasing");
  }
  if (!interior_knots.empty() &&
      (interior_knots.front() <= lo || interior_knots.back() >= hi))
    throw ValidationError("bspline interior knots must lie strictly inside the boundary range");
  BasisSpec spec;
  spec.kind = Kind::BSpline;
  spec.degree = degree;
  spec.interior_knots = std::move(interior_knots);
  spec.lo = lo;
  spec.hi = hi;
  return spec;
}

namespace {

// Clamped knot vector: lo and hi each repeated degree+1 times around the
// interior knots. Length D + 2 (d + 1).
std::vector<double> clamped_knots(const BasisSpec& spec) {
  std::vector<double> knots;
  knots.reserve(spec.interior_knots.size() + 2 * (spec.degree + 1));
  knots.insert(knots.end(), spec.degree + 1, spec.lo);
  knots.insert(knots.end(), spec.interior_knots.begin(), spec.interior_knots.end());
  knots.insert(knots.end(), spec.degree + 1, spec.hi);
  return knots;
}

Eigen::VectorXd eval_bspline(const BasisSpec& spec, double t) {
  const int d = spec.degree;
  const int r = spec.size();
  if (!(t >= spec.lo && t <= spec.hi))
    throw ValidationError("time " + std::to_string(t) + " outside bspline range [" +
                          std::to_string(spec.lo) + ", " + std::to_string(spec.hi) + "]");
  const std::vector<double> knots = clamped_knots(spec);

  // Knot span containing t; the right boundary belongs to the last span.
  int span = d;
  const int last_span = r - 1;
  while (span < last_span && t >= knots[span + 1]) ++span;

  // de Boor recurrence for the d+1 nonzero basis values on this span.
  std::vector<double> values(d + 1, 0.0), left(d + 1, 0.0), right(d + 1, 0.0);
  values[0] = 1.0;
  for (int j = 1; j <= d; ++j) {
    left[j] = t - knots[span + 1 - j];
    right[j] = knots[span + j] - t;
    double saved = 0.0;
    for (int k = 0; k < j; ++k) {
      const double denom = right[k + 1] + left[j - k];
      const double term = denom != 0.0 ? values[k] / denom : 0.0;
      values[k] = saved + right[k + 1] * term;
      saved = left[j - k] * term;
    }
    values[j] = saved;
  }

  Eigen::VectorXd out = Eigen::VectorXd::Zero(r);
  for (int k = 0; k <= d; ++k) out[span - d + k] = values[k];
  return out;
}

}  // namespace

Eigen::VectorXd eval_basis(const BasisSpec& basis, double t) {
  if (basis.kind == BasisSpec::Kind::Linear) {
    Eigen::VectorXd v(2);
    v << 1.0, t;
    return v;
  }
  return eval_bspline(basis, t);
}

Eigen::MatrixXd basis_matrix(const BasisSpec& basis, const Eigen::VectorXd& times) {
  Eigen::MatrixXd out(times.size(), basis.size());
  for (Eigen::Index j = 0; j < times.size(); ++j) out.row(j) = eval_basis(basis, times[j]);
  return out;
}

}  // namespace lcca
