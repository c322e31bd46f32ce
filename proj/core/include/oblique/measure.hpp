#pragma once

#include <functional>
#include <vector>

#include "oblique/linalg.hpp"

namespace oblique {

/// Weights of a measure must sum to one to within this much.
inline constexpr double kWeightSumTol = 1e-12;
/// Positional tolerance for treating two atoms as the same point.
inline constexpr double kAtomTol = 1e-9;

/// A finitely supported probability measure on R^n. Points are the columns of
/// an n x m matrix; atoms are never merged implicitly, so the k-th atom keeps
/// its identity through pushforwards and couplings.
class DiscreteMeasure {
 public:
  DiscreteMeasure(Matrix points, Vector weights);

  static DiscreteMeasure dirac(const Vector& x);
  static DiscreteMeasure uniform(Matrix points);

  Index ambient_dim() const noexcept { return points_.rows(); }
  Index size() const noexcept { return points_.cols(); }
  const Matrix& points() const noexcept { return points_; }
  const Vector& weights() const noexcept { return weights_; }
  auto point(Index k) const { return points_.col(k); }
  double weight(Index k) const { return weights_(k); }

  /// Points with strictly positive weight, as columns.
  Matrix support() const;

 private:
  Matrix points_;
  Vector weights_;
};

/// Atoms aggregated by position: coincident points (within kAtomTol) merged,
/// zero-weight atoms dropped, sorted lexicographically.
struct AggregatedMeasure {
  Matrix points;
  Vector weights;
};

AggregatedMeasure aggregate(const Matrix& points, const Vector& weights, double tol = kAtomTol);

/// Weak equality: same aggregated atoms within `tol` in position and weight.
bool weak_equal(const DiscreteMeasure& a, const DiscreteMeasure& b, double tol = kAtomTol);

/// Weak equality on raw atom lists (columns of `pa`, `pb`); used for joint
/// measures on product spaces, where each column stacks the coordinates.
bool weak_equal_atoms(const Matrix& pa, const Vector& wa, const Matrix& pb, const Vector& wb,
                      double tol = kAtomTol);

/// S_mu = sum_k w_k x_k x_k^T.
Matrix measure_frame_operator(const DiscreteMeasure& mu);

/// M_2(mu) = sum_k w_k ||x_k||^2.
double second_moment(const DiscreteMeasure& mu);

/// Image measure under a linear map; weights and atom order unchanged.
DiscreteMeasure pushforward(const DiscreteMeasure& mu, const Matrix& t);

using PointMap = std::function<Vector(const Vector&)>;
DiscreteMeasure pushforward(const DiscreteMeasure& mu, const PointMap& t);

}  // namespace oblique
