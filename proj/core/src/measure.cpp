#include "oblique/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace oblique {

DiscreteMeasure::DiscreteMeasure(Matrix points, Vector weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
  if (points_.cols() != weights_.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                std::to_string(points_.cols()) + " points but " +
                    std::to_string(weights_.size()) + " weights");
  }
  if (points_.rows() < 1 || points_.cols() < 1) {
    throw Error(ErrorCode::InvalidArgument, "a measure needs at least one atom in R^n, n >= 1");
  }
  if (!points_.allFinite() || !weights_.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "measure has non-finite entries");
  }
  if ((weights_.array() < 0.0).any()) {
    throw Error(ErrorCode::InvalidArgument, "measure has a negative weight");
  }
  const double total = weights_.sum();
  if (std::abs(total - 1.0) > kWeightSumTol) {
    throw Error(ErrorCode::InvalidArgument,
                "weights must sum to 1 (got " + std::to_string(total) + ")");
  }
}

DiscreteMeasure DiscreteMeasure::dirac(const Vector& x) {
  return DiscreteMeasure(x, Vector::Ones(1));
}

DiscreteMeasure DiscreteMeasure::uniform(Matrix points) {
  const Index m = points.cols();
  return DiscreteMeasure(std::move(points), Vector::Constant(m, 1.0 / static_cast<double>(m)));
}

Matrix DiscreteMeasure::support() const {
  std::vector<Index> keep;
  for (Index k = 0; k < size(); ++k) {
    if (weights_(k) > 0.0) keep.push_back(k);
  }
  Matrix out(ambient_dim(), static_cast<Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) out.col(static_cast<Index>(j)) = points_.col(keep[j]);
  return out;
}

AggregatedMeasure aggregate(const Matrix& points, const Vector& weights, double tol) {
  // Greedy clustering: each atom joins the first representative within tol.
  // O(m^2) but measures here have at most a few hundred atoms.
  std::vector<Index> reps;
  std::vector<double> mass;
  for (Index k = 0; k < points.cols(); ++k) {
    if (weights(k) <= 0.0) continue;
    bool placed = false;
    for (std::size_t r = 0; r < reps.size(); ++r) {
      if ((points.col(reps[r]) - points.col(k)).lpNorm<Eigen::Infinity>() <= tol) {
        mass[r] += weights(k);
        placed = true;
        break;
      }
    }
    if (!placed) {
      reps.push_back(k);
      mass.push_back(weights(k));
    }
  }
  std::vector<std::size_t> order(reps.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto pa = points.col(reps[a]);
    const auto pb = points.col(reps[b]);
    return std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(), pb.end());
  });
  AggregatedMeasure out{Matrix(points.rows(), static_cast<Index>(reps.size())),
                        Vector(static_cast<Index>(reps.size()))};
  for (std::size_t j = 0; j < order.size(); ++j) {
    out.points.col(static_cast<Index>(j)) = points.col(reps[order[j]]);
    out.weights(static_cast<Index>(j)) = mass[order[j]];
  }
  return out;
}

bool weak_equal(const DiscreteMeasure& a, const DiscreteMeasure& b, double tol) {
  return weak_equal_atoms(a.points(), a.weights(), b.points(), b.weights(), tol);
}

bool weak_equal_atoms(const Matrix& pa, const Vector& wa, const Matrix& pb, const Vector& wb,
                      double tol) {
  if (pa.rows() != pb.rows()) return false;
  const AggregatedMeasure ga = aggregate(pa, wa, tol);
  const AggregatedMeasure gb = aggregate(pb, wb, tol);
  if (ga.points.cols() != gb.points.cols()) return false;
  // Lexicographic order is not stable under tol-sized jitter, so match each
  // atom of a against any unused atom of b.
  std::vector<bool> used(static_cast<std::size_t>(gb.points.cols()), false);
  for (Index i = 0; i < ga.points.cols(); ++i) {
    bool found = false;
    for (Index j = 0; j < gb.points.cols(); ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      if ((ga.points.col(i) - gb.points.col(j)).lpNorm<Eigen::Infinity>() <= tol &&
          std::abs(ga.weights(i) - gb.weights(j)) <= tol) {
        used[static_cast<std::size_t>(j)] = true;
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

Matrix measure_frame_operator(const DiscreteMeasure& mu) {
  return mu.points() * mu.weights().asDiagonal() * mu.points().transpose();
}

double second_moment(const DiscreteMeasure& mu) {
  return mu.points().colwise().squaredNorm().dot(mu.weights());
}

DiscreteMeasure pushforward(const DiscreteMeasure& mu, const Matrix& t) {
  if (t.cols() != mu.ambient_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "map domain does not match the measure's ambient space");
  }
  return DiscreteMeasure(t * mu.points(), mu.weights());
}

DiscreteMeasure pushforward(const DiscreteMeasure& mu, const PointMap& t) {
  Matrix images;
  for (Index k = 0; k < mu.size(); ++k) {
    const Vector y = t(mu.point(k));
    if (k == 0) images.resize(y.size(), mu.size());
    if (y.size() != images.rows()) {
      throw Error(ErrorCode::DimensionMismatch, "map returned vectors of varying length");
    }
    images.col(k) = y;
  }
  return DiscreteMeasure(std::move(images), mu.weights());
}

}  // namespace oblique
