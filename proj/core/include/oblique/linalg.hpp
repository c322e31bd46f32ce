#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "oblique/error.hpp"

namespace oblique {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Numerical thresholds shared by every operation.
///
/// `rank_tol` is relative: a singular value s counts as zero when
/// s <= rank_tol * s_max. Left unset, it defaults to max(rows, cols) * machine
/// epsilon of the matrix being decided. `eq_tol` is the absolute residual
/// allowed in operator-equality checks on unit-scale inputs.
struct Tolerance {
  std::optional<double> rank_tol;
  double eq_tol = 1e-9;

  double rank_cutoff(Index rows, Index cols) const;
  void validate() const;
};

/// Columns of `basis` must be orthonormal to within this much in max-norm.
inline constexpr double kOrthonormalityTol = 1e-9;

/// A linear subspace of R^n held as an orthonormal column basis (n x d).
class Subspace {
 public:
  /// Validates that `basis` has orthonormal columns; throws InvalidArgument.
  static Subspace from_orthonormal(Matrix basis, double orth_tol = kOrthonormalityTol);
  static Subspace full(Index ambient_dim);

  Index ambient_dim() const noexcept { return basis_.rows(); }
  Index dim() const noexcept { return basis_.cols(); }
  const Matrix& basis() const noexcept { return basis_; }

  /// Euclidean distance from v to the subspace, ||v - P v||.
  double distance(const Eigen::Ref<const Vector>& v) const;

 private:
  explicit Subspace(Matrix basis) : basis_(std::move(basis)) {}
  Matrix basis_;
};

Subspace orthonormal_basis(const Matrix& columns, const Tolerance& tol = {});
Subspace orthonormal_basis(std::span<const Vector> vectors, const Tolerance& tol = {});

Matrix pseudoinverse(const Matrix& m, const Tolerance& tol = {});

/// sigma_min(B_V^T B_W): the cosine of the largest principal angle measured
/// from W into V, i.e. inf over unit f in W of ||P_V f||.
double subspace_angle_cos(const Subspace& w, const Subspace& v);

/// Throws DirectSumViolation unless R^n = W (+) V^perp.
void require_direct_sum(const Subspace& w, const Subspace& v, const Tolerance& tol = {});

/// The projection onto W along V^perp, B_W (B_V^T B_W)^{-1} B_V^T.
Matrix oblique_projection(const Subspace& w, const Subspace& v, const Tolerance& tol = {});

Matrix orthogonal_projection(const Subspace& w);

// -- shared numerics --------------------------------------------------------

double spectral_norm(const Matrix& m);

Index numerical_rank(const Matrix& m, const Tolerance& tol = {});

/// (S^dagger)^{1/2} for symmetric PSD S; eigenvalues at or below the rank
/// cutoff are clamped to zero.
Matrix psd_pinv_sqrt(const Matrix& s, const Tolerance& tol = {});

/// S^{1/2} for symmetric PSD S; small negative round-off eigenvalues clamp to 0.
Matrix psd_sqrt(const Matrix& s);

/// Smallest and largest eigenvalue of B_W^T S B_W (S restricted to W).
std::pair<double, double> restricted_extreme_eigenvalues(const Matrix& s, const Subspace& w);

bool all_finite(const Matrix& m);

}  // namespace oblique
