#include "oblique/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace oblique {

double Tolerance::rank_cutoff(Index rows, Index cols) const {
  if (rank_tol) return *rank_tol;
  return static_cast<double>(std::max<Index>({rows, cols, 1})) *
         std::numeric_limits<double>::epsilon();
}

void Tolerance::validate() const {
  if (rank_tol && !(*rank_tol > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "rank_tol must be positive");
  }
  if (!(eq_tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "eq_tol must be positive");
}

Subspace Subspace::from_orthonormal(Matrix basis, double orth_tol) {
  if (basis.rows() < 1 || basis.cols() < 1 || basis.cols() > basis.rows()) {
    throw Error(ErrorCode::InvalidArgument,
                "subspace basis must be n x d with 1 <= d <= n, got " +
                    std::to_string(basis.rows()) + " x " + std::to_string(basis.cols()));
  }
  if (!all_finite(basis)) throw Error(ErrorCode::InvalidArgument, "subspace basis is not finite");
  const Matrix gram = basis.transpose() * basis;
  const double dev = (gram - Matrix::Identity(basis.cols(), basis.cols())).cwiseAbs().maxCoeff();
  if (dev > orth_tol) {
    throw Error(ErrorCode::InvalidArgument,
                "subspace basis columns are not orthonormal (deviation " + std::to_string(dev) + ")");
  }
  return Subspace(std::move(basis));
}

Subspace Subspace::full(Index ambient_dim) {
  return Subspace(Matrix::Identity(ambient_dim, ambient_dim));
}

double Subspace::distance(const Eigen::Ref<const Vector>& v) const {
  return (v - basis_ * (basis_.transpose() * v)).norm();
}

Subspace orthonormal_basis(const Matrix& columns, const Tolerance& tol) {
  if (columns.rows() < 1 || columns.cols() < 1) {
    throw Error(ErrorCode::AllZero, "no vectors supplied");
  }
  if (!all_finite(columns)) throw Error(ErrorCode::InvalidArgument, "vectors are not finite");
  Eigen::JacobiSVD<Matrix> svd(columns, Eigen::ComputeThinU);
  const Vector& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) <= std::numeric_limits<double>::min()) {
    throw Error(ErrorCode::AllZero, "every vector is numerically zero");
  }
  const double cutoff = tol.rank_cutoff(columns.rows(), columns.cols()) * sv(0);
  Index rank = 0;
  while (rank < sv.size() && sv(rank) > cutoff) ++rank;
  return Subspace::from_orthonormal(svd.matrixU().leftCols(rank));
}

Subspace orthonormal_basis(std::span<const Vector> vectors, const Tolerance& tol) {
  if (vectors.empty()) throw Error(ErrorCode::AllZero, "no vectors supplied");
  const Index n = vectors.front().size();
  Matrix cols(n, static_cast<Index>(vectors.size()));
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != n) {
      throw Error(ErrorCode::DimensionMismatch, "vectors have different ambient dimensions");
    }
    cols.col(static_cast<Index>(i)) = vectors[i];
  }
  return orthonormal_basis(cols, tol);
}

Matrix pseudoinverse(const Matrix& m, const Tolerance& tol) {
  if (m.size() == 0) return Matrix::Zero(m.cols(), m.rows());
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  Vector inv = Vector::Zero(sv.size());
  if (sv.size() > 0 && sv(0) > 0.0) {
    const double cutoff = tol.rank_cutoff(m.rows(), m.cols()) * sv(0);
    for (Index i = 0; i < sv.size(); ++i) {
      if (sv(i) > cutoff) inv(i) = 1.0 / sv(i);
    }
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

double subspace_angle_cos(const Subspace& w, const Subspace& v) {
  if (w.ambient_dim() != v.ambient_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "subspaces live in different ambient spaces");
  }
  // A dim-W-dimensional space cannot map injectively into a smaller V.
  if (w.dim() > v.dim()) return 0.0;
  const Matrix cross = v.basis().transpose() * w.basis();
  Eigen::JacobiSVD<Matrix> svd(cross);
  const double smin = svd.singularValues()(svd.singularValues().size() - 1);
  return std::clamp(smin, 0.0, 1.0);
}

void require_direct_sum(const Subspace& w, const Subspace& v, const Tolerance& tol) {
  if (w.ambient_dim() != v.ambient_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "subspaces live in different ambient spaces");
  }
  if (w.dim() != v.dim()) {
    throw Error(ErrorCode::DirectSumViolation,
                "dim W = " + std::to_string(w.dim()) + " differs from dim V = " +
                    std::to_string(v.dim()));
  }
  const double threshold = tol.rank_cutoff(w.ambient_dim(), w.ambient_dim());
  const double cos_wv = subspace_angle_cos(w, v);
  const double cos_vw = subspace_angle_cos(v, w);
  if (cos_wv <= threshold || cos_vw <= threshold) {
    throw Error(ErrorCode::DirectSumViolation,
                "cos(theta_WV) = " + std::to_string(cos_wv) + ", cos(theta_VW) = " +
                    std::to_string(cos_vw));
  }
}

Matrix oblique_projection(const Subspace& w, const Subspace& v, const Tolerance& tol) {
  require_direct_sum(w, v, tol);
  const Matrix cross = v.basis().transpose() * w.basis();
  return w.basis() * cross.partialPivLu().solve(v.basis().transpose());
}

Matrix orthogonal_projection(const Subspace& w) {
  return w.basis() * w.basis().transpose();
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

Index numerical_rank(const Matrix& m, const Tolerance& tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& sv = svd.singularValues();
  if (sv(0) <= std::numeric_limits<double>::min()) return 0;
  const double cutoff = tol.rank_cutoff(m.rows(), m.cols()) * sv(0);
  Index rank = 0;
  while (rank < sv.size() && sv(rank) > cutoff) ++rank;
  return rank;
}

Matrix psd_pinv_sqrt(const Matrix& s, const Tolerance& tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (s + s.transpose()));
  const Vector& lambda = eig.eigenvalues();
  const double lmax = lambda.cwiseAbs().maxCoeff();
  const double cutoff = tol.rank_cutoff(s.rows(), s.cols()) * lmax;
  Vector scaled = Vector::Zero(lambda.size());
  for (Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) > cutoff) scaled(i) = 1.0 / std::sqrt(lambda(i));
  }
  return eig.eigenvectors() * scaled.asDiagonal() * eig.eigenvectors().transpose();
}

Matrix psd_sqrt(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (s + s.transpose()));
  const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

std::pair<double, double> restricted_extreme_eigenvalues(const Matrix& s, const Subspace& w) {
  const Matrix restricted = w.basis().transpose() * s * w.basis();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (restricted + restricted.transpose()),
                                            Eigen::EigenvaluesOnly);
  const Vector& lambda = eig.eigenvalues();
  return {lambda(0), lambda(lambda.size() - 1)};
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace oblique
