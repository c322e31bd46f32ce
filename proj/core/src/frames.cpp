#include "oblique/frames.hpp"

#include <string>

namespace oblique {

FiniteFrame::FiniteFrame(Matrix vectors, Subspace subspace, const Tolerance& tol)
    : vectors_(std::move(vectors)), subspace_(std::move(subspace)) {
  if (vectors_.cols() < 1) throw Error(ErrorCode::InvalidArgument, "a frame needs at least one vector");
  if (vectors_.rows() != subspace_.ambient_dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "frame vectors live in R^" + std::to_string(vectors_.rows()) +
                    " but the subspace in R^" + std::to_string(subspace_.ambient_dim()));
  }
  if (!vectors_.allFinite()) throw Error(ErrorCode::InvalidArgument, "frame vectors are not finite");
  for (Index i = 0; i < vectors_.cols(); ++i) {
    const double off = subspace_.distance(vectors_.col(i));
    if (off > tol.eq_tol * vectors_.col(i).norm()) {
      throw Error(ErrorCode::RangeViolation,
                  "frame vector " + std::to_string(i) + " is " + std::to_string(off) +
                      " away from the claimed subspace");
    }
  }
  const Index rank = numerical_rank(vectors_, tol);
  if (rank != subspace_.dim()) {
    throw Error(ErrorCode::NotAFrame,
                "vectors span a space of dimension " + std::to_string(rank) +
                    ", claimed subspace has dimension " + std::to_string(subspace_.dim()));
  }
}

FiniteFrame FiniteFrame::spanning(Matrix vectors, const Tolerance& tol) {
  Subspace w = orthonormal_basis(vectors, tol);
  return FiniteFrame(std::move(vectors), std::move(w), tol);
}

Matrix frame_operator(const FiniteFrame& f) { return f.vectors() * f.vectors().transpose(); }

FrameBounds frame_bounds(const FiniteFrame& f, const Tolerance& tol) {
  const auto [lo, hi] = restricted_extreme_eigenvalues(frame_operator(f), f.subspace());
  if (lo <= tol.rank_cutoff(f.ambient_dim(), f.size()) * hi) {
    throw Error(ErrorCode::NotAFrame, "lower frame bound is numerically zero");
  }
  return {lo, hi};
}

Matrix oblique_dual_family_matrix(const FiniteFrame& f, const Subspace& v, const Matrix& h,
                                  const Tolerance& tol) {
  const Subspace& w = f.subspace();
  const Matrix pi_vw = oblique_projection(v, w, tol);
  const Matrix s_pinv = pseudoinverse(frame_operator(f), tol);
  const Matrix canonical = pi_vw * s_pinv * f.vectors();
  if (h.size() == 0) return canonical;
  if (h.cols() != f.size() || h.rows() != f.ambient_dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "need " + std::to_string(f.size()) + " vectors h_i in R^" +
                    std::to_string(f.ambient_dim()));
  }
  for (Index i = 0; i < h.cols(); ++i) {
    if (v.distance(h.col(i)) > tol.eq_tol * std::max(1.0, h.col(i).norm())) {
      throw Error(ErrorCode::RangeViolation, "h_" + std::to_string(i) + " does not lie in V");
    }
  }
  const Matrix m = f.vectors().transpose() * s_pinv * f.vectors();
  return canonical + h - h * m;
}

ObliqueDualPair canonical_oblique_dual(const FiniteFrame& f, const Subspace& v, const Tolerance& tol) {
  require_direct_sum(f.subspace(), v, tol);
  return make_dual_pair(f, FiniteFrame(oblique_dual_family_matrix(f, v, Matrix(), tol), v, tol), tol);
}

ObliqueDualPair oblique_dual_family(const FiniteFrame& f, const Subspace& v, const Matrix& h,
                                    const Tolerance& tol) {
  if (h.cols() != f.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "got " + std::to_string(h.cols()) + " vectors h_i for a frame of " +
                    std::to_string(f.size()));
  }
  return make_dual_pair(f, FiniteFrame(oblique_dual_family_matrix(f, v, h, tol), v, tol), tol);
}

ObliqueDualPair make_dual_pair(FiniteFrame fw, FiniteFrame fv, const Tolerance& tol) {
  const DualCheck check = is_oblique_dual(fw, fv, tol);
  return {std::move(fw), std::move(fv), check.residual};
}

DualCheck is_oblique_dual(const FiniteFrame& fw, const FiniteFrame& fv, const Tolerance& tol) {
  if (fw.size() != fv.size()) {
    throw Error(ErrorCode::DimensionMismatch, "frames have different lengths");
  }
  const Matrix pi = oblique_projection(fw.subspace(), fv.subspace(), tol);
  const double residual = spectral_norm(fw.vectors() * fv.vectors().transpose() - pi);
  return {residual <= tol.eq_tol, residual};
}

Reconstruction reconstruct(const Vector& f, const ObliqueDualPair& pair) {
  const Matrix& w = pair.synthesis.vectors();
  const Matrix& v = pair.analysis.vectors();
  if (f.size() != w.rows()) throw Error(ErrorCode::DimensionMismatch, "signal has wrong length");
  Vector fhat = w * (v.transpose() * f);
  const double residual = (v.transpose() * (f - fhat)).cwiseAbs().maxCoeff();
  return {std::move(fhat), residual};
}

}  // namespace oblique
