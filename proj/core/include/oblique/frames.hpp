#pragma once

#include "oblique/linalg.hpp"

namespace oblique {

/// N vectors in R^n (the columns of an n x N matrix) together with the
/// subspace W they are claimed to span. Construction checks that every
/// vector lies in W and that the vectors span all of W.
class FiniteFrame {
 public:
  FiniteFrame(Matrix vectors, Subspace subspace, const Tolerance& tol = {});

  /// Frame for the span of its own vectors.
  static FiniteFrame spanning(Matrix vectors, const Tolerance& tol = {});

  Index size() const noexcept { return vectors_.cols(); }
  Index ambient_dim() const noexcept { return vectors_.rows(); }
  const Matrix& vectors() const noexcept { return vectors_; }
  const Subspace& subspace() const noexcept { return subspace_; }
  auto vector(Index i) const { return vectors_.col(i); }

 private:
  Matrix vectors_;
  Subspace subspace_;
};

/// Synthesis frame {w_i} on W and analysis frame {v_i} on V. `residual` is
/// || sum_i w_i v_i^T - pi_{WV^perp} ||_2.
struct ObliqueDualPair {
  FiniteFrame synthesis;
  FiniteFrame analysis;
  double residual = 0.0;
};

/// S = sum_i w_i w_i^T.
Matrix frame_operator(const FiniteFrame& f);

struct FrameBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Extreme eigenvalues of S restricted to W. Throws NotAFrame if the lower
/// bound is numerically zero.
FrameBounds frame_bounds(const FiniteFrame& f, const Tolerance& tol = {});

/// v_i = pi_{VW^perp} S^dagger w_i.
ObliqueDualPair canonical_oblique_dual(const FiniteFrame& f, const Subspace& v,
                                       const Tolerance& tol = {});

/// v_i = pi_{VW^perp} S^dagger w_i + h_i - sum_j <S^dagger w_i, w_j> h_j, with
/// the h_i given as the columns of `h` (each must lie in V).
ObliqueDualPair oblique_dual_family(const FiniteFrame& f, const Subspace& v, const Matrix& h,
                                    const Tolerance& tol = {});

/// Matrix form of the family above: C + H (I - M) where C holds the canonical
/// dual and M = W^T S^dagger W is the projector onto the row space of W.
Matrix oblique_dual_family_matrix(const FiniteFrame& f, const Subspace& v, const Matrix& h,
                                  const Tolerance& tol = {});

struct DualCheck {
  bool is_dual = false;
  double residual = 0.0;
};

DualCheck is_oblique_dual(const FiniteFrame& fw, const FiniteFrame& fv, const Tolerance& tol = {});

/// Pairs two frames and records their duality residual without judging it.
ObliqueDualPair make_dual_pair(FiniteFrame fw, FiniteFrame fv, const Tolerance& tol = {});

struct Reconstruction {
  Vector fhat;
  double consistency_residual = 0.0;
};

/// fhat = sum_i <f, v_i> w_i; the residual is max_i |<f - fhat, v_i>|.
Reconstruction reconstruct(const Vector& f, const ObliqueDualPair& pair);

}  // namespace oblique
