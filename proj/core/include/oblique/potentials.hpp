#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "oblique/frames.hpp"

namespace oblique {

/// Absolute tolerance used to decide that a lower bound is attained.
inline constexpr double kSaturationTol = 1e-8;

struct PotentialReport {
  double p = 2.0;
  double value = 0.0;
  std::optional<double> lower_bound;
  std::optional<double> gap;
  bool saturated = false;
  double saturation_tol = kSaturationTol;
  /// Sharper bound available when <w_i, v_i> is constant in i (even p only).
  std::optional<double> constant_diagonal_bound;
};

struct CoherenceReport {
  double max_off_diagonal_sq = 0.0;
  double welch_bound = 0.0;
  bool diagonal_constant = false;
  bool saturated = false;
};

struct MixedGram {
  Matrix g;
  /// Signature matrix, present only when the coherence bound is attained and
  /// the rescaled Gram really is symmetric with zero diagonal and +-1 entries.
  std::optional<Matrix> q;
};

/// G_ij = <w_i, v_j>.
Matrix mixed_gram_matrix(const ObliqueDualPair& pair);

bool is_even_integer(double p);

/// d for p = 2, N^{2-p} d^{p/2} for even p > 2.
std::optional<double> potential_lower_bound(Index n_vectors, Index d, double p);
/// d^2 / N for p = 2, N^{1-p} d^p for even p > 2.
std::optional<double> diagonal_lower_bound(Index n_vectors, Index d, double p);
/// |d - d^2/N|^{p/2} / (N^{p/2-1} (N-1)^{p/2-1}) + d^p / N^{p-1}, even p.
std::optional<double> constant_diagonal_lower_bound(Index n_vectors, Index d, double p);
/// d (N - d) / (N^2 (N - 1)); zero when N = d.
double welch_bound(Index n_vectors, Index d);

/// sum_ij |<w_i, v_j>|^p. Throws NotADual unless pair.residual <= eq_tol.
PotentialReport dual_p_potential(const ObliqueDualPair& pair, double p, const Tolerance& tol = {});

/// sum_i |<w_i, v_i>|^p. Saturated iff every <w_i, v_i> equals d/N.
PotentialReport diagonal_potential(const ObliqueDualPair& pair, double p, const Tolerance& tol = {});

/// Throws HypothesisViolated when the diagonal of the mixed Gram is not
/// constant within eq_tol.
CoherenceReport mixed_coherence(const ObliqueDualPair& pair, const Tolerance& tol = {});

MixedGram mixed_gram(const ObliqueDualPair& pair, const Tolerance& tol = {});

struct EtfLift {
  FiniteFrame psi;
  bool is_equiangular_tight = false;
};

/// psi_i = sqrt(N/d) (S^dagger)^{1/2} w_i.
EtfLift etf_lift(const FiniteFrame& f, const Tolerance& tol = {});

/// Potential of the dual family parameterized by H = B_V X (X is d x N):
/// value and analytic gradient with respect to X.
class DualPotentialObjective {
 public:
  DualPotentialObjective(const FiniteFrame& f, const Subspace& v, double p, const Tolerance& tol = {});

  Index rows() const noexcept { return bv_.cols(); }
  Index cols() const noexcept { return wm_.cols(); }

  Matrix analysis(const Matrix& x) const;
  double value(const Matrix& x) const;
  Matrix gradient(const Matrix& x) const;
  const Matrix& basis_v() const noexcept { return bv_; }

 private:
  Matrix wm_;         // synthesis vectors, n x N
  Matrix bv_;         // orthonormal basis of V, n x d
  Matrix canonical_;  // canonical dual, n x N
  Matrix free_;       // I - M, N x N
  double p_;
};

struct OptimizerOptions {
  int max_iters = 20000;
  double grad_tol = 1e-9;
  double init_scale = 0.5;
  std::uint64_t seed = 0;
};

struct MinimizeResult {
  ObliqueDualPair pair;
  std::vector<double> trajectory;
  int iterations = 0;
  double grad_norm = 0.0;
};

/// Steepest descent with Armijo backtracking (c = 1e-4, shrink 0.5) from a
/// random start; Barzilai-Borwein step as the first trial. Throws
/// NonConvergence if the gradient norm is still above grad_tol at max_iters.
MinimizeResult minimize_dual_potential(const FiniteFrame& f, const Subspace& v, double p,
                                       const OptimizerOptions& opts = {}, const Tolerance& tol = {});

}  // namespace oblique
