#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "oblique/prob_frames.hpp"

namespace oblique {

struct ApproxDualReport {
  /// || F - pi_{WV^perp} ||_2 with F = sum_k g_k x_k y_k^T.
  double epsilon_residual = 0.0;
  /// sigma_max(S_nu^{1/2} (I - F)): the smallest alpha with
  /// int |<f - F f, z>|^2 dnu(z) <= alpha^2 ||f||^2 for every f.
  double consistency_bound = 0.0;
  Coupling coupling_used;
};

ApproxDualReport approx_dual_residual(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                      const Coupling& gamma, const Subspace& w, const Subspace& v,
                                      const Tolerance& tol = {});

struct ConsistencyConversions {
  /// sqrt(B_nu) * epsilon_residual, an upper bound on consistency_bound.
  double to_consistency = 0.0;
  /// consistency_bound * sqrt(M_2((pi_{WV^perp} S_nu^dagger)_# nu)), an upper
  /// bound on epsilon_residual.
  double to_approx = 0.0;
  bool consistency_within = false;
  bool approx_within = false;
};

/// Throws NotAFrame unless nu is a probabilistic frame for V.
ConsistencyConversions consistency_conversions(const ApproxDualReport& report, double b_nu,
                                               const DiscreteMeasure& nu, const Subspace& w,
                                               const Subspace& v, const Tolerance& tol = {});

struct PerturbationOptions {
  /// Lower bound A to certify with. Defaults to min(A_nu, 1/C), the largest
  /// value that is both a valid lower bound of nu and satisfies A*C <= 1.
  std::optional<double> a_override;
};

struct PerturbationCertificate {
  double lambda = 0.0;            // cost of the perturbation coupling
  double a_lower = 0.0;           // A used in the certificate
  double a_nu = 0.0;              // optimal lower frame bound of nu on V
  double c_upper = 0.0;           // upper frame bound of mu on W
  double epsilon = 0.0;           // the requested epsilon
  double epsilon_claimed = 0.0;   // sqrt(lambda / A)
  double epsilon_actual = 0.0;    // residual of the glued coupling
  Coupling glued_coupling;        // coupling of mu with eta
  bool holds = false;             // epsilon_actual <= min(claimed, epsilon) + 1e-9
  bool eta_bound_applicable = false; // lambda < A_nu
  double eta_bound = 0.0;      // (sqrt(A_nu) - sqrt(lambda))^2
  double eta_lower = 0.0;         // optimal lower frame bound of eta on V
  bool eta_bound_holds = true;
};

/// Slack allowed when comparing certified inequalities.
inline constexpr double kCertificateSlack = 1e-9;

/// Glues the exact dual coupling (mu, nu) with a perturbation coupling
/// (nu, eta) and measures how far eta is from being an exact dual.
/// Throws NotADual if gamma_dual is not exact, HypothesisViolated if
/// A*C > 1, A exceeds the true bound of nu, epsilon is outside [0, 1) or
/// lambda > A epsilon^2, and MarginalMismatch on inconsistent couplings.
PerturbationCertificate perturbation_certificate(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                                 const Coupling& gamma_dual, const DiscreteMeasure& eta,
                                                 const Coupling& gamma_pert, double epsilon,
                                                 const Subspace& w, const Subspace& v,
                                                 const PerturbationOptions& opts = {},
                                                 const Tolerance& tol = {});

struct InteriorityOptions {
  /// Target window for W2(nu, eta) as a fraction of sqrt(A) * epsilon.
  double window_lo = 0.9;
  double window_hi = 1.0;
};

struct InteriorityRow {
  int trial = 0;
  double lambda = 0.0;
  double eps_claimed = 0.0;
  double eps_actual = 0.0;
  bool pass = false;
  bool eta_bound_pass = true;
};

struct InteriorityReport {
  double epsilon = 0.0;
  double a_lower = 0.0;
  double c_upper = 0.0;
  int trials = 0;
  int failures = 0;
  int eta_bound_failures = 0;
  double max_eps_actual = 0.0;
  std::vector<InteriorityRow> rows;
};

/// For each trial, jitters the canonical dual of mu inside V (Gaussian noise,
/// RNG stream seeded with seed + trial), rescales the jitter so that
/// W2(nu, eta) lands in the target window, and runs perturbation_certificate
/// with the optimal transport coupling.
InteriorityReport interiority_experiment(const DiscreteMeasure& mu, const Subspace& w,
                                         const Subspace& v, double epsilon, int trials,
                                         std::uint64_t seed, const InteriorityOptions& opts = {},
                                         const Tolerance& tol = {});

}  // namespace oblique
