#pragma once

#include <array>
#include <functional>
#include <optional>

#include "oblique/measure.hpp"
#include "oblique/potentials.hpp"
#include "oblique/transport.hpp"

namespace oblique {

struct MeasureFrameReport {
  double second_moment = 0.0;
  Matrix frame_operator;
  bool is_frame = false;
  std::optional<FrameBounds> bounds;
  bool is_tight = false;
  bool is_parseval = false;
};

/// Throws SupportOutsideSubspace if an atom of positive weight leaves W.
void require_support_in(const DiscreteMeasure& mu, const Subspace& w, const Tolerance& tol = {});

MeasureFrameReport classify_probabilistic_frame(const DiscreteMeasure& mu, const Subspace& w,
                                                const Tolerance& tol = {});

/// Frame bounds of mu on W; throws NotAFrame if mu does not span W.
FrameBounds measure_frame_bounds(const DiscreteMeasure& mu, const Subspace& w, const Tolerance& tol = {});

/// pi_{VW^perp} S_mu^dagger, the canonical dual map.
Matrix canonical_dual_map(const DiscreteMeasure& mu, const Subspace& w, const Subspace& v,
                          const Tolerance& tol = {});

struct DualMeasure {
  DiscreteMeasure nu;
  Coupling gamma;
};

/// nu = (pi_{VW^perp} S_mu^dagger)_# mu with the graph coupling.
DualMeasure canonical_dual_measure(const DiscreteMeasure& mu, const Subspace& w, const Subspace& v,
                                   const Tolerance& tol = {});

struct MeasureDualCheck {
  bool is_dual = false;
  double residual = 0.0;
  /// The five equivalent reconstruction identities evaluated on random probes
  /// all reached the same verdict as `is_dual`.
  bool equivalences_agree = true;
  std::array<double, 5> condition_residuals{};
};

/// Residual || sum_k g_k x_k y_k^T - pi_{WV^perp} ||_2. Throws MarginalMismatch
/// if gamma's marginals differ from (mu, nu) and SupportOutsideSubspace if mu
/// leaves W or nu leaves V.
MeasureDualCheck is_oblique_dual_measure(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                         const Coupling& gamma, const Subspace& w, const Subspace& v,
                                         const Tolerance& tol = {});

using DualMap = std::function<Vector(const Vector&)>;

/// T(x) = pi_{VW^perp} S^dagger x + h(x) - sum_k m_k <S^dagger x, x_k> h(x_k).
/// Throws RangeViolation when h leaves V (checked on the support eagerly and
/// on every later evaluation).
DualMap pushforward_dual_map(const DiscreteMeasure& mu, const Subspace& w, const Subspace& v,
                             const DualMap& h, const Tolerance& tol = {});

/// T_# mu with its graph coupling.
DualMeasure pushforward_dual(const DiscreteMeasure& mu, const DualMap& t);

/// Moves a dual of mu from V to K by pushing it through pi_{KW^perp}.
/// Throws HypothesisViolated unless gamma's moment acts as the identity on W.
DualMeasure transfer_dual_to_k(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                               const Coupling& gamma, const Subspace& w, const Subspace& k,
                               const Tolerance& tol = {});

/// Max over probes f and atoms z of nu of |<f - fhat, z>|, fhat = F f.
double probabilistic_consistency_check(const DiscreteMeasure& nu, const Coupling& gamma,
                                       const std::vector<Vector>& probes);

enum class DualType { Pushforward, General };

struct PfPotentialReport : PotentialReport {
  DualType type = DualType::General;
  FrameBounds mu_bounds;
  /// Pushforward: the map is the canonical one on every atom. General: mu is
  /// tight and nu is the canonical pushforward.
  bool equality_condition = false;
  /// Largest ||T(x_k) - T_0(x_k)|| over atoms (pushforward type only).
  std::optional<double> canonical_distance;
};

/// Atom distance below which a pushforward map counts as the canonical one.
inline constexpr double kCanonicalMapTol = 1e-6;

/// trace(S_mu S_nu) with lower bound d_W (pushforward type) or (A/B) d_W.
/// Throws NotADual if gamma does not certify duality; HypothesisViolated if
/// Pushforward is requested for a coupling that is not a graph.
PfPotentialReport pf_dual_potential(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                    const Coupling& gamma, const Subspace& w, const Subspace& v,
                                    DualType type, std::optional<FrameBounds> mu_bounds = std::nullopt,
                                    const Tolerance& tol = {});

struct MinimalEnergy {
  Vector omega;
  double energy = 0.0;
  /// || sum_k m_k x_k omega_k - pi_{WV^perp} f ||.
  double synthesis_residual = 0.0;
};

MinimalEnergy minimal_energy_coefficients(const DiscreteMeasure& mu, const Subspace& w,
                                          const Subspace& v, const Vector& f,
                                          const Tolerance& tol = {});

}  // namespace oblique
