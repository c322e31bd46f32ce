#include "oblique/prob_frames.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace oblique {

namespace {

// Weighted support X diag(sqrt(w)); its rank is the dimension of span supp(mu).
Matrix weighted_support(const DiscreteMeasure& mu) {
  return mu.points() * mu.weights().cwiseSqrt().asDiagonal();
}

void require_marginals(const Coupling& gamma, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (!weak_equal(gamma.mu(), mu)) {
    throw Error(ErrorCode::MarginalMismatch, "coupling's first marginal is not mu");
  }
  if (!weak_equal(gamma.nu(), nu)) {
    throw Error(ErrorCode::MarginalMismatch, "coupling's second marginal is not nu");
  }
}

}  // namespace

void require_support_in(const DiscreteMeasure& mu, const Subspace& w, const Tolerance& tol) {
  if (mu.ambient_dim() != w.ambient_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "measure and subspace live in different spaces");
  }
  for (Index k = 0; k < mu.size(); ++k) {
    if (mu.weight(k) <= 0.0) continue;
    const double off = w.distance(mu.point(k));
    if (off > tol.eq_tol * std::max(1.0, mu.point(k).norm())) {
      throw Error(ErrorCode::SupportOutsideSubspace,
                  "atom " + std::to_string(k) + " is " + std::to_string(off) + " away from the subspace");
    }
  }
}

MeasureFrameReport classify_probabilistic_frame(const DiscreteMeasure& mu, const Subspace& w,
                                                const Tolerance& tol) {
  require_support_in(mu, w, tol);
  MeasureFrameReport r;
  r.second_moment = second_moment(mu);
  r.frame_operator = measure_frame_operator(mu);
  r.is_frame = numerical_rank(weighted_support(mu), tol) == w.dim();
  if (!r.is_frame) return r;
  const auto [lo, hi] = restricted_extreme_eigenvalues(r.frame_operator, w);
  r.bounds = FrameBounds{lo, hi};
  r.is_tight = spectral_norm(r.frame_operator - lo * orthogonal_projection(w)) <= tol.eq_tol;
  r.is_parseval = r.is_tight && std::abs(lo - 1.0) <= tol.eq_tol;
  return r;
}

FrameBounds measure_frame_bounds(const DiscreteMeasure& mu, const Subspace& w, const Tolerance& tol) {
  const MeasureFrameReport r = classify_probabilistic_frame(mu, w, tol);
  if (!r.is_frame) throw Error(ErrorCode::NotAFrame, "support of the measure does not span W");
  return *r.bounds;
}

Matrix canonical_dual_map(const DiscreteMeasure& mu, const Subspace& w, const Subspace& v,
                          const Tolerance& tol) {
  measure_frame_bounds(mu, w, tol);
  return oblique_projection(v, w, tol) * pseudoinverse(measure_frame_operator(mu), tol);
}

DualMeasure canonical_dual_measure(const DiscreteMeasure& mu, const Subspace& w, const Subspace& v,
                                   const Tolerance& tol) {
  DiscreteMeasure nu = pushforward(mu, canonical_dual_map(mu, w, v, tol));
  Coupling gamma = graph_coupling(mu, nu);
  return {std::move(nu), std::move(gamma)};
}

MeasureDualCheck is_oblique_dual_measure(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                         const Coupling& gamma, const Subspace& w, const Subspace& v,
                                         const Tolerance& tol) {
  require_marginals(gamma, mu, nu);
  require_support_in(mu, w, tol);
  require_support_in(nu, v, tol);
  const Matrix pi_wv = oblique_projection(w, v, tol);
  const Matrix pi_vw = pi_wv.transpose();
  const Matrix f_mom = gamma.moment();

  MeasureDualCheck out;
  out.residual = spectral_norm(f_mom - pi_wv);
  out.is_dual = out.residual <= tol.eq_tol;

  // The same identity read five ways: reconstruction on W, on R^n, its
  // adjoint, and the two bilinear forms. Fixed probes keep this deterministic.
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Index n = mu.ambient_dim();
  const Matrix p_w = orthogonal_projection(w);
  auto unit = [&] {
    Vector f(n);
    for (Index i = 0; i < n; ++i) f(i) = gauss(rng);
    return Vector(f / f.norm());
  };
  std::array<double, 5>& c = out.condition_residuals;
  c.fill(0.0);
  for (int probe = 0; probe < 16; ++probe) {
    const Vector f = unit();
    const Vector g = unit();
    const Vector fw = p_w * f;
    c[0] = std::max(c[0], (fw - f_mom * fw).norm());
    c[1] = std::max(c[1], (pi_wv * f - f_mom * f).norm());
    c[2] = std::max(c[2], (pi_vw * f - f_mom.transpose() * f).norm());
    c[3] = std::max(c[3], std::abs(g.dot(pi_wv * f) - g.dot(f_mom * f)));
    c[4] = std::max(c[4], std::abs(g.dot(pi_vw * f) - g.dot(f_mom.transpose() * f)));
  }
  for (double r : c) {
    if ((r <= tol.eq_tol) != out.is_dual) out.equivalences_agree = false;
  }
  return out;
}

DualMap pushforward_dual_map(const DiscreteMeasure& mu, const Subspace& w, const Subspace& v,
                             const DualMap& h, const Tolerance& tol) {
  const Matrix s_pinv = pseudoinverse(measure_frame_operator(mu), tol);
  const Matrix t0 = canonical_dual_map(mu, w, v, tol);
  auto checked_h = [h, v, eq = tol.eq_tol](const Vector& x) {
    Vector hx = h(x);
    if (hx.size() != v.ambient_dim() || v.distance(hx) > eq * std::max(1.0, hx.norm())) {
      throw Error(ErrorCode::RangeViolation, "h maps a point outside V");
    }
    return hx;
  };
  // sum_k m_k <S^dagger x, x_k> h(x_k) = (H diag(m) X^T S^dagger) x.
  Matrix hx(mu.ambient_dim(), mu.size());
  for (Index k = 0; k < mu.size(); ++k) hx.col(k) = checked_h(mu.point(k));
  const Matrix correction = hx * mu.weights().asDiagonal() * mu.points().transpose() * s_pinv;
  return [t0, correction, checked_h](const Vector& x) -> Vector {
    return t0 * x + checked_h(x) - correction * x;
  };
}

DualMeasure pushforward_dual(const DiscreteMeasure& mu, const DualMap& t) {
  DiscreteMeasure nu = pushforward(mu, t);
  Coupling gamma = graph_coupling(mu, nu);
  return {std::move(nu), std::move(gamma)};
}

DualMeasure transfer_dual_to_k(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                               const Coupling& gamma, const Subspace& w, const Subspace& k,
                               const Tolerance& tol) {
  require_marginals(gamma, mu, nu);
  const Matrix pi_kw = oblique_projection(k, w, tol);
  const Matrix f_mom = gamma.moment();
  const double off = spectral_norm(f_mom * w.basis() - w.basis());
  if (off > tol.eq_tol) {
    throw Error(ErrorCode::HypothesisViolated,
                "coupling moment is not the identity on W (residual " + std::to_string(off) + ")");
  }
  DiscreteMeasure nu_k = pushforward(nu, pi_kw);
  Coupling gamma_k(gamma.x(), pi_kw * gamma.y(), gamma.weights(), gamma.mu(), nu_k);
  return {std::move(nu_k), std::move(gamma_k)};
}

double probabilistic_consistency_check(const DiscreteMeasure& nu, const Coupling& gamma,
                                       const std::vector<Vector>& probes) {
  const Matrix f_mom = gamma.moment();
  const Matrix z = nu.support();
  double worst = 0.0;
  for (const Vector& f : probes) {
    if (f.size() != f_mom.cols()) throw Error(ErrorCode::DimensionMismatch, "probe has wrong length");
    const Vector diff = f - f_mom * f;
    worst = std::max(worst, (z.transpose() * diff).cwiseAbs().maxCoeff());
  }
  return worst;
}

PfPotentialReport pf_dual_potential(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                    const Coupling& gamma, const Subspace& w, const Subspace& v,
                                    DualType type, std::optional<FrameBounds> mu_bounds,
                                    const Tolerance& tol) {
  const MeasureDualCheck check = is_oblique_dual_measure(mu, nu, gamma, w, v, tol);
  if (!check.is_dual) {
    throw Error(ErrorCode::NotADual,
                "coupling residual " + std::to_string(check.residual) + " exceeds tolerance");
  }
  const MeasureFrameReport mu_report = classify_probabilistic_frame(mu, w, tol);
  if (!mu_report.is_frame) throw Error(ErrorCode::NotAFrame, "mu does not span W");

  PfPotentialReport r;
  r.p = 2.0;
  r.type = type;
  r.mu_bounds = mu_bounds.value_or(*mu_report.bounds);
  r.value = (mu_report.frame_operator * measure_frame_operator(nu)).trace();
  const auto dw = static_cast<double>(w.dim());
  const Matrix t0 = canonical_dual_map(mu, w, v, tol);

  if (type == DualType::Pushforward) {
    // The coupling must be a graph: atoms of mu at one position go to one y.
    const Matrix& gx = gamma.x();
    const Matrix& gy = gamma.y();
    for (Index a = 0; a < gamma.size(); ++a) {
      if (gamma.weights()(a) <= 0.0) continue;
      for (Index b = a + 1; b < gamma.size(); ++b) {
        if (gamma.weights()(b) <= 0.0) continue;
        if ((gx.col(a) - gx.col(b)).lpNorm<Eigen::Infinity>() <= kAtomTol &&
            (gy.col(a) - gy.col(b)).lpNorm<Eigen::Infinity>() > kAtomTol) {
          throw Error(ErrorCode::HypothesisViolated, "coupling is not of pushforward type");
        }
      }
    }
    double dist = 0.0;
    for (Index a = 0; a < gamma.size(); ++a) {
      if (gamma.weights()(a) > 0.0) dist = std::max(dist, (gy.col(a) - t0 * gx.col(a)).norm());
    }
    r.canonical_distance = dist;
    r.lower_bound = dw;
    r.equality_condition = dist <= kCanonicalMapTol;
  } else {
    r.lower_bound = r.mu_bounds.lower / r.mu_bounds.upper * dw;
    r.equality_condition =
        mu_report.is_tight && weak_equal(nu, pushforward(mu, t0), kCanonicalMapTol);
  }
  r.gap = r.value - *r.lower_bound;
  r.saturated = *r.gap <= r.saturation_tol;
  return r;
}

MinimalEnergy minimal_energy_coefficients(const DiscreteMeasure& mu, const Subspace& w,
                                          const Subspace& v, const Vector& f, const Tolerance& tol) {
  if (f.size() != mu.ambient_dim()) throw Error(ErrorCode::DimensionMismatch, "f has wrong length");
  const Matrix t0 = canonical_dual_map(mu, w, v, tol);
  MinimalEnergy out;
  out.omega = (t0 * mu.points()).transpose() * f;
  out.energy = out.omega.cwiseAbs2().dot(mu.weights());
  const Vector synth = mu.points() * mu.weights().asDiagonal() * out.omega;
  out.synthesis_residual = (synth - oblique_projection(w, v, tol) * f).norm();
  return out;
}

}  // namespace oblique
