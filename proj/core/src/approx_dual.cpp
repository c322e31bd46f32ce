#include "oblique/approx_dual.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace oblique {

ApproxDualReport approx_dual_residual(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                      const Coupling& gamma, const Subspace& w, const Subspace& v,
                                      const Tolerance& tol) {
  if (!weak_equal(gamma.mu(), mu) || !weak_equal(gamma.nu(), nu)) {
    throw Error(ErrorCode::MarginalMismatch, "coupling marginals are not (mu, nu)");
  }
  const Matrix pi = oblique_projection(w, v, tol);
  const Matrix f_mom = gamma.moment();
  const Index n = f_mom.rows();
  const Matrix root = psd_sqrt(measure_frame_operator(nu));
  return {spectral_norm(f_mom - pi), spectral_norm(root * (Matrix::Identity(n, n) - f_mom)), gamma};
}

ConsistencyConversions consistency_conversions(const ApproxDualReport& report, double b_nu,
                                               const DiscreteMeasure& nu, const Subspace& w,
                                               const Subspace& v, const Tolerance& tol) {
  measure_frame_bounds(nu, v, tol);
  if (!(b_nu > 0.0)) throw Error(ErrorCode::InvalidArgument, "upper bound of nu must be positive");
  const Matrix map = oblique_projection(w, v, tol) * pseudoinverse(measure_frame_operator(nu), tol);
  ConsistencyConversions out;
  out.to_consistency = std::sqrt(b_nu) * report.epsilon_residual;
  out.to_approx = report.consistency_bound * std::sqrt(second_moment(pushforward(nu, map)));
  out.consistency_within = report.consistency_bound <= out.to_consistency + kCertificateSlack;
  out.approx_within = report.epsilon_residual <= out.to_approx + kCertificateSlack;
  return out;
}

PerturbationCertificate perturbation_certificate(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                                 const Coupling& gamma_dual, const DiscreteMeasure& eta,
                                                 const Coupling& gamma_pert, double epsilon,
                                                 const Subspace& w, const Subspace& v,
                                                 const PerturbationOptions& opts,
                                                 const Tolerance& tol) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) {
    throw Error(ErrorCode::HypothesisViolated, "epsilon must lie in [0, 1)");
  }
  const MeasureDualCheck exact = is_oblique_dual_measure(mu, nu, gamma_dual, w, v, tol);
  if (!exact.is_dual) {
    throw Error(ErrorCode::NotADual,
                "dual coupling residual " + std::to_string(exact.residual) + " exceeds tolerance");
  }
  if (!weak_equal(gamma_pert.mu(), nu) || !weak_equal(gamma_pert.nu(), eta)) {
    throw Error(ErrorCode::MarginalMismatch, "perturbation coupling marginals are not (nu, eta)");
  }

  PerturbationCertificate cert{.glued_coupling = gamma_dual};
  cert.epsilon = epsilon;
  cert.c_upper = measure_frame_bounds(mu, w, tol).upper;
  cert.a_nu = measure_frame_bounds(nu, v, tol).lower;
  if (opts.a_override) {
    cert.a_lower = *opts.a_override;
    if (!(cert.a_lower > 0.0) || cert.a_lower > cert.a_nu * (1.0 + kCertificateSlack)) {
      throw Error(ErrorCode::HypothesisViolated,
                  "A = " + std::to_string(cert.a_lower) + " is not a lower frame bound of nu (" +
                      std::to_string(cert.a_nu) + ")");
    }
  } else {
    cert.a_lower = std::min(cert.a_nu, 1.0 / cert.c_upper);
  }
  if (cert.a_lower * cert.c_upper > 1.0 + kCertificateSlack) {
    throw Error(ErrorCode::HypothesisViolated,
                "A*C = " + std::to_string(cert.a_lower * cert.c_upper) + " exceeds 1");
  }

  cert.lambda = coupling_cost(gamma_pert);
  const double budget = cert.a_lower * epsilon * epsilon;
  if (cert.lambda > budget + kCertificateSlack * std::max(1.0, budget)) {
    throw Error(ErrorCode::HypothesisViolated,
                "transport cost " + std::to_string(cert.lambda) + " exceeds A*eps^2 = " +
                    std::to_string(budget));
  }
  cert.epsilon_claimed = std::sqrt(cert.lambda / cert.a_lower);

  cert.glued_coupling = glue(gamma_dual, gamma_pert).project_xz();
  cert.epsilon_actual =
      spectral_norm(cert.glued_coupling.moment() - oblique_projection(w, v, tol));
  cert.holds = cert.epsilon_actual <= std::min(cert.epsilon_claimed, epsilon) + kCertificateSlack;

  cert.eta_bound_applicable = cert.lambda < cert.a_nu;
  if (cert.eta_bound_applicable) {
    const double gap = std::sqrt(cert.a_nu) - std::sqrt(cert.lambda);
    cert.eta_bound = gap * gap;
    const MeasureFrameReport eta_report = classify_probabilistic_frame(eta, v, tol);
    cert.eta_lower = eta_report.bounds ? eta_report.bounds->lower : 0.0;
    cert.eta_bound_holds = eta_report.is_frame && cert.eta_lower >= cert.eta_bound - kCertificateSlack;
  }
  return cert;
}

InteriorityReport interiority_experiment(const DiscreteMeasure& mu, const Subspace& w,
                                         const Subspace& v, double epsilon, int trials,
                                         std::uint64_t seed, const InteriorityOptions& opts,
                                         const Tolerance& tol) {
  if (trials < 0) throw Error(ErrorCode::InvalidArgument, "trials must be nonnegative");
  if (!(opts.window_lo > 0.0 && opts.window_lo <= opts.window_hi && opts.window_hi <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "W2 window must satisfy 0 < lo <= hi <= 1");
  }
  const DualMeasure dual = canonical_dual_measure(mu, w, v, tol);
  const DiscreteMeasure& nu = dual.nu;

  InteriorityReport report;
  report.epsilon = epsilon;
  report.trials = trials;
  report.c_upper = measure_frame_bounds(mu, w, tol).upper;
  report.a_lower = std::min(measure_frame_bounds(nu, v, tol).lower, 1.0 / report.c_upper);
  const double radius = std::sqrt(report.a_lower) * epsilon;
  const Matrix p_v = orthogonal_projection(v);

  for (int t = 0; t < trials; ++t) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(t));
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix jitter(nu.ambient_dim(), nu.size());
    for (Index k = 0; k < jitter.cols(); ++k) {
      for (Index i = 0; i < jitter.rows(); ++i) jitter(i, k) = gauss(rng);
    }
    jitter = p_v * jitter;

    auto eta_at = [&](double s) { return DiscreteMeasure(nu.points() + s * jitter, nu.weights()); };
    std::optional<W2Result> fit;
    std::optional<DiscreteMeasure> eta;
    if (radius == 0.0 || jitter.norm() == 0.0) {
      eta = nu;
    } else {
      // Bisection on the global scale s; W2(nu, eta(s)) is continuous in s
      // and vanishes at s = 0.
      double lo = 0.0;
      double hi = radius / std::sqrt(jitter.colwise().squaredNorm().dot(nu.weights()));
      while (exact_w2(nu, eta_at(hi)).distance <= radius * opts.window_hi) hi *= 2.0;
      double best = lo;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        W2Result r = exact_w2(nu, eta_at(mid));
        if (r.distance > radius * opts.window_hi) {
          hi = mid;
        } else {
          lo = mid;
          best = mid;
          if (r.distance >= radius * opts.window_lo) break;
        }
      }
      eta = eta_at(best);
    }
    fit = exact_w2(nu, *eta);
    const PerturbationCertificate cert = perturbation_certificate(
        mu, nu, dual.gamma, *eta, fit->coupling, epsilon, w, v, {report.a_lower}, tol);

    InteriorityRow row{t, cert.lambda, cert.epsilon_claimed, cert.epsilon_actual,
                       cert.holds && cert.epsilon_actual <= epsilon + kCertificateSlack,
                       cert.eta_bound_holds};
    if (!row.pass) ++report.failures;
    if (!row.eta_bound_pass) ++report.eta_bound_failures;
    report.max_eps_actual = std::max(report.max_eps_actual, row.eps_actual);
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace oblique
