// Acceptance suite: prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>

#include "fixture_io.hpp"
#include "support/generators.hpp"

namespace oblique {
namespace {

namespace fs = std::filesystem;
using testing::Rng;
using testing::vec2;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail << "first failure: " << what << "; ";
    pass = pass && ok;
  }
};

std::vector<testing::RandomCase> random_suite(std::uint64_t seed, int count, testing::CaseOptions opt = {}) {
  Rng rng(seed);
  std::vector<testing::RandomCase> out;
  for (int i = 0; i < count; ++i) out.push_back(testing::random_case(rng, opt));
  return out;
}

DualMap bent_map(const Subspace& v, const Matrix& r, double s) {
  return [&v, r, s](const Vector& x) -> Vector { return s * v.basis() * r * x.array().tanh().matrix(); };
}

double max_atom_move(const DualMeasure& d, const DiscreteMeasure& mu, const Matrix& t0) {
  double m = 0.0;
  for (Index k = 0; k < mu.size(); ++k) m = std::max(m, (d.nu.point(k) - t0 * mu.point(k)).norm());
  return m;
}

/// Random pushforward dual whose map moves some atom by exactly `size`.
DualMeasure sized_pushforward_dual(Rng& rng, const testing::RandomCase& c, double size) {
  const Matrix t0 = canonical_dual_map(c.mu, c.w, c.v);
  for (int attempt = 0; attempt < 100; ++attempt) {
    const Matrix r = testing::gaussian(rng, c.d, c.n);
    const double unit = max_atom_move(pushforward_dual(c.mu, pushforward_dual_map(c.mu, c.w, c.v, bent_map(c.v, r, 1.0))),
                                      c.mu, t0);
    if (unit < 1e-6) continue;
    return pushforward_dual(c.mu, pushforward_dual_map(c.mu, c.w, c.v, bent_map(c.v, r, size / unit)));
  }
  throw std::runtime_error("no non-canonical pushforward dual found");
}

// 1 -------------------------------------------------------------------------
Outcome example_replication() {
  Outcome o;
  const testing::SkewLine ex;
  const Matrix pi = oblique_projection(ex.w, ex.v);
  const Matrix pi_t = oblique_projection(ex.v, ex.w);
  const Matrix s = measure_frame_operator(ex.mu);
  const Matrix diag10 = (Matrix(2, 2) << 1, 0, 0, 0).finished();
  const double e1 = (pi - (Matrix(2, 2) << 1, 1, 0, 0).finished()).cwiseAbs().maxCoeff();
  const double e2 = (pi_t - (Matrix(2, 2) << 1, 0, 1, 0).finished()).cwiseAbs().maxCoeff();
  const double e3 = (s - diag10).cwiseAbs().maxCoeff();
  const double e4 = (pseudoinverse(s) - diag10).cwiseAbs().maxCoeff();
  const MeasureDualCheck chk = is_oblique_dual_measure(ex.mu, ex.nu, product_coupling(ex.mu, ex.nu), ex.w, ex.v);
  o.require(e1 <= 1e-12, "pi_WV");
  o.require(e2 <= 1e-12, "pi_VW");
  o.require(e3 <= 1e-12 && e4 <= 1e-12, "S_mu and its pseudoinverse");
  o.require(chk.is_dual && chk.residual < 1e-12, "product coupling duality");
  o.detail << "projection errors " << std::max(e1, e2) << ", S errors " << std::max(e3, e4) << ", residual "
           << chk.residual;
  return o;
}

// 2 -------------------------------------------------------------------------
Outcome sharpness() {
  Outcome o;
  Rng rng(2024);
  double worst_canon = 0.0, min_excess = 1e300;
  int noncanonical = 0;
  for (const testing::RandomCase& c : random_suite(1001, 50)) {
    const ObliqueDualPair canon = canonical_oblique_dual(c.frame, c.v);
    const DualMeasure dm = canonical_dual_measure(c.mu, c.w, c.v);
    const double d = static_cast<double>(c.d);
    const double finite = dual_p_potential(canon, 2).value;
    const double prob = pf_dual_potential(c.mu, dm.nu, dm.gamma, c.w, c.v, DualType::Pushforward).value;
    worst_canon = std::max({worst_canon, std::abs(finite - d), std::abs(prob - d)});
  }
  for (const testing::RandomCase& c : random_suite(1002, 50, {.strictly_redundant = true})) {
    const double d = static_cast<double>(c.d);
    const ObliqueDualPair pair =
        oblique_dual_family(c.frame, c.v, testing::noncanonical_h(rng, c, testing::uniform_real(rng, 0.1, 1.0)));
    min_excess = std::min(min_excess, dual_p_potential(pair, 2).value - d);
    const DualMeasure pm = sized_pushforward_dual(rng, c, testing::uniform_real(rng, 0.1, 1.0));
    min_excess = std::min(
        min_excess, pf_dual_potential(c.mu, pm.nu, pm.gamma, c.w, c.v, DualType::Pushforward).value - d);
    noncanonical += 2;
  }
  o.require(worst_canon <= 1e-9, "canonical potential equals d_W");
  o.require(min_excess > 1e-6, "non-canonical potential exceeds d_W");
  o.detail << "max |canonical - d_W| " << worst_canon << " over 50 fixtures; min excess " << min_excess << " over "
           << noncanonical << " non-canonical duals";
  return o;
}

// 3 -------------------------------------------------------------------------
Outcome welch_saturation() {
  Outcome o;
  const ObliqueDualPair mb = canonical_oblique_dual(testing::mercedes_benz(), Subspace::full(2));
  const CoherenceReport r = mixed_coherence(mb);
  const MixedGram g = mixed_gram(mb);
  const EtfLift lift = etf_lift(testing::mercedes_benz());
  const double coh_err = std::abs(r.max_off_diagonal_sq - 1.0 / 9.0);
  const double bound_err = std::abs(r.welch_bound - 2.0 * (3.0 - 2.0) / (9.0 * 2.0));
  double q_err = g.q ? 0.0 : 1.0;
  if (g.q) {
    for (Index i = 0; i < 3; ++i)
      for (Index j = 0; j < 3; ++j) q_err = std::max(q_err, i == j ? std::abs((*g.q)(i, j)) : std::abs(std::abs((*g.q)(i, j)) - 1.0));
  }
  o.require(coh_err <= 1e-12 && bound_err <= 1e-12 && r.saturated, "coherence equals 1/9");
  o.require(q_err <= 1e-9, "signature matrix entries");
  o.require(lift.is_equiangular_tight && lift.psi.size() == 3 && lift.psi.subspace().dim() == 2, "(3,2)-ETF lift");
  o.detail << "coherence error " << coh_err << ", Q error " << q_err << ", ETF " << lift.is_equiangular_tight;
  return o;
}

// 4 -------------------------------------------------------------------------
Outcome even_exponent_chains() {
  Outcome o;
  Rng rng(4);
  double worst_slack = 0.0;
  double min_gap_off = 1e300;
  int checks = 0;
  auto audit = [&](const ObliqueDualPair& pair, bool expect_full_eq, bool expect_diag_eq, const std::string& label) {
    const Matrix g = mixed_gram_matrix(pair);
    const double n = static_cast<double>(g.rows());
    const double d = static_cast<double>(pair.synthesis.subspace().dim());
    // Equality conditions stated directly on the mixed Gram matrix.
    const bool diag_eq = (g.diagonal().array() - d / n).abs().maxCoeff() <= 1e-9;
    const bool full_eq = (g.array().abs2() - d / (n * n)).abs().maxCoeff() <= 1e-9;
    if (expect_full_eq) o.require(full_eq, label + ": full equality condition");
    if (expect_diag_eq) o.require(diag_eq, label + ": diagonal equality condition");
    for (double p : {4.0, 6.0}) {
      const PotentialReport full = dual_p_potential(pair, p);
      const PotentialReport diag = diagonal_potential(pair, p);
      worst_slack = std::min({worst_slack, *full.gap, *diag.gap});
      o.require(*full.gap >= -1e-9 && *diag.gap >= -1e-9, label + ": lower bound");
      if (full.constant_diagonal_bound) {
        worst_slack = std::min(worst_slack, full.value - *full.constant_diagonal_bound);
        o.require(full.value - *full.constant_diagonal_bound >= -1e-9, label + ": constant-diagonal bound");
      }
      if (full_eq) {
        o.require(*full.gap <= 1e-9, label + ": full bound attained");
      } else {
        o.require(*full.gap > 1e-6, label + ": full bound strict");
        min_gap_off = std::min(min_gap_off, *full.gap);
      }
      if (diag_eq) {
        o.require(*diag.gap <= 1e-9, label + ": diagonal bound attained");
      } else {
        o.require(*diag.gap > 1e-6, label + ": diagonal bound strict");
        min_gap_off = std::min(min_gap_off, *diag.gap);
      }
      ++checks;
    }
  };
  for (const testing::RandomCase& c : random_suite(1001, 50)) {
    audit(canonical_oblique_dual(c.frame, c.v), false, false, "random canonical");
    const Matrix h = testing::noncanonical_h(rng, c, 0.5);
    if (h.size()) audit(oblique_dual_family(c.frame, c.v, h), false, false, "random family");
  }
  // Saturating constructions.
  const FiniteFrame pm((Matrix(2, 2) << 1, -1, 0, 0).finished(), testing::span1(1, 0));
  audit(canonical_oblique_dual(pm, testing::span1(1, 0)), true, true, "{e1,-e1}");
  const ObliqueDualPair mb = canonical_oblique_dual(testing::mercedes_benz(), Subspace::full(2));
  audit(mb, false, true, "Mercedes-Benz");
  for (double p : {4.0, 6.0}) {
    const PotentialReport r = dual_p_potential(mb, p);
    o.require(std::abs(r.value - *r.constant_diagonal_bound) <= 1e-9, "Mercedes-Benz constant-diagonal bound attained");
  }
  o.detail << checks << " (pair, p) audits; worst slack " << worst_slack << "; min strict gap " << min_gap_off;
  return o;
}

// 5 -------------------------------------------------------------------------
Outcome general_bound() {
  Outcome o;
  const DiscreteMeasure mb = testing::mercedes_benz_measure();
  const Subspace r2 = Subspace::full(2);
  const DualMeasure canon = canonical_dual_measure(mb, r2, r2);
  const PfPotentialReport tight = pf_dual_potential(mb, canon.nu, canon.gamma, r2, r2, DualType::General);
  const double err = std::max(std::abs(tight.value - 2.0), std::abs(*tight.lower_bound - 2.0));
  o.require(err <= 1e-12, "tight Mercedes-Benz value equals (A/B) d_W = 2");

  Rng rng(5);
  Rng cases(1005);
  int trials = 0;
  double min_gap = 1e300;
  while (trials < 100) {
    // N > d atoms, otherwise every pushforward dual is canonical.
    const testing::RandomCase c = testing::random_case(cases, {.strictly_redundant = true});
    if (c.d < 2 || classify_probabilistic_frame(c.mu, c.w).is_tight) continue;
    DualMeasure d = canonical_dual_measure(c.mu, c.w, c.v);
    if (trials % 3 == 1) d = sized_pushforward_dual(rng, c, testing::uniform_real(rng, 0.1, 1.0));
    if (trials % 3 == 2) {
      // Non-pushforward: half mass on each of two pushforward duals.
      const DualMeasure a = sized_pushforward_dual(rng, c, 0.5);
      const DualMeasure b = sized_pushforward_dual(rng, c, 0.5);
      const Index m = c.mu.size();
      Matrix x(c.n, 2 * m), y(c.n, 2 * m);
      Vector w(2 * m);
      x << c.mu.points(), c.mu.points();
      y << a.nu.points(), b.nu.points();
      w << 0.5 * c.mu.weights(), 0.5 * c.mu.weights();
      const Coupling split = Coupling::from_pairs(x, y, w);
      d = DualMeasure{split.nu(), split};
    }
    const PfPotentialReport r = pf_dual_potential(c.mu, d.nu, d.gamma, c.w, c.v, DualType::General);
    o.require(*r.gap >= -1e-9, "value >= (A/B) d_W");
    o.require(*r.gap > 1e-6 && !r.equality_condition, "no equality for non-tight mu");
    min_gap = std::min(min_gap, *r.gap);
    ++trials;
  }
  o.detail << "tight error " << err << "; min gap " << min_gap << " over " << trials << " non-tight trials";
  return o;
}

// 6 -------------------------------------------------------------------------
Outcome transport() {
  Outcome o;
  Rng rng(6);
  double oracle_err = 0.0, metric_err = 0.0, gap = 0.0;
  auto solve = [&](const DiscreteMeasure& a, const DiscreteMeasure& b) {
    const W2Result r = exact_w2(a, b);
    gap = std::max(gap, r.certificate.dual_gap);
    return r.distance;
  };
  for (int t = 0; t < 100; ++t) {
    const DiscreteMeasure a = testing::random_measure_1d(rng, 12);
    const DiscreteMeasure b = testing::random_measure_1d(rng, 12);
    std::vector<std::pair<double, double>> pa, pb;
    for (Index k = 0; k < a.size(); ++k) pa.emplace_back(a.points()(0, k), a.weight(k));
    for (Index k = 0; k < b.size(); ++k) pb.emplace_back(b.points()(0, k), b.weight(k));
    oracle_err = std::max(oracle_err, std::abs(solve(a, b) - testing::oracle_w2_1d(pa, pb)));
  }
  for (int t = 0; t < 50; ++t) {
    const Index n = testing::uniform_int(rng, 1, 4);
    const DiscreteMeasure a = testing::random_measure(rng, n, 10);
    const DiscreteMeasure b = testing::random_measure(rng, n, 10);
    const DiscreteMeasure c = testing::random_measure(rng, n, 10);
    const double ab = solve(a, b), ba = solve(b, a), bc = solve(b, c), ac = solve(a, c), aa = solve(a, a);
    metric_err = std::max({metric_err, std::abs(ab - ba), ac - ab - bc, aa});
    o.require(ab > 1e-9, "distinct measures at positive distance");
  }
  o.require(oracle_err <= 1e-9, "1-D quantile oracle");
  o.require(metric_err <= 1e-9, "metric axioms");
  o.require(gap <= 1e-9, "duality gap");
  o.detail << "oracle error " << oracle_err << ", metric error " << metric_err << ", max dual gap " << gap;
  return o;
}

// 7 -------------------------------------------------------------------------
Outcome interiority() {
  Outcome o;
  const testing::SkewLine ex;
  const Subspace r2 = Subspace::full(2);
  double worst = 0.0;
  int runs = 0;
  for (double eps : {0.05, 0.1, 0.5}) {
    const InteriorityReport mb = interiority_experiment(testing::mercedes_benz_measure(), r2, r2, eps, 100, 700);
    const InteriorityReport e48 = interiority_experiment(ex.mu, ex.w, ex.v, eps, 100, 700);
    for (const InteriorityReport* r : {&mb, &e48}) {
      o.require(r->trials == 100 && r->failures == 0, "epsilon_actual <= eps");
      o.require(r->eta_bound_failures == 0, "perturbed lower frame bound");
      worst = std::max(worst, r->max_eps_actual / eps);
      ++runs;
    }
  }
  o.detail << runs << " runs x 100 trials; max epsilon_actual / eps = " << worst;
  return o;
}

// 8 -------------------------------------------------------------------------
Outcome minimal_energy() {
  Outcome o;
  Rng rng(8);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const testing::RandomCase c = testing::random_case(rng);
    const Vector f = testing::gaussian(rng, c.n, 1);
    const MinimalEnergy me = minimal_energy_coefficients(c.mu, c.w, c.v, f);
    const Vector oracle = testing::oracle_min_energy(c.mu, oblique_projection(c.w, c.v) * f);
    worst = std::max({worst, std::abs(me.energy - oracle.cwiseAbs2().dot(c.mu.weights())),
                      (me.omega - oracle).cwiseAbs().maxCoeff()});
  }
  o.require(worst <= 1e-9, "least-norm oracle");
  o.detail << "max deviation " << worst << " over 50 instances";
  return o;
}

// 9 -------------------------------------------------------------------------
Outcome gradient_and_minimizer() {
  Outcome o;
  Rng rng(9);
  double worst_rel = 0.0;
  for (int t = 0; t < 20; ++t) {
    // With N = d the dual is unique and the objective is constant.
    const testing::RandomCase c = testing::random_case(rng, {.strictly_redundant = true});
    const double p = 2.0 * testing::uniform_int(rng, 1, 3);
    const DualPotentialObjective obj(c.frame, c.v, p);
    const Matrix x = 0.5 * testing::gaussian(rng, obj.rows(), obj.cols());
    const Matrix g = obj.gradient(x);
    const Matrix fd = testing::finite_difference([&](const Matrix& y) { return obj.value(y); }, x);
    worst_rel = std::max(worst_rel, (g - fd).norm() / std::max(g.norm(), 1e-12));
  }
  o.require(worst_rel < 1e-5, "finite-difference gradient");

  std::vector<std::pair<FiniteFrame, Subspace>> suite;
  for (const auto& entry : fs::directory_iterator(OBLIQUE_FIXTURE_DIR)) {
    if (entry.path().extension() != ".json" || entry.path().filename() == "replay.json") continue;
    const io::Fixture fx = io::load_fixture(entry.path().string());
    if (fx.frame && fx.v) suite.emplace_back(*fx.frame, *fx.v);
  }
  for (const testing::RandomCase& c : random_suite(1001, 50)) suite.emplace_back(c.frame, c.v);
  double worst_value = 0.0, worst_dual = 0.0;
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const auto& [f, v] = suite[i];
    const MinimizeResult r = minimize_dual_potential(f, v, 2, {.seed = i});
    const ObliqueDualPair canon = canonical_oblique_dual(f, v);
    worst_value = std::max(worst_value, std::abs(r.trajectory.back() - static_cast<double>(f.subspace().dim())));
    worst_dual = std::max(worst_dual,
                          (r.pair.analysis.vectors() - canon.analysis.vectors()).colwise().norm().maxCoeff());
  }
  o.require(worst_value <= 1e-6, "minimizer reaches d_W");
  o.require(worst_dual <= 1e-6, "minimizer reaches the canonical dual");
  o.detail << "max gradient rel. error " << worst_rel << "; over " << suite.size()
           << " fixtures max |value - d_W| " << worst_value << ", max dual distance " << worst_dual;
  return o;
}

// 10 ------------------------------------------------------------------------
Outcome cross_module() {
  Outcome o;
  Rng rng(10);
  int exact = 0, perturbed = 0;
  double worst_exact = 0.0;
  auto check = [&](const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Coupling& g, const Subspace& w,
                   const Subspace& v) {
    const MeasureDualCheck dual = is_oblique_dual_measure(mu, nu, g, w, v);
    const ApproxDualReport approx = approx_dual_residual(mu, nu, g, w, v);
    o.require(std::abs(approx.epsilon_residual - dual.residual) <= 1e-15 * std::max(1.0, dual.residual),
              "residuals agree");
    if (dual.is_dual) {
      ++exact;
      worst_exact = std::max(worst_exact, approx.epsilon_residual);
      o.require(approx.epsilon_residual <= 1e-12, "exact duals have approx residual <= 1e-12");
    } else {
      ++perturbed;
      const MeasureFrameReport nr = classify_probabilistic_frame(nu, v);
      if (!nr.is_frame) return;
      const ConsistencyConversions conv = consistency_conversions(approx, nr.bounds->upper, nu, w, v);
      o.require(approx.consistency_bound <= conv.to_consistency + 1e-9, "consistency side of the sandwich");
      o.require(approx.epsilon_residual <= conv.to_approx + 1e-9, "approximation side of the sandwich");
    }
  };
  const testing::SkewLine ex;
  check(ex.mu, ex.nu, product_coupling(ex.mu, ex.nu), ex.w, ex.v);
  for (const testing::RandomCase& c : random_suite(1001, 50)) {
    const DualMeasure d = canonical_dual_measure(c.mu, c.w, c.v);
    check(c.mu, d.nu, d.gamma, c.w, c.v);
    const Matrix pv = orthogonal_projection(c.v);
    for (double s : {0.01, 0.1, 0.5}) {
      const DiscreteMeasure eta(d.nu.points() + s * pv * testing::gaussian(rng, c.n, d.nu.size()), d.nu.weights());
      check(c.mu, eta, Coupling::from_pairs(c.mu.points(), eta.points(), c.mu.weights()), c.w, c.v);
    }
  }
  o.detail << exact << " exact pairs (max residual " << worst_exact << "), " << perturbed << " perturbed instances";
  return o;
}

}  // namespace
}  // namespace oblique

int main() {
  using namespace oblique;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"Skew-line replication", example_replication},
      {"Canonical potential sharpness", sharpness},
      {"Welch coherence saturation", welch_saturation},
      {"Even exponent bound chains", even_exponent_chains},
      {"General dual potential bound", general_bound},
      {"Optimal transport correctness", transport},
      {"Perturbation interiority", interiority},
      {"Minimal energy oracle", minimal_energy},
      {"Gradient validation", gradient_and_minimizer},
      {"Cross-module consistency", cross_module},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "threw " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %2zu. %s: %s (%.2fs)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.str().c_str(), secs);
    failures += o.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
