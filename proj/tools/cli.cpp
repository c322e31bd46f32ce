#include "cli.hpp"

#include <cstdio>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "fixture_io.hpp"

namespace oblique::cli {

using io::json;

int exit_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DirectSumViolation:
    case ErrorCode::NotAFrame:
    case ErrorCode::NotADual:
    case ErrorCode::HypothesisViolated:
      return kHypothesisViolation;
    case ErrorCode::NonConvergence:
      return kNonConvergence;
    default:
      return kValidationError;
  }
}

namespace {

struct Options {
  std::string in;
  std::string out;
  std::optional<double> tol;
  double p = 2.0;
  double eps = 0.1;
  int trials = 100;
  std::uint64_t seed = 0;
  int max_iters = 20000;
  std::string csv;
  std::string mode = "pushforward";
  double window_lo = 0.9;
  std::optional<double> a_override;
};

enum Flag : unsigned {
  kP = 1u << 0,
  kEps = 1u << 1,
  kTrials = 1u << 2,
  kSeed = 1u << 3,
  kCsv = 1u << 4,
  kMode = 1u << 5,
  kWindow = 1u << 6,
  kA = 1u << 7,
  kIters = 1u << 8,
};

struct Context {
  io::Fixture fx;
  Options opt;
  Tolerance tol;
};

template <typename T>
const T& need(const std::optional<T>& v, const char* section) {
  if (!v) throw Error(ErrorCode::ParseError, std::string("fixture is missing section \"") + section + "\"");
  return *v;
}

Coupling make_coupling(const io::CouplingPairs& c, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  return Coupling(c.x, c.y, c.w, mu, nu);
}

std::string format_csv(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

ObliqueDualPair load_pair(const Context& c) {
  const FiniteFrame& f = need(c.fx.frame, "frame");
  if (c.fx.dual) return make_dual_pair(f, *c.fx.dual, c.tol);
  return canonical_oblique_dual(f, need(c.fx.v, "V"), c.tol);
}

std::vector<Vector> probes_or_basis(const Context& c, Index n) {
  if (c.fx.probes) return *c.fx.probes;
  std::vector<Vector> out;
  for (Index i = 0; i < n; ++i) out.push_back(Vector::Unit(n, i));
  return out;
}

json bounds_json(const FrameBounds& b) { return {{"lower", b.lower}, {"upper", b.upper}}; }

// Supplied (nu, coupling) when present, the canonical dual measure otherwise.
DualMeasure load_measure_dual(const Context& c) {
  const DiscreteMeasure& mu = need(c.fx.mu, "mu");
  if (!c.fx.nu && !c.fx.coupling) return canonical_dual_measure(mu, need(c.fx.w, "W"), need(c.fx.v, "V"), c.tol);
  const DiscreteMeasure& nu = need(c.fx.nu, "nu");
  return {nu, make_coupling(need(c.fx.coupling, "coupling"), mu, nu)};
}

// -- verbs -------------------------------------------------------------------

json frame_info(Context& c) {
  const FiniteFrame& f = need(c.fx.frame, "frame");
  const FrameBounds b = frame_bounds(f, c.tol);
  const bool tight = b.upper - b.lower <= c.tol.eq_tol;
  return {{"ambient_dim", f.ambient_dim()},
          {"dim", f.subspace().dim()},
          {"n_vectors", f.size()},
          {"frame_operator", io::rows_to_json(frame_operator(f))},
          {"bounds", bounds_json(b)},
          {"tight", tight},
          {"parseval", tight && std::abs(b.lower - 1.0) <= c.tol.eq_tol}};
}

json oblique_dual(Context& c) {
  const FiniteFrame& f = need(c.fx.frame, "frame");
  const Subspace& v = need(c.fx.v, "V");
  const bool family = c.fx.h.has_value();
  const ObliqueDualPair pair =
      family ? oblique_dual_family(f, v, *c.fx.h, c.tol) : canonical_oblique_dual(f, v, c.tol);
  json j = io::to_json(pair);
  j["canonical"] = !family;
  return j;
}

json check_dual(Context& c) {
  if (c.fx.mu && c.fx.nu && c.fx.coupling) {
    const Subspace& w = need(c.fx.w, "W");
    const Subspace& v = need(c.fx.v, "V");
    const Coupling gamma = make_coupling(*c.fx.coupling, *c.fx.mu, *c.fx.nu);
    const MeasureDualCheck r = is_oblique_dual_measure(*c.fx.mu, *c.fx.nu, gamma, w, v, c.tol);
    const double consistency =
        probabilistic_consistency_check(*c.fx.nu, gamma, probes_or_basis(c, c.fx.mu->ambient_dim()));
    return {{"kind", "measure"},
            {"is_dual", r.is_dual},
            {"residual", r.residual},
            {"equivalences_agree", r.equivalences_agree},
            {"consistency_residual", consistency}};
  }
  const FiniteFrame& f = need(c.fx.frame, "frame");
  const FiniteFrame& d = need(c.fx.dual, "dual");
  const DualCheck r = is_oblique_dual(f, d, c.tol);
  json j = {{"kind", "frame"}, {"is_dual", r.is_dual}, {"residual", r.residual}};
  if (c.fx.signal) {
    const Reconstruction rec = reconstruct(*c.fx.signal, make_dual_pair(f, d, c.tol));
    j["reconstruction"] = {{"fhat", io::to_json(rec.fhat)},
                           {"consistency_residual", rec.consistency_residual}};
  }
  return j;
}

json potential(Context& c) {
  const ObliqueDualPair pair = load_pair(c);
  json j = io::to_json(dual_p_potential(pair, c.opt.p, c.tol));
  j["diagonal"] = io::to_json(diagonal_potential(pair, c.opt.p, c.tol));
  j["trace"] = mixed_gram_matrix(pair).trace();
  j["n_vectors"] = pair.synthesis.size();
  j["dim"] = pair.synthesis.subspace().dim();
  return j;
}

json coherence(Context& c) {
  const ObliqueDualPair pair = load_pair(c);
  const CoherenceReport r = mixed_coherence(pair, c.tol);
  const MixedGram g = mixed_gram(pair, c.tol);
  json j = {{"max_off_diagonal_sq", r.max_off_diagonal_sq},
            {"welch_bound", r.welch_bound},
            {"diagonal_constant", r.diagonal_constant},
            {"saturated", r.saturated},
            {"gram", io::rows_to_json(g.g)}};
  if (g.q) j["signature"] = io::rows_to_json(*g.q);
  return j;
}

json etf(Context& c) {
  const EtfLift lift = etf_lift(need(c.fx.frame, "frame"), c.tol);
  return {{"psi", io::to_json(lift.psi)}, {"is_equiangular_tight", lift.is_equiangular_tight}};
}

json minimize(Context& c) {
  const FiniteFrame& f = need(c.fx.frame, "frame");
  const Subspace& v = need(c.fx.v, "V");
  OptimizerOptions o;
  o.seed = c.opt.seed;
  o.max_iters = c.opt.max_iters;
  const MinimizeResult r = minimize_dual_potential(f, v, c.opt.p, o, c.tol);
  const ObliqueDualPair canon = canonical_oblique_dual(f, v, c.tol);
  const double dist =
      (r.pair.analysis.vectors() - canon.analysis.vectors()).colwise().norm().maxCoeff();
  if (!c.opt.csv.empty()) {
    std::string csv = "iteration,value\n";
    for (std::size_t i = 0; i < r.trajectory.size(); ++i) {
      csv += std::to_string(i) + "," + format_csv(r.trajectory[i]) + "\n";
    }
    io::write_atomic(c.opt.csv, csv);
  }
  return {{"pair", io::to_json(r.pair)},
          {"potential", io::to_json(dual_p_potential(r.pair, c.opt.p, c.tol))},
          {"iterations", r.iterations},
          {"grad_norm", r.grad_norm},
          {"initial_value", r.trajectory.front()},
          {"final_value", r.trajectory.back()},
          {"distance_to_canonical", dist}};
}

json pf_classify(Context& c) {
  const MeasureFrameReport r = classify_probabilistic_frame(need(c.fx.mu, "mu"), need(c.fx.w, "W"), c.tol);
  json j = {{"second_moment", r.second_moment},
            {"frame_operator", io::rows_to_json(r.frame_operator)},
            {"is_frame", r.is_frame},
            {"is_tight", r.is_tight},
            {"is_parseval", r.is_parseval}};
  if (r.bounds) j["bounds"] = bounds_json(*r.bounds);
  return j;
}

// With a K section the dual is carried from V over to K.
json pf_dual(Context& c) {
  const DiscreteMeasure& mu = need(c.fx.mu, "mu");
  const Subspace& w = need(c.fx.w, "W");
  DualMeasure d = canonical_dual_measure(mu, w, need(c.fx.v, "V"), c.tol);
  if (c.fx.k) d = transfer_dual_to_k(mu, d.nu, d.gamma, w, *c.fx.k, c.tol);
  return {{"nu", io::to_json(d.nu)}, {"coupling", io::to_json(d.gamma)}};
}

json pf_check(Context& c) {
  const DiscreteMeasure& mu = need(c.fx.mu, "mu");
  const DualMeasure dual = load_measure_dual(c);
  const DiscreteMeasure& nu = dual.nu;
  const Coupling& gamma = dual.gamma;
  const MeasureDualCheck r =
      is_oblique_dual_measure(mu, nu, gamma, need(c.fx.w, "W"), need(c.fx.v, "V"), c.tol);
  json cond = json::array();
  for (double x : r.condition_residuals) cond.push_back(x);
  return {{"is_dual", r.is_dual},
          {"residual", r.residual},
          {"equivalences_agree", r.equivalences_agree},
          {"condition_residuals", cond},
          {"consistency_residual",
           probabilistic_consistency_check(nu, gamma, probes_or_basis(c, mu.ambient_dim()))}};
}

json pf_potential(Context& c) {
  const DiscreteMeasure& mu = need(c.fx.mu, "mu");
  const DualMeasure dual = load_measure_dual(c);
  const DiscreteMeasure& nu = dual.nu;
  const Coupling& gamma = dual.gamma;
  DualType type;
  if (c.opt.mode == "pushforward") {
    type = DualType::Pushforward;
  } else if (c.opt.mode == "general") {
    type = DualType::General;
  } else {
    throw Error(ErrorCode::InvalidArgument, "--mode must be pushforward or general");
  }
  const PfPotentialReport r =
      pf_dual_potential(mu, nu, gamma, need(c.fx.w, "W"), need(c.fx.v, "V"), type, std::nullopt, c.tol);
  json j = io::to_json(static_cast<const PotentialReport&>(r));
  j["mode"] = c.opt.mode;
  j["mu_bounds"] = bounds_json(r.mu_bounds);
  j["equality_condition"] = r.equality_condition;
  if (r.canonical_distance) j["canonical_distance"] = *r.canonical_distance;
  return j;
}

json w2(Context& c) {
  const W2Result r = exact_w2(need(c.fx.mu, "mu"), need(c.fx.nu, "nu"));
  return {{"distance", r.distance}, {"coupling", io::to_json(r.coupling)}, {"certificate", io::to_json(r.certificate)}};
}

json glue_verb(Context& c) {
  const DiscreteMeasure& mu = need(c.fx.mu, "mu");
  const DiscreteMeasure& nu = need(c.fx.nu, "nu");
  const DiscreteMeasure& eta = need(c.fx.eta, "eta");
  const Coupling g12 = make_coupling(need(c.fx.coupling, "coupling"), mu, nu);
  const Coupling g23 = make_coupling(need(c.fx.perturbation_coupling, "perturbation_coupling"), nu, eta);
  const TriCoupling tri = glue(g12, g23);
  json triples = json::array();
  for (Index t = 0; t < tri.size(); ++t) {
    triples.push_back(json::array({io::to_json(Vector(tri.x().col(t))), io::to_json(Vector(tri.y().col(t))),
                                   io::to_json(Vector(tri.z().col(t))), tri.weights()(t)}));
  }
  return {{"triples", triples}, {"xz_coupling", io::to_json(tri.project_xz())}};
}

json approx_check(Context& c) {
  const DiscreteMeasure& mu = need(c.fx.mu, "mu");
  const Subspace& w = need(c.fx.w, "W");
  const Subspace& v = need(c.fx.v, "V");
  const DualMeasure dual = load_measure_dual(c);
  const DiscreteMeasure& nu = dual.nu;
  const Coupling& gamma = dual.gamma;
  const ApproxDualReport r = approx_dual_residual(mu, nu, gamma, w, v, c.tol);
  json j = {{"epsilon_residual", r.epsilon_residual}, {"consistency_bound", r.consistency_bound}};
  const MeasureFrameReport nu_report = classify_probabilistic_frame(nu, v, c.tol);
  if (nu_report.is_frame) {
    const double b_nu = nu_report.bounds->upper;
    const ConsistencyConversions conv = consistency_conversions(r, b_nu, nu, w, v, c.tol);
    j["conversions"] = {{"b_nu", b_nu},
                        {"to_consistency", conv.to_consistency},
                        {"to_approx", conv.to_approx},
                        {"consistency_within", conv.consistency_within},
                        {"approx_within", conv.approx_within}};
  }
  return j;
}

json perturb(Context& c) {
  const DiscreteMeasure& mu = need(c.fx.mu, "mu");
  const DiscreteMeasure& nu = need(c.fx.nu, "nu");
  const DiscreteMeasure& eta = need(c.fx.eta, "eta");
  const Coupling g_dual = make_coupling(need(c.fx.coupling, "coupling"), mu, nu);
  const Coupling g_pert = make_coupling(need(c.fx.perturbation_coupling, "perturbation_coupling"), nu, eta);
  PerturbationOptions po;
  po.a_override = c.opt.a_override;
  const PerturbationCertificate r = perturbation_certificate(
      mu, nu, g_dual, eta, g_pert, c.opt.eps, need(c.fx.w, "W"), need(c.fx.v, "V"), po, c.tol);
  json j = {{"lambda", r.lambda},
            {"a_lower", r.a_lower},
            {"a_nu", r.a_nu},
            {"c_upper", r.c_upper},
            {"epsilon", r.epsilon},
            {"epsilon_claimed", r.epsilon_claimed},
            {"epsilon_actual", r.epsilon_actual},
            {"holds", r.holds},
            {"glued_coupling", io::to_json(r.glued_coupling)},
            {"eta_bound_applicable", r.eta_bound_applicable}};
  if (r.eta_bound_applicable) {
    j["eta_bound"] = r.eta_bound;
    j["eta_lower"] = r.eta_lower;
    j["eta_bound_holds"] = r.eta_bound_holds;
  }
  return j;
}

json interiority(Context& c) {
  InteriorityOptions io_opts;
  io_opts.window_lo = c.opt.window_lo;
  const InteriorityReport r = interiority_experiment(need(c.fx.mu, "mu"), need(c.fx.w, "W"), need(c.fx.v, "V"),
                                                     c.opt.eps, c.opt.trials, c.opt.seed, io_opts, c.tol);
  json rows = json::array();
  std::string csv = "trial,lambda,eps_claimed,eps_actual,pass\n";
  for (const InteriorityRow& row : r.rows) {
    rows.push_back({{"trial", row.trial},
                    {"lambda", row.lambda},
                    {"eps_claimed", row.eps_claimed},
                    {"eps_actual", row.eps_actual},
                    {"pass", row.pass},
                    {"eta_bound_pass", row.eta_bound_pass}});
    csv += std::to_string(row.trial) + "," + format_csv(row.lambda) + "," + format_csv(row.eps_claimed) + "," +
           format_csv(row.eps_actual) + "," + (row.pass ? "true" : "false") + "\n";
  }
  if (!c.opt.csv.empty()) io::write_atomic(c.opt.csv, csv);
  return {{"epsilon", r.epsilon},
          {"a_lower", r.a_lower},
          {"c_upper", r.c_upper},
          {"trials", r.trials},
          {"failures", r.failures},
          {"eta_bound_failures", r.eta_bound_failures},
          {"max_eps_actual", r.max_eps_actual},
          {"seed", c.opt.seed},
          {"rows", rows}};
}

json canonicalize(Context& c) { return io::to_json(c.fx); }

struct Verb {
  const char* name;
  const char* help;
  unsigned flags;
  std::function<json(Context&)> fn;
};

const std::vector<Verb>& verbs() {
  static const std::vector<Verb> table = {
      {"frame-info", "frame operator and frame bounds of `frame`", 0, frame_info},
      {"oblique-dual", "canonical oblique dual of `frame` on V (or the family member given by `h`)", 0,
       oblique_dual},
      {"check-dual", "duality residual of frame/dual, or of mu/nu under `coupling`", 0, check_dual},
      {"potential", "dual p-frame potential and its lower bounds", kP, potential},
      {"coherence", "mixed coherence against the Welch-type bound", 0, coherence},
      {"etf-lift", "lift `frame` and test for an equiangular tight frame", 0, etf},
      {"minimize", "minimize the dual potential over all oblique duals", kP | kSeed | kCsv | kIters, minimize},
      {"pf-classify", "classify mu as a probabilistic frame for W", 0, pf_classify},
      {"pf-dual", "canonical oblique dual measure of mu, moved to K if given", 0, pf_dual},
      {"pf-check", "check nu as an oblique dual of mu under `coupling`", 0, pf_check},
      {"pf-potential", "probabilistic dual potential trace(S_mu S_nu) and its bound", kMode, pf_potential},
      {"w2", "exact 2-Wasserstein distance between mu and nu", 0, w2},
      {"glue", "glue `coupling` (mu, nu) with `perturbation_coupling` (nu, eta)", 0, glue_verb},
      {"approx-check", "approximate-dual residual and consistency conversions", 0, approx_check},
      {"perturb", "perturbation certificate for eta near the exact dual nu", kEps | kA, perturb},
      {"interiority", "randomized W2-ball perturbation experiment", kEps | kTrials | kSeed | kCsv | kWindow,
       interiority},
      {"canonicalize", "rewrite a fixture in canonical JSON form", 0, canonicalize},
  };
  return table;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Oblique dual frames: projections, potentials, probabilistic frames and transport", "oblique"};
  app.require_subcommand(1);
  Options opt;
  const Verb* chosen = nullptr;

  for (const Verb& verb : verbs()) {
    CLI::App* sub = app.add_subcommand(verb.name, verb.help);
    sub->add_option("--in", opt.in, "fixture JSON file")->required();
    sub->add_option("--out", opt.out, "write the report here (atomically) instead of stdout");
    sub->add_option("--tol", opt.tol, "equality tolerance eq_tol (default 1e-9)")->check(CLI::PositiveNumber);
    if (verb.flags & kP) sub->add_option("--p", opt.p, "potential exponent (default 2)")->check(CLI::PositiveNumber);
    if (verb.flags & kEps) sub->add_option("--eps", opt.eps, "epsilon (default 0.1)")->check(CLI::Range(0.0, 1.0));
    if (verb.flags & kTrials) sub->add_option("--trials", opt.trials, "number of trials (default 100)")->check(CLI::NonNegativeNumber);
    if (verb.flags & kSeed) sub->add_option("--seed", opt.seed, "RNG seed (default 0)");
    if (verb.flags & kCsv) sub->add_option("--csv", opt.csv, "also write tabular rows as CSV");
    if (verb.flags & kMode) {
      sub->add_option("--mode", opt.mode, "pushforward (default) or general")
          ->check(CLI::IsMember({"pushforward", "general"}));
    }
    if (verb.flags & kWindow) {
      sub->add_option("--window-lo", opt.window_lo, "lower end of the W2 target window (default 0.9)")
          ->check(CLI::Range(0.0, 1.0));
    }
    if (verb.flags & kA) sub->add_option("--a", opt.a_override, "lower frame bound A of nu to certify with");
    if (verb.flags & kIters) sub->add_option("--max-iters", opt.max_iters, "iteration cap (default 20000)");
    sub->callback([&chosen, &verb] { chosen = &verb; });
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidationError;
  }
  if (chosen == nullptr) return kValidationError;

  try {
    Context ctx;
    if (opt.tol) ctx.tol.eq_tol = *opt.tol;
    ctx.opt = opt;
    ctx.fx = io::load_fixture(opt.in, ctx.tol);
    const std::string report = io::canonical_dump(chosen->fn(ctx));
    if (opt.out.empty()) {
      out << report;
    } else {
      io::write_atomic(opt.out, report);
    }
    return kOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_status(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kValidationError;
  }
}

}  // namespace oblique::cli
