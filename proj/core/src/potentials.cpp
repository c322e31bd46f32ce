#include "oblique/potentials.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace oblique {

namespace {

void require_dual(const ObliqueDualPair& pair, const Tolerance& tol) {
  if (!(pair.residual <= tol.eq_tol)) {
    throw Error(ErrorCode::NotADual,
                "duality residual " + std::to_string(pair.residual) + " exceeds tolerance");
  }
}

double power_sum(const Matrix& m, double p) { return m.array().abs().pow(p).sum(); }

bool constant_diagonal(const Matrix& g, double tol) {
  const Vector diag = g.diagonal();
  return diag.maxCoeff() - diag.minCoeff() <= tol;
}

}  // namespace

Matrix mixed_gram_matrix(const ObliqueDualPair& pair) {
  return pair.synthesis.vectors().transpose() * pair.analysis.vectors();
}

bool is_even_integer(double p) {
  return p >= 2.0 && std::floor(p) == p && std::fmod(p, 2.0) == 0.0;
}

std::optional<double> potential_lower_bound(Index n_vectors, Index d, double p) {
  if (!is_even_integer(p)) return std::nullopt;
  const auto n = static_cast<double>(n_vectors);
  const auto dw = static_cast<double>(d);
  return std::pow(n, 2.0 - p) * std::pow(dw, p / 2.0);
}

std::optional<double> diagonal_lower_bound(Index n_vectors, Index d, double p) {
  if (!is_even_integer(p)) return std::nullopt;
  const auto n = static_cast<double>(n_vectors);
  const auto dw = static_cast<double>(d);
  return std::pow(n, 1.0 - p) * std::pow(dw, p);
}

std::optional<double> constant_diagonal_lower_bound(Index n_vectors, Index d, double p) {
  if (!is_even_integer(p)) return std::nullopt;
  const auto n = static_cast<double>(n_vectors);
  const auto dw = static_cast<double>(d);
  const double tail = std::pow(dw, p) / std::pow(n, p - 1.0);
  if (n_vectors == d) return tail;
  const double k = p / 2.0;
  return std::pow(std::abs(dw - dw * dw / n), k) / (std::pow(n, k - 1.0) * std::pow(n - 1.0, k - 1.0)) +
         tail;
}

double welch_bound(Index n_vectors, Index d) {
  if (n_vectors <= d) return 0.0;
  const auto n = static_cast<double>(n_vectors);
  const auto dw = static_cast<double>(d);
  return dw * (n - dw) / (n * n * (n - 1.0));
}

PotentialReport dual_p_potential(const ObliqueDualPair& pair, double p, const Tolerance& tol) {
  if (!(p > 0.0)) throw Error(ErrorCode::InvalidArgument, "p must be positive");
  require_dual(pair, tol);
  const Matrix g = mixed_gram_matrix(pair);
  const Index n = pair.synthesis.size();
  const Index d = pair.synthesis.subspace().dim();
  PotentialReport r;
  r.p = p;
  r.value = power_sum(g, p);
  r.lower_bound = potential_lower_bound(n, d, p);
  if (r.lower_bound) {
    r.gap = r.value - *r.lower_bound;
    r.saturated = *r.gap <= r.saturation_tol;
    if (constant_diagonal(g, tol.eq_tol)) {
      r.constant_diagonal_bound = constant_diagonal_lower_bound(n, d, p);
    }
  }
  return r;
}

PotentialReport diagonal_potential(const ObliqueDualPair& pair, double p, const Tolerance& tol) {
  if (!(p > 0.0)) throw Error(ErrorCode::InvalidArgument, "p must be positive");
  require_dual(pair, tol);
  const Vector diag = mixed_gram_matrix(pair).diagonal();
  const Index n = pair.synthesis.size();
  const Index d = pair.synthesis.subspace().dim();
  PotentialReport r;
  r.p = p;
  r.value = diag.array().abs().pow(p).sum();
  r.lower_bound = diagonal_lower_bound(n, d, p);
  if (r.lower_bound) r.gap = r.value - *r.lower_bound;
  const double target = static_cast<double>(d) / static_cast<double>(n);
  r.saturated = (diag.array() - target).abs().maxCoeff() <= r.saturation_tol;
  return r;
}

CoherenceReport mixed_coherence(const ObliqueDualPair& pair, const Tolerance& tol) {
  require_dual(pair, tol);
  const Matrix g = mixed_gram_matrix(pair);
  if (!constant_diagonal(g, tol.eq_tol)) {
    throw Error(ErrorCode::HypothesisViolated, "diagonal of the mixed Gram matrix is not constant");
  }
  const Index n = pair.synthesis.size();
  CoherenceReport r;
  r.diagonal_constant = true;
  r.welch_bound = welch_bound(n, pair.synthesis.subspace().dim());
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (i != j) r.max_off_diagonal_sq = std::max(r.max_off_diagonal_sq, g(i, j) * g(i, j));
    }
  }
  r.saturated = std::abs(r.max_off_diagonal_sq - r.welch_bound) <= tol.eq_tol;
  return r;
}

MixedGram mixed_gram(const ObliqueDualPair& pair, const Tolerance& tol) {
  require_dual(pair, tol);
  MixedGram out{mixed_gram_matrix(pair), std::nullopt};
  const Index n = pair.synthesis.size();
  const Index d = pair.synthesis.subspace().dim();
  if (n <= d || !constant_diagonal(out.g, tol.eq_tol)) return out;
  if (!mixed_coherence(pair, tol).saturated) return out;

  const double nd = static_cast<double>(n) / static_cast<double>(d);
  const double scale = nd * std::sqrt(static_cast<double>(d) * static_cast<double>(n - 1) /
                                      static_cast<double>(n - d));
  Matrix q = (out.g - Matrix::Identity(n, n) / nd) * scale;
  const bool symmetric = (q - q.transpose()).cwiseAbs().maxCoeff() <= tol.eq_tol;
  const bool zero_diag = q.diagonal().cwiseAbs().maxCoeff() <= tol.eq_tol;
  bool unimodular = true;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (i != j && std::abs(std::abs(q(i, j)) - 1.0) > tol.eq_tol) unimodular = false;
    }
  }
  if (symmetric && zero_diag && unimodular) out.q = std::move(q);
  return out;
}

EtfLift etf_lift(const FiniteFrame& f, const Tolerance& tol) {
  const Index n = f.size();
  const Index d = f.subspace().dim();
  const double nd = static_cast<double>(n) / static_cast<double>(d);
  Matrix psi = std::sqrt(nd) * psd_pinv_sqrt(frame_operator(f), tol) * f.vectors();
  FiniteFrame lifted(psi, f.subspace(), tol);

  const Matrix gram = psi.transpose() * psi;
  bool ok = (gram.diagonal().array() - 1.0).abs().maxCoeff() <= tol.eq_tol;
  ok = ok && (frame_operator(lifted) - nd * orthogonal_projection(f.subspace())).cwiseAbs().maxCoeff() <=
                 tol.eq_tol;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      lo = std::min(lo, std::abs(gram(i, j)));
      hi = std::max(hi, std::abs(gram(i, j)));
    }
  }
  if (n > 1) ok = ok && hi - lo <= tol.eq_tol;
  return {std::move(lifted), ok};
}

// -- optimizer ---------------------------------------------------------------

DualPotentialObjective::DualPotentialObjective(const FiniteFrame& f, const Subspace& v, double p,
                                               const Tolerance& tol)
    : wm_(f.vectors()), bv_(v.basis()), p_(p) {
  const Matrix s_pinv = pseudoinverse(frame_operator(f), tol);
  canonical_ = oblique_projection(v, f.subspace(), tol) * s_pinv * wm_;
  free_ = Matrix::Identity(wm_.cols(), wm_.cols()) - wm_.transpose() * s_pinv * wm_;
}

Matrix DualPotentialObjective::analysis(const Matrix& x) const {
  return canonical_ + bv_ * x * free_;
}

double DualPotentialObjective::value(const Matrix& x) const {
  return power_sum(wm_.transpose() * analysis(x), p_);
}

Matrix DualPotentialObjective::gradient(const Matrix& x) const {
  const Matrix g = wm_.transpose() * analysis(x);
  // d/dG sum |G_ij|^p = p |G|^{p-2} G, entrywise.
  const Matrix dg = p_ * (g.array().abs().pow(p_ - 2.0) * g.array()).matrix();
  return bv_.transpose() * wm_ * dg * free_;
}

MinimizeResult minimize_dual_potential(const FiniteFrame& f, const Subspace& v, double p,
                                       const OptimizerOptions& opts, const Tolerance& tol) {
  if (!(p >= 2.0)) throw Error(ErrorCode::InvalidArgument, "minimization needs p >= 2");
  if (opts.max_iters < 1 || !(opts.grad_tol > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "max_iters and grad_tol must be positive");
  }
  require_direct_sum(f.subspace(), v, tol);
  const DualPotentialObjective obj(f, v, p, tol);

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix x(obj.rows(), obj.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    for (Index i = 0; i < x.rows(); ++i) x(i, j) = opts.init_scale * gauss(rng);
  }

  constexpr double kArmijo = 1e-4;
  constexpr double kShrink = 0.5;
  MinimizeResult out{canonical_oblique_dual(f, v, tol), {}, 0, 0.0};
  double fx = obj.value(x);
  Matrix grad = obj.gradient(x);
  out.trajectory.push_back(fx);
  double step = 1.0;
  Matrix prev_x;
  Matrix prev_grad;
  int it = 0;
  for (; it < opts.max_iters && grad.norm() > opts.grad_tol; ++it) {
    if (it > 0) {
      const Matrix s = x - prev_x;
      const Matrix y = grad - prev_grad;
      const double sy = (s.array() * y.array()).sum();
      if (sy > 0.0) step = s.squaredNorm() / sy;
    }
    const double g2 = grad.squaredNorm();
    // Near the minimizer the Armijo decrease drops below the resolution of
    // fx, so allow a few ulps of slack rather than stalling on round-off.
    const double slack = 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(fx));
    Matrix trial = x - step * grad;
    double ft = obj.value(trial);
    int shrinks = 0;
    while (ft > fx - kArmijo * step * g2 + slack && shrinks < 80) {
      step *= kShrink;
      trial = x - step * grad;
      ft = obj.value(trial);
      ++shrinks;
    }
    if (ft > fx + slack) break;  // no decrease possible at working precision
    prev_x = std::move(x);
    prev_grad = std::move(grad);
    x = std::move(trial);
    fx = ft;
    grad = obj.gradient(x);
    out.trajectory.push_back(fx);
  }
  out.iterations = it;
  out.grad_norm = grad.norm();
  if (out.grad_norm > opts.grad_tol) {
    throw Error(ErrorCode::NonConvergence,
                "gradient norm " + std::to_string(out.grad_norm) + " after " + std::to_string(it) +
                    " iterations");
  }
  out.pair = oblique_dual_family(f, v, obj.basis_v() * x, tol);
  return out;
}

}  // namespace oblique
