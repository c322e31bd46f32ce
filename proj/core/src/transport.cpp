#include "oblique/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace oblique {

namespace {

Matrix stack(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() + b.rows(), a.cols());
  out << a, b;
  return out;
}

}  // namespace

Coupling::Coupling(Matrix x, Matrix y, Vector weights, DiscreteMeasure mu, DiscreteMeasure nu)
    : x_(std::move(x)),
      y_(std::move(y)),
      weights_(std::move(weights)),
      mu_(std::move(mu)),
      nu_(std::move(nu)) {
  if (x_.cols() != weights_.size() || y_.cols() != weights_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "coupling pairs and weights differ in count");
  }
  if (x_.rows() != mu_.ambient_dim() || y_.rows() != nu_.ambient_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "coupling points and marginals differ in dimension");
  }
  if (weights_.size() == 0 || (weights_.array() < 0.0).any() || !weights_.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "coupling weights must be finite and nonnegative");
  }
  if (std::abs(weights_.sum() - 1.0) > kWeightSumTol) {
    throw Error(ErrorCode::MarginalMismatch,
                "coupling weights sum to " + std::to_string(weights_.sum()));
  }
  if (!weak_equal_atoms(x_, weights_, mu_.points(), mu_.weights())) {
    throw Error(ErrorCode::MarginalMismatch, "first marginal differs from the declared measure");
  }
  if (!weak_equal_atoms(y_, weights_, nu_.points(), nu_.weights())) {
    throw Error(ErrorCode::MarginalMismatch, "second marginal differs from the declared measure");
  }
}

Coupling Coupling::from_pairs(Matrix x, Matrix y, Vector weights) {
  DiscreteMeasure mu(x, weights);
  DiscreteMeasure nu(y, weights);
  return Coupling(std::move(x), std::move(y), std::move(weights), std::move(mu), std::move(nu));
}

Matrix Coupling::moment() const { return x_ * weights_.asDiagonal() * y_.transpose(); }

Coupling product_coupling(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  const Index m = mu.size();
  const Index k = nu.size();
  Matrix x(mu.ambient_dim(), m * k);
  Matrix y(nu.ambient_dim(), m * k);
  Vector w(m * k);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < k; ++j) {
      x.col(i * k + j) = mu.point(i);
      y.col(i * k + j) = nu.point(j);
      w(i * k + j) = mu.weight(i) * nu.weight(j);
    }
  }
  return Coupling(std::move(x), std::move(y), std::move(w), mu, nu);
}

Coupling graph_coupling(const DiscreteMeasure& mu, const DiscreteMeasure& image) {
  if (image.size() != mu.size()) {
    throw Error(ErrorCode::DimensionMismatch, "graph coupling needs an atom-by-atom image");
  }
  return Coupling(mu.points(), image.points(), mu.weights(), mu, image);
}

double coupling_cost(const Coupling& gamma) {
  if (gamma.x().rows() != gamma.y().rows()) {
    throw Error(ErrorCode::DimensionMismatch, "cost needs both marginals in the same space");
  }
  return (gamma.x() - gamma.y()).colwise().squaredNorm().dot(gamma.weights());
}

// -- transportation simplex --------------------------------------------------
//
// Degeneracy is removed by the classical lexicographic perturbation: every
// supply gets +eps and the last demand gets +m*eps. Flows are carried as
// a + b*eps pairs and compared lexicographically, so no basic flow is ever
// zero and the method cannot cycle. Entering cells follow Bland's rule.

namespace {

struct Flow {
  double v = 0.0;
  double e = 0.0;
};

constexpr double kFlowSnap = 1e-14;

// Lexicographic a < b with value parts within kFlowSnap treated as equal.
bool flow_less(const Flow& a, const Flow& b) {
  if (std::abs(a.v - b.v) > kFlowSnap) return a.v < b.v;
  return a.e < b.e;
}

Flow flow_sub(const Flow& a, const Flow& b) {
  Flow r{a.v - b.v, a.e - b.e};
  if (std::abs(r.v) <= kFlowSnap) r.v = 0.0;
  return r;
}

Flow flow_add(const Flow& a, const Flow& b) { return {a.v + b.v, a.e + b.e}; }

struct BasicCell {
  Index i;
  Index j;
  Flow x;
};

class TransportSimplex {
 public:
  TransportSimplex(const Matrix& cost, const Vector& a, const Vector& b)
      : c_(cost), a_(a), b_(b), m_(cost.rows()), k_(cost.cols()) {}

  void solve() {
    northwest_corner();
    const double scale = std::max(1.0, c_.cwiseAbs().maxCoeff());
    const double rc_tol = 1e-12 * scale;
    const long max_iter = 50 * (m_ + k_) * (m_ + k_) + 1000;
    for (;;) {
      compute_potentials();
      Index ei = -1;
      Index ej = -1;
      for (Index i = 0; i < m_ && ei < 0; ++i) {
        for (Index j = 0; j < k_; ++j) {
          if (c_(i, j) - u_(i) - v_(j) < -rc_tol) {
            ei = i;
            ej = j;
            break;
          }
        }
      }
      if (ei < 0) break;
      if (++iterations_ > max_iter) {
        throw Error(ErrorCode::NonConvergence, "transportation simplex exceeded its pivot budget");
      }
      pivot(ei, ej);
    }
  }

  const std::vector<BasicCell>& basis() const { return basis_; }
  const Vector& u() const { return u_; }
  const Vector& v() const { return v_; }
  long iterations() const { return iterations_; }

 private:
  void northwest_corner() {
    std::vector<Flow> supply(static_cast<std::size_t>(m_));
    std::vector<Flow> demand(static_cast<std::size_t>(k_));
    for (Index i = 0; i < m_; ++i) supply[static_cast<std::size_t>(i)] = {a_(i), 1.0};
    for (Index j = 0; j < k_; ++j) demand[static_cast<std::size_t>(j)] = {b_(j), 0.0};
    demand.back().e = static_cast<double>(m_);
    Index i = 0;
    Index j = 0;
    while (i < m_ && j < k_) {
      Flow& s = supply[static_cast<std::size_t>(i)];
      Flow& d = demand[static_cast<std::size_t>(j)];
      if (i == m_ - 1 && j == k_ - 1) {
        basis_.push_back({i, j, s});
        break;
      }
      if (flow_less(s, d) || j == k_ - 1) {
        basis_.push_back({i, j, s});
        d = flow_sub(d, s);
        ++i;
      } else {
        basis_.push_back({i, j, d});
        s = flow_sub(s, d);
        ++j;
      }
    }
  }

  void compute_potentials() {
    const Index nodes = m_ + k_;
    adj_.assign(static_cast<std::size_t>(nodes), {});
    for (std::size_t e = 0; e < basis_.size(); ++e) {
      adj_[static_cast<std::size_t>(basis_[e].i)].push_back(e);
      adj_[static_cast<std::size_t>(m_ + basis_[e].j)].push_back(e);
    }
    u_ = Vector::Constant(m_, std::numeric_limits<double>::quiet_NaN());
    v_ = Vector::Constant(k_, std::numeric_limits<double>::quiet_NaN());
    u_(0) = 0.0;
    std::vector<Index> stack{0};
    std::vector<bool> seen(static_cast<std::size_t>(nodes), false);
    seen[0] = true;
    while (!stack.empty()) {
      const Index node = stack.back();
      stack.pop_back();
      for (std::size_t e : adj_[static_cast<std::size_t>(node)]) {
        const BasicCell& cell = basis_[e];
        const Index other = node < m_ ? m_ + cell.j : cell.i;
        if (seen[static_cast<std::size_t>(other)]) continue;
        seen[static_cast<std::size_t>(other)] = true;
        if (node < m_) {
          v_(cell.j) = c_(cell.i, cell.j) - u_(cell.i);
        } else {
          u_(cell.i) = c_(cell.i, cell.j) - v_(cell.j);
        }
        stack.push_back(other);
      }
    }
  }

  // Path of basis edges from node `from` to node `to` in the spanning tree.
  std::vector<std::size_t> tree_path(Index from, Index to) const {
    const Index nodes = m_ + k_;
    std::vector<long> parent_edge(static_cast<std::size_t>(nodes), -1);
    std::vector<bool> seen(static_cast<std::size_t>(nodes), false);
    std::vector<Index> queue{from};
    seen[static_cast<std::size_t>(from)] = true;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const Index node = queue[head];
      if (node == to) break;
      for (std::size_t e : adj_[static_cast<std::size_t>(node)]) {
        const BasicCell& cell = basis_[e];
        const Index other = node < m_ ? m_ + cell.j : cell.i;
        if (seen[static_cast<std::size_t>(other)]) continue;
        seen[static_cast<std::size_t>(other)] = true;
        parent_edge[static_cast<std::size_t>(other)] = static_cast<long>(e);
        queue.push_back(other);
      }
    }
    std::vector<std::size_t> path;
    for (Index node = to; node != from;) {
      const long e = parent_edge[static_cast<std::size_t>(node)];
      if (e < 0) throw Error(ErrorCode::NonConvergence, "basis is not a spanning tree");
      path.push_back(static_cast<std::size_t>(e));
      const BasicCell& cell = basis_[static_cast<std::size_t>(e)];
      node = node < m_ ? m_ + cell.j : cell.i;
    }
    // path runs to -> from; reverse so it starts at `from`.
    std::reverse(path.begin(), path.end());
    return path;
  }

  void pivot(Index ei, Index ej) {
    // Cycle: entering (ei,ej) gets +theta; walking the tree path from row ei
    // to column ej, edges alternate -, +, -, ... with the first and last
    // edges both negative (the path has odd length).
    const std::vector<std::size_t> path = tree_path(ei, m_ + ej);
    std::size_t leave = path.front();
    Flow theta = basis_[leave].x;
    for (std::size_t p = 0; p < path.size(); p += 2) {
      const std::size_t e = path[p];
      if (flow_less(basis_[e].x, theta)) {
        theta = basis_[e].x;
        leave = e;
      }
    }
    for (std::size_t p = 0; p < path.size(); ++p) {
      BasicCell& cell = basis_[path[p]];
      cell.x = (p % 2 == 0) ? flow_sub(cell.x, theta) : flow_add(cell.x, theta);
    }
    basis_[leave] = {ei, ej, theta};
  }

  const Matrix& c_;
  const Vector& a_;
  const Vector& b_;
  Index m_;
  Index k_;
  std::vector<BasicCell> basis_;
  std::vector<std::vector<std::size_t>> adj_;
  Vector u_;
  Vector v_;
  long iterations_ = 0;
};

}  // namespace

W2Result exact_w2(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu.ambient_dim() != nu.ambient_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "W2 needs measures on the same space");
  }
  const Index m = mu.size();
  const Index k = nu.size();
  Matrix cost(m, k);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < k; ++j) cost(i, j) = (mu.point(i) - nu.point(j)).squaredNorm();
  }

  TransportSimplex simplex(cost, mu.weights(), nu.weights());
  simplex.solve();

  std::vector<Index> rows;
  std::vector<Index> cols;
  std::vector<double> flows;
  double primal = 0.0;
  for (const BasicCell& cell : simplex.basis()) {
    const double f = std::max(cell.x.v, 0.0);
    if (f <= 0.0) continue;
    rows.push_back(cell.i);
    cols.push_back(cell.j);
    flows.push_back(f);
    primal += f * cost(cell.i, cell.j);
  }

  // Make the dual exactly feasible (v_j = min_i c_ij - u_i) so that the gap
  // below is a genuine optimality certificate rather than a restatement of
  // complementary slackness.
  const Vector& u = simplex.u();
  Vector v(k);
  for (Index j = 0; j < k; ++j) v(j) = (cost.col(j) - u).minCoeff();
  const double dual = mu.weights().dot(u) + nu.weights().dot(v);

  Matrix x(mu.ambient_dim(), static_cast<Index>(flows.size()));
  Matrix y(nu.ambient_dim(), static_cast<Index>(flows.size()));
  Vector w(static_cast<Index>(flows.size()));
  for (std::size_t p = 0; p < flows.size(); ++p) {
    x.col(static_cast<Index>(p)) = mu.point(rows[p]);
    y.col(static_cast<Index>(p)) = nu.point(cols[p]);
    w(static_cast<Index>(p)) = flows[p];
  }
  // Clamping may shift the total by round-off; renormalize so the coupling
  // invariant holds exactly.
  w /= w.sum();

  if (primal < 0.0 && primal >= -1e-12) primal = 0.0;
  W2Result out{std::sqrt(std::max(primal, 0.0)),
               Coupling(std::move(x), std::move(y), std::move(w), mu, nu),
               {primal, std::abs(primal - dual), simplex.iterations()}};
  return out;
}

// -- gluing ------------------------------------------------------------------

TriCoupling::TriCoupling(Matrix x, Matrix y, Matrix z, Vector weights, Coupling g12, Coupling g23)
    : x_(std::move(x)),
      y_(std::move(y)),
      z_(std::move(z)),
      weights_(std::move(weights)),
      g12_(std::move(g12)),
      g23_(std::move(g23)) {
  if (x_.cols() != weights_.size() || y_.cols() != weights_.size() ||
      z_.cols() != weights_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "triple coupling columns and weights differ in count");
  }
  if (!weak_equal_atoms(stack(x_, y_), weights_, stack(g12_.x(), g12_.y()), g12_.weights())) {
    throw Error(ErrorCode::MarginalMismatch, "(x,y) projection differs from the first coupling");
  }
  if (!weak_equal_atoms(stack(y_, z_), weights_, stack(g23_.x(), g23_.y()), g23_.weights())) {
    throw Error(ErrorCode::MarginalMismatch, "(y,z) projection differs from the second coupling");
  }
}

Coupling TriCoupling::project_xz() const {
  return Coupling(x_, z_, weights_, g12_.mu(), g23_.nu());
}

TriCoupling glue(const Coupling& g12, const Coupling& g23, double tol) {
  if (!weak_equal(g12.nu(), g23.mu(), tol)) {
    throw Error(ErrorCode::MarginalMismatch, "the couplings do not share their middle marginal");
  }
  // Cluster middle points of g12 by position; each cluster is one atom y of
  // the shared marginal with mass m(y).
  std::vector<Index> rep;
  std::vector<double> mass;
  std::vector<Index> cluster_of(static_cast<std::size_t>(g12.size()), -1);
  for (Index a = 0; a < g12.size(); ++a) {
    if (g12.weights()(a) <= 0.0) continue;
    Index c = 0;
    for (; c < static_cast<Index>(rep.size()); ++c) {
      if ((g12.y().col(rep[static_cast<std::size_t>(c)]) - g12.y().col(a))
              .lpNorm<Eigen::Infinity>() <= tol) {
        break;
      }
    }
    if (c == static_cast<Index>(rep.size())) {
      rep.push_back(a);
      mass.push_back(0.0);
    }
    mass[static_cast<std::size_t>(c)] += g12.weights()(a);
    cluster_of[static_cast<std::size_t>(a)] = c;
  }

  std::vector<Index> ia;
  std::vector<Index> ib;
  std::vector<double> tw;
  for (Index b = 0; b < g23.size(); ++b) {
    if (g23.weights()(b) <= 0.0) continue;
    Index c = 0;
    for (; c < static_cast<Index>(rep.size()); ++c) {
      if ((g12.y().col(rep[static_cast<std::size_t>(c)]) - g23.x().col(b))
              .lpNorm<Eigen::Infinity>() <= tol) {
        break;
      }
    }
    if (c == static_cast<Index>(rep.size())) {
      throw Error(ErrorCode::MarginalMismatch, "a middle atom of the second coupling is unmatched");
    }
    for (Index a = 0; a < g12.size(); ++a) {
      if (cluster_of[static_cast<std::size_t>(a)] != c) continue;
      ia.push_back(a);
      ib.push_back(b);
      tw.push_back(g12.weights()(a) * g23.weights()(b) / mass[static_cast<std::size_t>(c)]);
    }
  }

  const auto count = static_cast<Index>(tw.size());
  Matrix x(g12.x().rows(), count);
  Matrix y(g12.y().rows(), count);
  Matrix z(g23.y().rows(), count);
  Vector w(count);
  for (Index t = 0; t < count; ++t) {
    x.col(t) = g12.x().col(ia[static_cast<std::size_t>(t)]);
    y.col(t) = g12.y().col(ia[static_cast<std::size_t>(t)]);
    z.col(t) = g23.y().col(ib[static_cast<std::size_t>(t)]);
    w(t) = tw[static_cast<std::size_t>(t)];
  }
  w /= w.sum();
  return TriCoupling(std::move(x), std::move(y), std::move(z), std::move(w), g12, g23);
}

}  // namespace oblique
