#pragma once

#include "oblique/measure.hpp"

namespace oblique {

/// A finitely supported joint measure: the k-th pair is (x.col(k), y.col(k))
/// with mass weights(k). The declared marginals are kept alongside and checked
/// against the pairs at construction (weak equality, kAtomTol).
class Coupling {
 public:
  /// Throws MarginalMismatch if the pairs do not aggregate to `mu` and `nu`.
  Coupling(Matrix x, Matrix y, Vector weights, DiscreteMeasure mu, DiscreteMeasure nu);

  /// A coupling whose declared marginals are read off its own pairs.
  static Coupling from_pairs(Matrix x, Matrix y, Vector weights);

  Index size() const noexcept { return weights_.size(); }
  const Matrix& x() const noexcept { return x_; }
  const Matrix& y() const noexcept { return y_; }
  const Vector& weights() const noexcept { return weights_; }
  const DiscreteMeasure& mu() const noexcept { return mu_; }
  const DiscreteMeasure& nu() const noexcept { return nu_; }

  /// sum_k w_k x_k y_k^T.
  Matrix moment() const;

 private:
  Matrix x_;
  Matrix y_;
  Vector weights_;
  DiscreteMeasure mu_;
  DiscreteMeasure nu_;
};

Coupling product_coupling(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// (Id, T)_# mu where nu is the atom-by-atom image of mu (same size and order).
Coupling graph_coupling(const DiscreteMeasure& mu, const DiscreteMeasure& image);

/// sum_k w_k ||x_k - y_k||^2.
double coupling_cost(const Coupling& gamma);

struct TransportCertificate {
  double cost = 0.0;
  double dual_gap = 0.0;
  long iterations = 0;
};

struct W2Result {
  double distance = 0.0;
  Coupling coupling;
  TransportCertificate certificate;
};

/// Exact 2-Wasserstein distance via the transportation simplex.
W2Result exact_w2(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// A joint measure on triples with declared pairwise marginals.
class TriCoupling {
 public:
  /// Throws MarginalMismatch unless the (x,y) and (y,z) projections weak-equal
  /// the declared couplings.
  TriCoupling(Matrix x, Matrix y, Matrix z, Vector weights, Coupling g12, Coupling g23);

  Index size() const noexcept { return weights_.size(); }
  const Matrix& x() const noexcept { return x_; }
  const Matrix& y() const noexcept { return y_; }
  const Matrix& z() const noexcept { return z_; }
  const Vector& weights() const noexcept { return weights_; }
  const Coupling& g12() const noexcept { return g12_; }
  const Coupling& g23() const noexcept { return g23_; }

  /// The (x,z) marginal, a coupling of g12.mu() with g23.nu().
  Coupling project_xz() const;

 private:
  Matrix x_, y_, z_;
  Vector weights_;
  Coupling g12_;
  Coupling g23_;
};

/// Glues two couplings along their shared middle marginal. Middle atoms are
/// matched by position within `tol`, so both couplings should be built from
/// the same atom list.
TriCoupling glue(const Coupling& g12, const Coupling& g23, double tol = kAtomTol);

}  // namespace oblique
