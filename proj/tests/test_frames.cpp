#include <gtest/gtest.h>

#include "support/generators.hpp"

namespace oblique {
namespace {

using testing::SkewLine;
using testing::Rng;
using testing::span1;
using testing::vec2;

TEST(FiniteFrame, ValidatesRangeAndSpan) {
  EXPECT_THROW(FiniteFrame(vec2(1, 1), span1(1, 0)), Error);
  try {
    FiniteFrame(Matrix::Zero(2, 2), Subspace::full(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotAFrame);
  }
  EXPECT_EQ(FiniteFrame::spanning((Matrix(3, 2) << 1, 0, 0, 1, 0, 0).finished()).subspace().dim(), 2);
}

TEST(FrameOperator, Examples) {
  EXPECT_TRUE(frame_operator(FiniteFrame(Matrix::Identity(2, 2), Subspace::full(2))).isApprox(Matrix::Identity(2, 2)));
  EXPECT_LT((frame_operator(testing::mercedes_benz()) - 1.5 * Matrix::Identity(2, 2)).norm(), 1e-15);
  const Matrix s = frame_operator(SkewLine{}.frame);
  EXPECT_TRUE(s.isApprox((Matrix(2, 2) << 1, 0, 0, 0).finished()));
}

TEST(FrameBounds, Examples) {
  const FrameBounds id = frame_bounds(FiniteFrame(Matrix::Identity(2, 2), Subspace::full(2)));
  EXPECT_DOUBLE_EQ(id.lower, 1.0);
  EXPECT_DOUBLE_EQ(id.upper, 1.0);
  const FrameBounds mb = frame_bounds(testing::mercedes_benz());
  EXPECT_NEAR(mb.lower, 1.5, 1e-14);
  EXPECT_NEAR(mb.upper, 1.5, 1e-14);
  const FrameBounds line = frame_bounds(FiniteFrame((Matrix(2, 2) << 1, 2, 0, 0).finished(), span1(1, 0)));
  EXPECT_NEAR(line.lower, 5.0, 1e-13);
  EXPECT_NEAR(line.upper, 5.0, 1e-13);
}

TEST(CanonicalDual, Examples) {
  const SkewLine ex;
  const ObliqueDualPair pair = canonical_oblique_dual(ex.frame, ex.v);
  EXPECT_LT((pair.analysis.vectors().col(0) - vec2(1, 1)).norm(), 1e-15);

  const ObliqueDualPair mb = canonical_oblique_dual(testing::mercedes_benz(), Subspace::full(2));
  EXPECT_LT((mb.analysis.vectors() - (2.0 / 3.0) * testing::mercedes_benz_vectors()).norm(), 1e-14);

  // Parseval frame on W = V is its own canonical dual.
  Rng rng(2);
  const Subspace w = testing::qr_subspace(testing::gaussian(rng, 4, 2));
  const FiniteFrame parseval(w.basis() * testing::qr_subspace(testing::gaussian(rng, 3, 2)).basis().transpose(), w);
  const ObliqueDualPair self = canonical_oblique_dual(parseval, w);
  EXPECT_LT((self.analysis.vectors() - parseval.vectors()).norm(), 1e-12);
}

TEST(CanonicalDual, RandomFramesAreDuals) {
  Rng rng(23);
  for (int t = 0; t < 100; ++t) {
    const testing::RandomCase c = testing::random_case(rng, {.n_lo = 2, .n_hi = 8});
    const ObliqueDualPair pair = canonical_oblique_dual(c.frame, c.v);
    EXPECT_LE(pair.residual, 1e-9);
    EXPECT_TRUE(is_oblique_dual(pair.synthesis, pair.analysis).is_dual);
  }
}

TEST(DualFamily, ZeroParameterGivesCanonical) {
  const testing::RandomCase c = [] {
    Rng rng(4);
    return testing::random_case(rng, {.strictly_redundant = true});
  }();
  const ObliqueDualPair canon = canonical_oblique_dual(c.frame, c.v);
  const ObliqueDualPair zero = oblique_dual_family(c.frame, c.v, Matrix::Zero(c.n, c.count));
  EXPECT_LT((canon.analysis.vectors() - zero.analysis.vectors()).norm(), 1e-14);
}

TEST(DualFamily, EveryMemberIsADualAndTheFamilyIsComplete) {
  Rng rng(29);
  for (int t = 0; t < 100; ++t) {
    const testing::RandomCase c = testing::random_case(rng);
    const Matrix h = c.v.basis() * testing::gaussian(rng, c.d, c.count);
    const ObliqueDualPair pair = oblique_dual_family(c.frame, c.v, h);
    EXPECT_LE(pair.residual, 1e-9);
    // Converse: h_i = v_i reproduces v_i.
    const ObliqueDualPair again = oblique_dual_family(c.frame, c.v, pair.analysis.vectors());
    EXPECT_LT((again.analysis.vectors() - pair.analysis.vectors()).norm(), 1e-9 * (1.0 + h.norm()));
  }
}

TEST(DualFamily, MercedesBenzPerturbationRaisesPotential) {
  const FiniteFrame f = testing::mercedes_benz();
  Matrix h = Matrix::Zero(2, 3);
  h.col(0) = 0.1 * f.vectors().col(0);
  const ObliqueDualPair pair = oblique_dual_family(f, Subspace::full(2), h);
  EXPECT_GT(dual_p_potential(pair, 2).value, 2.0 + 1e-6);
}

TEST(DualFamily, Errors) {
  const SkewLine ex;
  try {
    oblique_dual_family(ex.frame, ex.v, Matrix::Zero(2, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
  try {
    oblique_dual_family(ex.frame, ex.v, vec2(1, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RangeViolation);
  }
}

TEST(IsObliqueDual, Examples) {
  const SkewLine ex;
  const DualCheck good = is_oblique_dual(ex.frame, FiniteFrame(vec2(1, 1), ex.v));
  EXPECT_TRUE(good.is_dual);
  EXPECT_LT(good.residual, 1e-15);
  // sum w v^T - pi = [[2,2],[0,0]] - [[1,1],[0,0]], spectral norm sqrt(2).
  const DualCheck bad = is_oblique_dual(ex.frame, FiniteFrame(vec2(2, 2), ex.v));
  EXPECT_FALSE(bad.is_dual);
  EXPECT_NEAR(bad.residual, std::sqrt(2.0), 1e-14);
  const FiniteFrame id(Matrix::Identity(3, 3), Subspace::full(3));
  EXPECT_TRUE(is_oblique_dual(id, id).is_dual);
  EXPECT_NEAR(make_dual_pair(ex.frame, FiniteFrame(vec2(2, 2), ex.v)).residual, std::sqrt(2.0), 1e-14);
}

TEST(Reconstruct, Examples) {
  const SkewLine ex;
  const ObliqueDualPair pair = canonical_oblique_dual(ex.frame, ex.v);
  const Reconstruction in_w = reconstruct(vec2(3, 0), pair);
  EXPECT_LT((in_w.fhat - vec2(3, 0)).norm(), 1e-14);
  const Reconstruction r = reconstruct(vec2(0, 1), pair);
  EXPECT_LT((r.fhat - vec2(1, 0)).norm(), 1e-14);
  EXPECT_LT(r.consistency_residual, 1e-14);
  const Reconstruction kernel = reconstruct(vec2(1, -1), pair);
  EXPECT_LT(kernel.fhat.norm(), 1e-14);
}

TEST(Reconstruct, ErrorSandwichOnRandomSignals) {
  Rng rng(31);
  for (int t = 0; t < 10; ++t) {
    const testing::RandomCase c = testing::random_case(rng);
    const ObliqueDualPair pair = canonical_oblique_dual(c.frame, c.v);
    const Matrix pw = orthogonal_projection(c.w);
    const double cos_wv = subspace_angle_cos(c.w, c.v);
    const Matrix probes = testing::gaussian(rng, c.n, 1000);
    for (Index k = 0; k < probes.cols(); ++k) {
      const Vector f = probes.col(k);
      const Reconstruction r = reconstruct(f, pair);
      const double orth = (f - pw * f).norm();
      const double obl = (f - r.fhat).norm();
      ASSERT_LE(orth, obl + 1e-9);
      ASSERT_LE(obl, orth / cos_wv + 1e-9);
      ASSERT_LE(r.consistency_residual, 1e-9 * f.norm() * pair.analysis.vectors().colwise().norm().maxCoeff() + 1e-12);
    }
  }
}

}  // namespace
}  // namespace oblique
