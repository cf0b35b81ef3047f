#include <gtest/gtest.h>

#include "support/test_support.hpp"

namespace ckframe {
namespace {

using namespace ckframe::testing;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::ParseError;
}

SampleField counting(const OperatorMatrix& samples) { return SampleField(counting_measure(samples.cols()), samples); }
SampleField scaled12() { return counting(diag({1, 2})); }

/// Weighted operator norm of a coefficient matrix, straight from the singular values.
double weighted_norm_oracle(const SampleField& f, const OperatorMatrix& m) {
  const OperatorMatrix scaled = f.space()->weights().cwiseSqrt().cast<Complex>().asDiagonal() * m;
  return Eigen::JacobiSVD<OperatorMatrix>(scaled).singularValues()(0);
}

TEST(AtomCoefficientMap, Examples) {
  EXPECT_LE(max_abs(atom_coefficient_map(counting(identity(2)), identity(2)).matrix - identity(2)), 1e-15);

  const OperatorMatrix k = diag({1, 2});
  const OperatorMatrix solved = identity(2).partialPivLu().solve(k);
  EXPECT_LE(max_abs(atom_coefficient_map(counting(identity(2)), k).matrix - solved), 1e-15);

  // {e1, e1} with unit weights: least-norm solution of m1 + m2 = 1.
  const SampleField twice = counting(mat({{1, 1}, {0, 0}}));
  const OperatorMatrix e1 = mat({{1}, {0}});
  const OperatorMatrix lsq = synthesis_matrix(twice).completeOrthogonalDecomposition().solve(e1);
  EXPECT_LE(max_abs(lsq - mat({{0.5}, {0.5}})), 1e-15);
  const CoefficientMap m = atom_coefficient_map(twice, e1);
  EXPECT_LE(max_abs(m.matrix - lsq), 1e-15);
  EXPECT_NEAR(m.bound, std::sqrt(0.5), 1e-15);

  EXPECT_EQ(code_of([&] { atom_coefficient_map(twice, identity(2)); }), ErrorCode::RangeNotIncluded);
}

TEST(AtomCoefficientMap, WeightedMinimalNorm) {
  // f = {e1, e1} with weights (1, 3): minimise m1^2 + 3 m2^2 subject to m1 + 3 m2 = 1.
  const SampleField f(weighted_space({1, 3}), mat({{1, 1}, {0, 0}}));
  const CoefficientMap m = atom_coefficient_map(f, mat({{1}, {0}}));
  EXPECT_LE(max_abs(m.matrix - mat({{0.25}, {0.25}})), 1e-15);
  EXPECT_NEAR(m.bound, weighted_norm_oracle(f, m.matrix), 1e-15);
}

TEST(VerifyAtomicDecomposition, Examples) {
  Rng rng(41);
  const Instance inst = random_instance(rng, KChoice::Included);
  const CoefficientMap m = atom_coefficient_map(inst.f, inst.k);
  EXPECT_LE(verify_atomic_decomposition(inst.f, inst.k, m), 1e-10);

  const SampleField onb = counting(identity(2));
  const CoefficientMap zero{OperatorMatrix::Zero(2, 2), 0.0};
  EXPECT_NEAR(verify_atomic_decomposition(onb, identity(2), zero), 1.0, 1e-15);
  EXPECT_THROW(verify_atomic_decomposition(onb, identity(3), zero), Error);
}

TEST(VerifyAtomicDecomposition, KernelPerturbationLeavesReconstruction) {
  Rng rng(42);
  for (int t = 0; t < 20; ++t) {
    const Instance inst = random_instance(rng, KChoice::Included);
    const OperatorMatrix tf = synthesis_matrix(inst.f);
    Eigen::JacobiSVD<OperatorMatrix> svd(tf, Eigen::ComputeFullV);
    const Index rank = (svd.singularValues().array() > 1e-10 * svd.singularValues()(0)).count();
    if (rank == tf.cols()) continue;
    const Vector kernel = svd.matrixV().col(tf.cols() - 1);
    ASSERT_LE((tf * kernel).norm(), 1e-10 * svd.singularValues()(0));

    const CoefficientMap m = atom_coefficient_map(inst.f, inst.k);
    const double base = verify_atomic_decomposition(inst.f, inst.k, m);
    CoefficientMap moved = m;
    moved.matrix.col(0) += 0.3 * kernel;
    moved.bound = weighted_norm_oracle(inst.f, moved.matrix);
    EXPECT_NEAR(verify_atomic_decomposition(inst.f, inst.k, moved), base, 1e-10);
  }
}

TEST(InverseOnRange, Examples) {
  const SampleField f = scaled12();
  EXPECT_LE(max_abs(inverse_on_range(f, identity(2)) - diag({1, 4}).inverse()), 1e-15);
  EXPECT_LE(max_abs(inverse_on_range(f, mat({{1}, {0}})) - diag({1, 0})), 1e-15);

  const SampleField parseval = counting(identity(2));
  const OperatorMatrix k = mat({{1}, {1}});
  const OperatorMatrix g = inverse_on_range(parseval, k);
  const Vector u = vec({1, 1});
  EXPECT_LE((g * frame_operator(parseval) * u - u).norm(), 1e-15);

  EXPECT_EQ(code_of([&] { inverse_on_range(f, OperatorMatrix::Zero(2, 1)); }), ErrorCode::DegenerateOperator);
  EXPECT_EQ(code_of([&] { inverse_on_range(counting(mat({{1}, {0}})), identity(2)); }), ErrorCode::RangeNotIncluded);
}

TEST(InverseOnRange, InvertsOnRangeAndAnnihilatesComplement) {
  Rng rng(43);
  for (int t = 0; t < 50; ++t) {
    const Instance inst = random_instance(rng, KChoice::Included);
    const OperatorMatrix g = inverse_on_range(inst.f, inst.k);
    const OperatorMatrix s = frame_operator(inst.f);
    const double scale = std::max(1.0, op_norm(g));
    for (int j = 0; j < 3; ++j) {
      const Vector u = inst.k * random_vector(rng, inst.k.cols());
      EXPECT_LE((g * s * u - u).norm(), 1e-9 * scale * u.norm());
    }
    // Anything orthogonal to S_f R(k) is sent to zero.
    const OperatorMatrix range = s * inst.k;
    const OperatorMatrix p = range * range.completeOrthogonalDecomposition().pseudoInverse();
    const Vector v = random_vector(rng, s.rows());
    const Vector perp = v - p * v;
    EXPECT_LE((g * perp).norm(), 1e-9 * scale * v.norm());
  }
}

TEST(Sandwich, Examples) {
  const SandwichReport tight = sandwich_details(scaled12(), identity(2));
  const auto [lo, hi] = eig2x2_charpoly(diag({1, 0.25}));
  EXPECT_NEAR(tight.min_form, lo, 1e-15);
  EXPECT_NEAR(tight.max_form, hi, 1e-15);
  EXPECT_NEAR(tight.lower_bound, 0.25, 1e-15);
  EXPECT_NEAR(tight.upper_bound, 1.0, 1e-15);
  EXPECT_NEAR(tight.lower_slack, 0.0, 1e-14);
  EXPECT_NEAR(tight.upper_slack, 0.0, 1e-14);

  EXPECT_NEAR(sandwich_check(counting(identity(2)), identity(2)), 0.0, 1e-14);
}

TEST(Corollary, Examples) {
  const FrameBounds fb = cframe_bounds(scaled12());
  const CorollaryReport id = corollary_details(scaled12(), identity(2));
  EXPECT_NEAR(id.lower_bound, fb.lower.value(), 1e-14);
  EXPECT_NEAR(id.upper_bound, fb.upper, 1e-14);

  // k = 2 e1: A = 1/4, ||k^+|| = 1/2, so the restricted lower bound is 1,
  // and <S_f h, h> = 1 on span{e1}.
  const CorollaryReport col = corollary_details(scaled12(), mat({{2}, {0}}));
  EXPECT_NEAR(col.lower_bound, 1.0, 1e-14);
  EXPECT_NEAR(col.lower_slack, 0.0, 1e-14);
  EXPECT_NEAR(col.upper_slack, 3.0, 1e-14);
  EXPECT_NEAR(corollary_bounds_check(scaled12(), mat({{2}, {0}})), 0.0, 1e-14);

  EXPECT_EQ(code_of([] { corollary_bounds_check(scaled12(), OperatorMatrix::Zero(2, 2)); }),
            ErrorCode::DegenerateOperator);
}

TEST(Sandwich, SlackNonNegativeOnRandomInstances) {
  Rng rng(44);
  for (int t = 0; t < 50; ++t) {
    const Instance inst = t % 2 ? random_instance(rng, KChoice::Included) : random_ck_instance(rng);
    EXPECT_GE(sandwich_check(inst.f, inst.k), -1e-9) << t;
    EXPECT_GE(corollary_bounds_check(inst.f, inst.k), -1e-9) << t;
  }
}

TEST(VerifyDualPair, Examples) {
  const SampleField onb = counting(identity(2));
  const DualPairReport self = verify_dual_pair(onb, onb, identity(2));
  EXPECT_TRUE(self.holds);
  EXPECT_LE(self.max_residual(), 1e-12);
  ASSERT_TRUE(self.onto_k_residual && self.onto_kstar_residual);
  EXPECT_LE(*self.onto_k_residual, 1e-12);

  // Direct reconstruction oracle for g = S_f^{-1} f.
  const SampleField g = counting(diag({1, 0.5}));
  const Vector h = vec({0.3, Complex(-1.0, 2.0)});
  Vector rec = Vector::Zero(2);
  for (Index i = 0; i < 2; ++i) rec += g.sample(i).dot(h) * scaled12().sample(i);
  EXPECT_LE((rec - h).norm(), 1e-15);
  EXPECT_TRUE(verify_dual_pair(scaled12(), g, identity(2)).holds);

  const DualPairReport none = verify_dual_pair(onb, counting(OperatorMatrix::Zero(2, 2)), identity(2));
  EXPECT_FALSE(none.holds);
  EXPECT_NEAR(none.residuals[0], 1.0, 1e-15);

  EXPECT_EQ(code_of([&] { verify_dual_pair(onb, SampleField(weighted_space({1, 2}), identity(2)), identity(2)); }),
            ErrorCode::SpaceMismatch);
  EXPECT_EQ(code_of([&] { verify_dual_pair(onb, onb, identity(3)); }), ErrorCode::DimMismatch);
}

TEST(CanonicalDual, Examples) {
  const SampleField onb = counting(identity(2));
  const CanonicalDual parseval = canonical_dual(onb, identity(2));
  EXPECT_LE(max_abs(parseval.dual_field.samples() - onb.samples()), 1e-12);
  EXPECT_LE(max_abs(parseval.projected_frame.samples() - onb.samples()), 1e-12);

  const CanonicalDual scaled = canonical_dual(scaled12(), identity(2));
  EXPECT_LE(max_abs(scaled.dual_field.samples() - diag({1, 2}).inverse()), 1e-15);
  EXPECT_NEAR(scaled.lower_bound, 0.25, 1e-15);
  EXPECT_NEAR(scaled.upper_bound, 1.0, 1e-15);

  const CanonicalDual col = canonical_dual(scaled12(), mat({{1}, {0}}));
  EXPECT_LE(max_abs(col.projected_frame.samples() - diag({1, 0})), 1e-15);
  EXPECT_LE(max_abs(col.dual_field.samples() - mat({{1, 0}})), 1e-15);
  // k c = sum_i <c, g_i> (P f)_i for scalar c.
  Vector rec = Vector::Zero(2);
  for (Index i = 0; i < 2; ++i) rec += std::conj(col.dual_field.samples()(0, i)) * col.projected_frame.sample(i);
  EXPECT_LE((rec - vec({1, 0})).norm(), 1e-15);
  EXPECT_TRUE(col.verification.holds);

  EXPECT_EQ(code_of([] { canonical_dual(scaled12(), OperatorMatrix::Zero(2, 1)); }), ErrorCode::DegenerateOperator);
}

TEST(DualFrameBounds, Examples) {
  const SampleField onb = counting(identity(2));
  const auto [pf, pg] = dual_frame_bounds_check(onb, onb, identity(2));
  EXPECT_NEAR(pf, 0.0, 1e-15);
  EXPECT_NEAR(pg, 0.0, 1e-15);

  const auto [sf, sg] = dual_frame_bounds_check(scaled12(), counting(diag({1, 0.5})), identity(2));
  EXPECT_NEAR(sg, 0.0, 1e-15);
  EXPECT_NEAR(sf, 0.0, 1e-15);

  EXPECT_EQ(code_of([&] { dual_frame_bounds_check(onb, counting(diag({1, 2})), identity(2)); }),
            ErrorCode::NotADualPair);
}

TEST(AtomsDuals, AtomicDecompositionExactlyWhenCkFrame) {
  Rng rng(45);
  int ok = 0;
  int rejected = 0;
  for (int t = 0; t < 100; ++t) {
    const Instance inst = random_instance(rng, t % 3 ? KChoice::Included : KChoice::Arbitrary);
    const bool ck = ckframe_check(inst.f, inst.k).is_ck_frame;
    try {
      const CoefficientMap m = atom_coefficient_map(inst.f, inst.k);
      EXPECT_TRUE(ck) << t;
      EXPECT_LE(verify_atomic_decomposition(inst.f, inst.k, m), 1e-8) << t;
      ++ok;
    } catch (const Error& e) {
      EXPECT_FALSE(ck) << t;
      EXPECT_EQ(e.code(), ErrorCode::RangeNotIncluded);
      ++rejected;
    }
  }
  EXPECT_GT(ok, 50);
  EXPECT_GT(rejected, 10);
}

TEST(AtomsDuals, CanonicalDualReconstructsAndRespectsBounds) {
  Rng rng(46);
  for (int t = 0; t < 50; ++t) {
    const Instance inst = t % 2 ? random_instance(rng, KChoice::Included) : random_ck_instance(rng);
    const CanonicalDual cd = canonical_dual(inst.f, inst.k);
    const double scale = std::max(1.0, op_norm(inst.k));
    for (Index j = 0; j < inst.k.cols(); ++j) {
      const Vector h0 = Vector::Unit(inst.k.cols(), j);
      Vector rec = Vector::Zero(inst.f.dim());
      for (Index x = 0; x < inst.f.atoms(); ++x) {
        rec += inst.f.space()->weights()(x) * cd.dual_field.sample(x).dot(h0) * cd.projected_frame.sample(x);
      }
      EXPECT_LE((rec - inst.k * h0).norm(), 1e-8 * scale) << t;
    }
    // Optimal bounds of the dual, from its frame operator by loop.
    const OperatorMatrix sg = frame_operator_loop(cd.dual_field);
    const double upper = Eigen::SelfAdjointEigenSolver<OperatorMatrix>(sg).eigenvalues().maxCoeff();
    EXPECT_NEAR(cd.dual_upper, upper, 1e-10 * std::max(1.0, upper)) << t;
    EXPECT_GE(cd.dual_lower, cd.lower_bound - 1e-8) << t;
    EXPECT_EQ(cd.bounds_hold, upper <= cd.upper_bound + 1e-8 * std::max(1.0, cd.upper_bound)) << t;
  }
}

TEST(AtomsDuals, CanonicalDualUpperBoundWhenRangeIsInvariant) {
  // With k = I the range of k is trivially S_f-invariant.
  Rng rng(50);
  for (int t = 0; t < 30; ++t) {
    const Instance inst = random_ck_instance(rng);
    const CanonicalDual cd = canonical_dual(inst.f, identity(inst.f.dim()));
    const double upper = Eigen::SelfAdjointEigenSolver<OperatorMatrix>(frame_operator_loop(cd.dual_field))
                             .eigenvalues()
                             .maxCoeff();
    EXPECT_LE(upper, cd.upper_bound + 1e-8) << t;
    EXPECT_TRUE(cd.bounds_hold) << t;
  }
}

TEST(AtomsDuals, ParsevalIdempotence) {
  Rng rng(47);
  for (int t = 0; t < 10; ++t) {
    const Index n = uniform_int(rng, 1, 5);
    // Rows of a unitary, split over n + 2 atoms and rescaled by the weights, form a Parseval field.
    const Index atoms = n + 2;
    const OperatorMatrix u = random_unitary(rng, atoms).topRows(n);
    const SpaceRef space = random_weights(rng, atoms);
    const SampleField f(space, u * space->weights().cwiseSqrt().cwiseInverse().cast<Complex>().asDiagonal());
    ASSERT_LE(max_abs(frame_operator(f) - identity(n)), 1e-12);
    const CanonicalDual cd = canonical_dual(f, identity(n));
    EXPECT_LE(max_abs(cd.dual_field.samples() - f.samples()), 1e-12);
  }
}

struct PairCase {
  SampleField f;
  SampleField g;
  OperatorMatrix k;
};

PairCase random_pair_case(Rng& rng, bool broken) {
  const Instance inst = random_instance(rng, KChoice::Included, 4);
  const CanonicalDual cd = canonical_dual(inst.f, inst.k);
  OperatorMatrix g = cd.dual_field.samples();
  if (broken) g += random_matrix(rng, g.rows(), g.cols());
  return {cd.projected_frame, SampleField(inst.f.space(), g), inst.k};
}

TEST(AtomsDuals, FiveConditionsNeverSplit) {
  Rng rng(48);
  const double tol = 1e-8;
  for (int t = 0; t < 100; ++t) {
    const bool broken = t % 2 == 1;
    const PairCase c = random_pair_case(rng, broken);
    const DualPairReport r = verify_dual_pair(c.f, c.g, c.k);
    int pass = 0;
    int fail = 0;
    for (double v : r.residuals) {
      pass += v <= tol;
      fail += v > 10 * tol;
    }
    EXPECT_TRUE(pass == 5 || fail == 5) << t;
    EXPECT_EQ(r.holds, !broken) << t;
    for (const auto& onto : {r.onto_k_residual, r.onto_kstar_residual}) {
      if (onto) EXPECT_EQ(*onto <= tol, r.holds) << t;
    }

    // c5 on a random pair of orthonormal bases gives the same verdict.
    const OperatorMatrix e = random_unitary(rng, c.f.dim());
    const OperatorMatrix gamma = random_unitary(rng, c.g.dim());
    const DualPairReport rotated = verify_dual_pair(c.f, c.g, c.k, {}, e, gamma);
    EXPECT_EQ(rotated.residuals[4] <= tol, r.holds) << t;
  }
}

TEST(AtomsDuals, DualLowerBoundMargin) {
  Rng rng(49);
  for (int t = 0; t < 30; ++t) {
    const PairCase c = random_pair_case(rng, false);
    const auto [margin_f, margin_g] = dual_frame_bounds_check(c.f, c.g, c.k);
    EXPECT_GE(margin_g, -1e-9) << t;
    EXPECT_GE(margin_f, -1e-9) << t;
  }
}

}  // namespace
}  // namespace ckframe
