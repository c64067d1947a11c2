#include "kktstab/linalg.hpp"

#include "../support/generators.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

using namespace kktstab;
using kktstab::testing::Rng;

namespace {

Mat random_symmetric(Rng& rng, int n) {
  Mat g(n, n);
  for (int j = 0; j < n; ++j) g.col(j) = kktstab::testing::gaussian(rng, n);
  return 0.5 * (g + g.transpose());
}

}  // namespace

TEST(SymMatrix, StoresOneSlotPerPair) {
  SymMatrix s(3);
  s.set(2, 0, 4.0);
  EXPECT_EQ(s(0, 2), 4.0);
  const Mat d = s.dense();
  EXPECT_EQ(d(0, 2), d(2, 0));
}

TEST(SymMatrix, FromDenseRejectsAsymmetric) {
  Mat m(2, 2);
  m << 1, 2, 3, 4;
  EXPECT_THROW(SymMatrix::from_dense(m), std::invalid_argument);
  EXPECT_THROW(SymMatrix::from_dense(Mat(2, 3)), std::invalid_argument);
}

TEST(SymEig, MatchesReferenceSolver) {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 8;
    const Mat s = random_symmetric(rng, n);
    const EigDecomp e = sym_eig(s);
    Eigen::SelfAdjointEigenSolver<Mat> ref(s);
    const Vec want = ref.eigenvalues().reverse();
    EXPECT_LE((e.values - want).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, s.norm()));
    EXPECT_LE((e.vectors * e.values.asDiagonal() * e.vectors.transpose() - s).norm(), 1e-12 * std::max(1.0, s.norm()));
    EXPECT_LE((e.vectors.transpose() * e.vectors - Mat::Identity(n, n)).norm(), 1e-12);
    for (int i = 1; i < n; ++i) EXPECT_GE(e.values(i - 1), e.values(i));
  }
}

TEST(SymEig, RepeatedEigenvaluesAndDiagonalInput) {
  const EigDecomp e = sym_eig(Mat(Vec((Vec(4) << 1, 3, 3, -2).finished()).asDiagonal()));
  EXPECT_DOUBLE_EQ(e.values(0), 3.0);
  EXPECT_DOUBLE_EQ(e.values(1), 3.0);
  EXPECT_DOUBLE_EQ(e.values(3), -2.0);
}

TEST(SymEig, BitwiseReproducible) {
  Rng rng(2);
  const Mat s = random_symmetric(rng, 6);
  const EigDecomp a = sym_eig(s), b = sym_eig(s);
  EXPECT_TRUE((a.values.array() == b.values.array()).all());
  EXPECT_TRUE((a.vectors.array() == b.vectors.array()).all());
}

TEST(SymEig, RejectsOversizedInput) {
  EXPECT_THROW(sym_eig(Mat::Identity(kMaxEigDimension + 1, kMaxEigDimension + 1)), std::invalid_argument);
}

TEST(Nullspace, BasisIsOrthonormalAndComplete) {
  Mat m(2, 4);
  m << 1, 2, 0, 1, 0, 1, 1, 0;
  const Mat k = nullspace(m, 1e-12);
  ASSERT_EQ(k.cols(), 2);
  EXPECT_LE((m * k).norm(), 1e-12);
  EXPECT_LE((k.transpose() * k - Mat::Identity(2, 2)).norm(), 1e-12);
  EXPECT_EQ(nullspace(Mat::Identity(3, 3), 1e-12).cols(), 0);
}

TEST(Lstsq, MinimumNormSolution) {
  Mat m(1, 2);
  m << 1, 1;
  const Vec v = lstsq(m, Vec::Constant(1, 2.0));
  EXPECT_NEAR(v(0), 1.0, 1e-14);
  EXPECT_NEAR(v(1), 1.0, 1e-14);
}

TEST(RangeBasis, SpansColumns) {
  Mat m(3, 2);
  m << 1, 2, 1, 2, 0, 0;
  const Mat r = range_basis(m, 1e-12);
  ASSERT_EQ(r.cols(), 1);
  EXPECT_LE((r * (r.transpose() * m) - m).norm(), 1e-12);
}

TEST(PseudoInverse, SatisfiesPenroseIdentity) {
  Rng rng(3);
  Mat g(4, 2);
  for (int j = 0; j < 2; ++j) g.col(j) = kktstab::testing::gaussian(rng, 4);
  const Mat s = g * g.transpose();  // rank 2
  const Mat p = pseudo_inverse(SymMatrix::from_dense(s, 1e-10)).dense();
  EXPECT_LE((s * p * s - s).norm(), 1e-10 * s.norm());
  EXPECT_LE((p * s * p - p).norm(), 1e-8 * std::max(1.0, p.norm()));
}

TEST(SqrtPsd, SquaresBack) {
  Mat s(2, 2);
  s << 1.5, -2, -2, 3;
  const Mat r = sqrt_psd(s);
  EXPECT_LE((r * r - s).norm(), 1e-13);
  EXPECT_LE((r - r.transpose()).norm(), 1e-15);
}

TEST(DefaultRankTol, ScalesWithLargestEigenvalue) {
  EXPECT_DOUBLE_EQ(default_rank_tol((Vec(2) << -4, 1).finished()), 4e-9);
  EXPECT_EQ(default_rank_tol(Vec(0)), 0.0);
}
