#include <gtest/gtest.h>

#include <random>

#include "ddlure/errors.hpp"
#include "ddlure/matcore.hpp"
#include "ddlure/scenarios.hpp"

using namespace ddlure;

namespace {

Mat random_psd(std::mt19937_64& rng, Index n, Index rank) {
  std::normal_distribution<double> nd;
  const Mat g = Mat::NullaryExpr(n, rank, [&] { return nd(rng); });
  return g * g.transpose();
}

}  // namespace

TEST(SymMat, RejectsAsymmetricInput) {
  Mat m{{1.0, 2.0}, {2.1, 1.0}};
  EXPECT_THROW(SymMat{m}, InvalidInput);
  EXPECT_NO_THROW(SymMat::symmetrized(m));
  EXPECT_DOUBLE_EQ(SymMat::symmetrized(m)(0, 1), 2.05);
}

TEST(SymMat, RejectsNonFinite) {
  Mat m = Mat::Identity(2, 2);
  m(0, 0) = std::nan("");
  EXPECT_THROW(SymMat{m}, InvalidInput);
  EXPECT_THROW(definiteness(SymMat::symmetrized(Mat::Identity(2, 2) * INFINITY)),
               InvalidInput);
}

TEST(Definiteness, Identity) {
  EXPECT_EQ(definiteness(SymMat::identity(2)), Definiteness::kPD);
}

TEST(Definiteness, PublishedResidualMatrixIsNegativeDefinite) {
  const SymMat m(reference::ex1_lyap());
  EXPECT_EQ(definiteness(m), Definiteness::kND);
}

TEST(Definiteness, PublishedLyapunovMatrixIsPositiveDefinite) {
  EXPECT_EQ(definiteness(SymMat(reference::ex2_P())), Definiteness::kPD);
}

TEST(Definiteness, AllClasses) {
  EXPECT_EQ(definiteness(SymMat::zero(3)), Definiteness::kZero);
  EXPECT_EQ(definiteness(SymMat(Mat{{1, 0}, {0, 0}})), Definiteness::kPSD);
  EXPECT_EQ(definiteness(SymMat(Mat{{-1, 0}, {0, 0}})), Definiteness::kNSD);
  EXPECT_EQ(definiteness(SymMat(Mat{{1, 0}, {0, -1}})), Definiteness::kIndefinite);
  EXPECT_EQ(definiteness(SymMat(Mat{{-2, 0}, {0, -1}})), Definiteness::kND);
}

TEST(Definiteness, ToleranceScalesWithNorm) {
  // 1e-7 relative to a norm of 1e6 is below the 1e-9 relative threshold.
  const SymMat m(Mat{{1e6, 0}, {0, 1e-7}});
  EXPECT_EQ(definiteness(m), Definiteness::kPSD);
}

TEST(Definiteness, NegationMirrors) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  auto mirror = [](Definiteness d) {
    switch (d) {
      case Definiteness::kPD: return Definiteness::kND;
      case Definiteness::kND: return Definiteness::kPD;
      case Definiteness::kPSD: return Definiteness::kNSD;
      case Definiteness::kNSD: return Definiteness::kPSD;
      default: return d;
    }
  };
  for (int i = 0; i < 200; ++i) {
    const Index n = 1 + i % 6;
    Mat m;
    switch (i % 3) {
      case 0: m = random_psd(rng, n, n); break;
      case 1: m = random_psd(rng, n, std::max<Index>(1, n - 1)); break;
      default: m = Mat::NullaryExpr(n, n, [&] { return nd(rng); }); break;
    }
    const SymMat s = SymMat::symmetrized(m);
    EXPECT_EQ(definiteness(-s), mirror(definiteness(s))) << "instance " << i;
  }
}

TEST(PsdSqrt, IdentityAndDiagonal) {
  EXPECT_TRUE(psd_sqrt(SymMat::identity(3)).mat().isApprox(Mat::Identity(3, 3)));
  const Mat d = psd_sqrt(SymMat(Mat{{4, 0}, {0, 9}})).mat();
  EXPECT_NEAR(d(0, 0), 2.0, 1e-14);
  EXPECT_NEAR(d(1, 1), 3.0, 1e-14);
  EXPECT_NEAR(d(0, 1), 0.0, 1e-14);
}

TEST(PsdSqrt, MatchesIndependentEigenOracle) {
  std::mt19937_64 rng(11);
  const Mat m = random_psd(rng, 5, 5);
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  const Mat oracle = es.eigenvectors() *
                     es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                     es.eigenvectors().transpose();
  const Mat n = psd_sqrt(SymMat::symmetrized(m)).mat();
  EXPECT_LE((n - oracle).norm(), 1e-9 * std::max(1.0, m.norm()));
}

TEST(PsdSqrt, RejectsIndefinite) {
  EXPECT_THROW(psd_sqrt(SymMat(Mat{{1, 0}, {0, -1}})), DomainError);
  EXPECT_THROW(psd_sqrt(SymMat(Mat{{-1, 0}, {0, -1}})), DomainError);
}

TEST(PsdSqrt, ClampsRoundoffNegatives) {
  const SymMat m(Mat{{1.0, 0}, {0, -1e-12}});
  const Mat n = psd_sqrt(m).mat();
  EXPECT_DOUBLE_EQ(n(1, 1), 0.0);
}

TEST(PsdSqrt, SquareReproducesInputOnRandomInstances) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 1000; ++i) {
    const Index n = 1 + i % 20;
    const Index rank = 1 + static_cast<Index>(rng() % n);
    const SymMat m = SymMat::symmetrized(random_psd(rng, n, rank));
    const Mat r = psd_sqrt(m).mat();
    ASSERT_LE((r * r - m.mat()).norm(), 1e-9 * std::max(1.0, m.mat().norm()))
        << "instance " << i;
  }
}

TEST(RowRank, Basics) {
  EXPECT_EQ(row_rank(Mat::Zero(3, 5)), 0);
  EXPECT_EQ(row_rank(Mat::Identity(3, 5)), 3);
  Mat w0(3, 5);
  w0 << reference::ex1_U0(), reference::ex1_X0();
  EXPECT_EQ(row_rank(w0), 3);
}

TEST(RowRank, Example2PsiFullRank) {
  const DataSet d = example2_dataset();
  Mat psi(4, d.T());
  psi << d.X0, d.F0, d.U0;
  EXPECT_EQ(row_rank(psi), 4);
}

TEST(RowRank, InvariantUnderPermutationAndInvertibleMaps) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 100; ++i) {
    const Index r = 2 + i % 4;
    const Index c = 8;
    const Index k = 1 + static_cast<Index>(rng() % r);
    const Mat m = Mat::NullaryExpr(r, k, [&] { return nd(rng); }) *
                  Mat::NullaryExpr(k, c, [&] { return nd(rng); });
    const int base = row_rank(m);
    ASSERT_EQ(base, k);
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(r);
    perm.setIdentity();
    std::shuffle(perm.indices().data(), perm.indices().data() + r, rng);
    EXPECT_EQ(row_rank(perm * m), base);
    // well-conditioned: identity plus a small perturbation
    const Mat t = Mat::Identity(r, r) +
                  0.2 * Mat::NullaryExpr(r, r, [&] { return nd(rng); }) / r;
    EXPECT_EQ(row_rank(t * m), base);
  }
}

TEST(Spectral, RadiusAndAbscissa) {
  const Mat a{{0.0, 1.0}, {-2.0, -3.0}};  // eigenvalues -1, -2
  EXPECT_NEAR(spectral_radius(a), 2.0, 1e-12);
  EXPECT_NEAR(spectral_abscissa(a), -1.0, 1e-12);
  const Mat rot{{0.0, -1.0}, {1.0, 0.0}};
  EXPECT_NEAR(spectral_radius(rot), 1.0, 1e-12);
  EXPECT_NEAR(spectral_abscissa(rot), 0.0, 1e-12);
}

TEST(BlockDiag, Shapes) {
  const Mat b = block_diag(Mat::Ones(2, 1), Mat::Constant(1, 3, 2.0));
  EXPECT_EQ(b.rows(), 3);
  EXPECT_EQ(b.cols(), 4);
  EXPECT_EQ(b(2, 3), 2.0);
  EXPECT_EQ(b(0, 3), 0.0);
}
