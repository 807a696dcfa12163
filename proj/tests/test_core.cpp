#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "opideal/ascent.hpp"
#include "opideal/errors.hpp"
#include "opideal/exponent.hpp"
#include "opideal/norm_estimate.hpp"
#include "opideal/sampling.hpp"
#include "opideal/space.hpp"
#include "oracles.hpp"

using namespace opideal;

TEST(Exponent, ParsesCommonForms) {
  EXPECT_TRUE(Exponent::parse("inf").is_infinite());
  EXPECT_EQ(Exponent::parse("2"), Exponent::two());
  EXPECT_EQ(Exponent::parse("1"), Exponent::one());
  EXPECT_DOUBLE_EQ(Exponent::parse("4/3").recip(), 0.75);
  EXPECT_DOUBLE_EQ(Exponent::parse("2.5").value(), 2.5);
  EXPECT_THROW(Exponent::parse("0.5"), DomainError);
  EXPECT_THROW(Exponent::parse("abc"), DomainError);
  EXPECT_THROW(Exponent::from_recip(1.5), DomainError);
}

TEST(Exponent, DualityIsAnExactInvolution) {
  oracle::Gen g(11);
  for (int i = 0; i < 1000; ++i) {
    const Exponent e = Exponent::from_recip(g.recip());
    EXPECT_EQ(e.dual().dual(), e);
    EXPECT_EQ(e.dual().dual().dual().recip(), e.dual().recip());
  }
  EXPECT_TRUE(Exponent::one().dual().is_infinite());
  EXPECT_EQ(Exponent::two().dual(), Exponent::two());
  EXPECT_EQ(Exponent::parse("4/3").dual(), Exponent::parse("4"));
}

TEST(Exponent, StringRoundTrip) {
  for (const char* s : {"1", "2", "inf", "4/3", "3", "3/2", "8"}) {
    EXPECT_EQ(Exponent::parse(Exponent::parse(s).to_string()), Exponent::parse(s)) << s;
  }
  EXPECT_EQ(Exponent::parse("4/3").to_string(), "4/3");
  EXPECT_LT(Exponent::two(), Exponent::infinity());
}

TEST(NormEstimate, FactoriesValidate) {
  EXPECT_THROW(NormEstimate::exact(std::nan(""), "x"), DomainError);
  EXPECT_THROW(NormEstimate::sampled(1.0, -1.0, "x"), DomainError);
  EXPECT_TRUE(NormEstimate::sampled(1.0, 0.1, "x").bounds_below());
  EXPECT_TRUE(NormEstimate::sampled(1.0, 0.1, "x").bounds_above());
  EXPECT_FALSE(NormEstimate::lower(1.0, "x").bounds_above());
  EXPECT_FALSE(NormEstimate::upper(1.0, "x").bounds_below());
  EXPECT_FALSE(NormEstimate::heuristic(1.0, "x").bounds_below());
  EXPECT_FALSE(NormEstimate::heuristic(1.0, "x").bounds_above());
}

TEST(Space, ParseAndPrint) {
  const auto s = SpaceDescriptor::parse("S4/3:8");
  EXPECT_EQ(s.kind, SpaceKind::Schatten);
  EXPECT_EQ(s.dim, 8u);
  EXPECT_EQ(s.element_size(), 64u);
  EXPECT_EQ(s.to_string(), "S4/3:8");
  EXPECT_EQ(SpaceDescriptor::parse("linf:16").to_string(), "linf:16");
  EXPECT_THROW(SpaceDescriptor::parse("x2:3"), DomainError);
  EXPECT_THROW(SpaceDescriptor::parse("l2:0"), DomainError);
  EXPECT_THROW(SpaceDescriptor::parse("l2"), DomainError);
}

TEST(Space, LpNormMatchesNaiveAndIsMonotoneInP) {
  oracle::Gen g(3);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd a(static_cast<Eigen::Index>(g.index(1, 20)));
    for (auto& x : a) x = std::abs(g.normal());
    double prev = std::numeric_limits<double>::infinity();
    for (double p : {1.0, 1.5, 2.0, 3.0, 7.0}) {
      const double v = lp_norm(a, Exponent::from_value(p));
      EXPECT_NEAR(v, oracle::lp(a, p), 1e-12 * v);
      EXPECT_LE(v, prev * (1 + 1e-14));
      prev = v;
    }
    EXPECT_DOUBLE_EQ(lp_norm(a, Exponent::infinity()), a.maxCoeff());
  }
}

TEST(Space, LpNormScalesWithoutOverflow) {
  Eigen::VectorXd a = Eigen::VectorXd::Constant(4, 1e200);
  EXPECT_NEAR(lp_norm(a, Exponent::from_value(3)) / 1e200, std::pow(4.0, 1.0 / 3.0), 1e-12);
}

TEST(Space, SingularValuesAgreeWithJacobiOracle) {
  oracle::Gen g(5);
  for (int trial = 0; trial < 40; ++trial) {
    const auto r = static_cast<Eigen::Index>(g.index(1, 12));
    const auto c = static_cast<Eigen::Index>(g.index(1, 12));
    const Eigen::MatrixXcd m = g.complex_matrix(r, c);
    const Eigen::VectorXd ref = oracle::jacobi_singular_values(m);
    const Eigen::VectorXd acc = singular_values(m, SvdRoute::Accurate);
    const Eigen::VectorXd gram = singular_values(m, SvdRoute::Gram);
    const Eigen::Index k = std::min(r, c);
    ASSERT_GE(acc.size(), k);
    for (Eigen::Index i = 0; i < k; ++i) {
      EXPECT_NEAR(acc(i), ref(i), 1e-10 * ref(0));
      EXPECT_NEAR(gram(i), ref(i), 1e-6 * ref(0));
    }
  }
}

TEST(Space, SchattenIdentities) {
  oracle::Gen g(8);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = g.index(1, 10);
    const Eigen::MatrixXcd m = g.complex_matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    const Eigen::VectorXcd x = Eigen::Map<const Eigen::VectorXcd>(m.data(), m.size());
    const Eigen::VectorXd s = oracle::jacobi_singular_values(m);
    // S_2 is the Frobenius norm, S_inf the operator norm, S_1 the trace norm.
    EXPECT_NEAR(element_norm(x, SpaceDescriptor::schatten(n, Exponent::two())), m.norm(), 1e-12 * m.norm());
    EXPECT_NEAR(element_norm(x, SpaceDescriptor::schatten(n, Exponent::infinity())), s(0), 1e-10 * s(0));
    EXPECT_NEAR(element_norm(x, SpaceDescriptor::schatten(n, Exponent::one())), s.sum(), 1e-10 * s.sum());
    // S_4 through the Gram shortcut.
    const double s4 = oracle::lp(s, 4.0);
    EXPECT_NEAR(element_norm(x, SpaceDescriptor::schatten(n, Exponent::from_value(4)), SvdRoute::Gram), s4,
                1e-10 * s4);
    // Unitary invariance: ||U M|| = ||M||.
    Eigen::MatrixXcd q = g.complex_matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(q);
    const Eigen::MatrixXcd u = qr.householderQ();
    const Eigen::MatrixXcd um = u * m;
    const Eigen::VectorXcd ux = Eigen::Map<const Eigen::VectorXcd>(um.data(), um.size());
    const auto s3 = SpaceDescriptor::schatten(n, Exponent::from_value(3));
    EXPECT_NEAR(element_norm(ux, s3), element_norm(x, s3), 1e-10 * element_norm(x, s3));
    // Duality: |tr(A^* B)| <= ||A||_p ||B||_p'.
    const Eigen::MatrixXcd b = g.complex_matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    const Eigen::VectorXcd y = Eigen::Map<const Eigen::VectorXcd>(b.data(), b.size());
    const double pairing = std::abs(x.dot(y));
    EXPECT_LE(pairing, element_norm(x, s3) * element_norm(y, s3.with_exponent(Exponent::from_value(3).dual())) *
                           (1 + 1e-12));
  }
}

TEST(Space, SequenceNormNonconformingThrows) {
  Eigen::VectorXcd x(3);
  EXPECT_THROW(element_norm(x, SpaceDescriptor::sequence(4, Exponent::two())), DomainError);
}

TEST(Space, InclusionNormsMatchExtremalVectors) {
  const std::size_t n = 9;
  for (double ru : {0.0, 0.25, 0.5, 1.0}) {
    for (double rv : {0.0, 0.25, 0.5, 1.0}) {
      const Exponent u = Exponent::from_recip(ru), v = Exponent::from_recip(rv);
      const double expect = std::pow(9.0, std::max(0.0, rv - ru));
      EXPECT_NEAR(inclusion_norm(u, v, n, SpaceKind::Sequence), expect, 1e-12);
      // Extremal vector: the all-ones vector when 1/v > 1/u, a coordinate vector otherwise.
      const Eigen::VectorXcd x = rv > ru ? Eigen::VectorXcd(Eigen::VectorXcd::Ones(9)) : Eigen::VectorXcd(Eigen::VectorXcd::Unit(9, 0));
      const double ratio = element_norm(x, SpaceDescriptor::sequence(n, v)) /
                           element_norm(x, SpaceDescriptor::sequence(n, u));
      EXPECT_NEAR(ratio, expect, 1e-12);
    }
  }
}

TEST(SpaceMap, IdentityAndMatrixAgree) {
  oracle::Gen g(21);
  const auto d = SpaceDescriptor::sequence(5, Exponent::two());
  const auto id = SpaceMap::identity(d, d, 2.0);
  const auto dense = SpaceMap(d, d, Eigen::MatrixXcd::Identity(5, 5) * 2.0);
  const Eigen::VectorXcd x = g.complex_vector(5);
  EXPECT_LT((id.apply(x) - dense.apply(x)).norm(), 1e-14);
  EXPECT_NEAR(id.frobenius_norm(), dense.frobenius_norm(), 1e-14);
  EXPECT_NEAR(id.frobenius_norm(), 2.0 * std::sqrt(5.0), 1e-14);
  EXPECT_THROW(SpaceMap(d, d, Eigen::MatrixXcd::Identity(4, 4)), DomainError);
}

TEST(Sampling, DeterministicAcrossThreadCounts) {
  SamplingConfig c;
  c.samples = 5000;
  c.seed = 99;
  auto fn = [](const Eigen::VectorXcd& g) { return g.squaredNorm(); };
  c.threads = 1;
  const auto a = gaussian_mean(c, 7, fn);
  c.threads = 4;
  const auto b = gaussian_mean(c, 7, fn);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.std_error, b.std_error);
  c.seed = 100;
  EXPECT_NE(gaussian_mean(c, 7, fn).mean, a.mean);
}

TEST(Sampling, UnitVarianceForBothKinds) {
  for (auto kind : {GaussianKind::Real, GaussianKind::Complex}) {
    SamplingConfig c;
    c.samples = 40000;
    c.seed = 1;
    c.gaussian = kind;
    const auto s = gaussian_mean(c, 3, [](const Eigen::VectorXcd& g) { return g.squaredNorm() / 3.0; });
    EXPECT_NEAR(s.mean, 1.0, 4 * s.std_error);
  }
}

TEST(Sampling, FourthSchattenMomentOfGaussianMatrix) {
  // E ||G||_{S_4}^4 = E tr((G^T G)^2) = n^2 (2n + 1) for a real n x n Gaussian matrix.
  const std::size_t n = 6;
  SamplingConfig c;
  c.samples = 20000;
  c.seed = 4;
  const auto d = SpaceDescriptor::schatten(n, Exponent::from_value(4));
  const auto s = gaussian_mean(c, n * n, [&](const Eigen::VectorXcd& g) {
    const double v = element_norm(g, d);
    return v * v * v * v;
  });
  const double expect = 36.0 * 13.0;
  EXPECT_NEAR(s.mean, expect, 4 * s.std_error);
}

TEST(Ascent, FindsLargestEigenvalueAndReportsExactScore) {
  // Maximize a^* H a on the sphere for Hermitian H; the exact objective is the same function.
  oracle::Gen g(2);
  const Eigen::MatrixXcd b = g.complex_matrix(6, 6);
  const Eigen::MatrixXcd h = b.adjoint() * b;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(h);
  const double top = eig.eigenvalues().maxCoeff();
  auto smooth = [&](const Eigen::VectorXcd& a, Eigen::VectorXcd* grad) {
    if (grad) *grad = 2.0 * h * a;
    return a.dot(h * a).real();
  };
  auto exact = [&](const Eigen::VectorXcd& a) { return a.dot(h * a).real(); };
  AscentConfig cfg{8, 500, 0.1, 1e-12, 5, 2};
  const auto r = sphere_ascent(6, smooth, exact, cfg);
  EXPECT_LE(r.value, top * (1 + 1e-12));
  EXPECT_NEAR(r.value, top, 1e-6 * top);
  EXPECT_NEAR(r.argmax.norm(), 1.0, 1e-12);
  EXPECT_NEAR(exact(r.argmax), r.value, 1e-12 * top);
  cfg.threads = 1;
  EXPECT_EQ(sphere_ascent(6, smooth, exact, cfg).value, r.value);
}
