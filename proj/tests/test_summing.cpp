#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/QR>

#include "opideal/errors.hpp"
#include "opideal/summing.hpp"
#include "oracles.hpp"

using namespace opideal;

namespace {

SamplingConfig mc(std::size_t samples, std::uint64_t seed) {
  SamplingConfig c;
  c.samples = samples;
  c.seed = seed;
  c.threads = 1;
  c.force_sampling = true;
  return c;
}

SpaceDescriptor seq(std::size_t n, const char* e) { return SpaceDescriptor::sequence(n, Exponent::parse(e)); }
SpaceDescriptor sch(std::size_t n, const char* e) { return SpaceDescriptor::schatten(n, Exponent::parse(e)); }

}  // namespace

TEST(EllNorm, HilbertIdentityIsRootN) {
  for (std::size_t n : {4u, 16u, 64u}) {
    const auto t = SpaceMap::identity(seq(n, "2"), seq(n, "2"));
    const NormEstimate exact = ell_norm_mc(t, {});
    EXPECT_EQ(exact.cert, Certification::Exact);
    EXPECT_EQ(exact.value, std::sqrt(static_cast<double>(n)));
    const NormEstimate sampled = ell_norm_mc(t, mc(100000, 7));
    EXPECT_EQ(sampled.cert, Certification::Sampled);
    EXPECT_NEAR(sampled.value, std::sqrt(static_cast<double>(n)), 0.01 * std::sqrt(static_cast<double>(n)));
  }
  EXPECT_THROW(ell_norm_mc(SpaceMap::identity(seq(4, "1"), seq(4, "2")), {}), DomainError);
}

TEST(EllNorm, UnitaryInvarianceAndGeneralMaps) {
  oracle::Gen g(2);
  const Eigen::MatrixXcd a = g.complex_matrix(6, 6);
  const Eigen::MatrixXcd q = Eigen::HouseholderQR<Eigen::MatrixXcd>(g.complex_matrix(6, 6)).householderQ();
  const SpaceMap t(seq(6, "2"), seq(6, "inf"), a);
  // Complex unitaries preserve the law of complex Gaussian vectors only.
  SamplingConfig c1 = mc(40000, 1), c2 = mc(40000, 2);
  c1.gaussian = c2.gaussian = GaussianKind::Complex;
  const NormEstimate e1 = ell_norm_mc(t, c1);
  const NormEstimate e2 = ell_norm_mc(t.compose_right(q), c2);
  const double se = std::hypot(e1.stderr_or_zero(), e2.stderr_or_zero());
  EXPECT_LE(std::abs(e1.value - e2.value), 3 * se);

  // Frobenius closed form equals the Monte Carlo value for a Hilbert codomain.
  const SpaceMap h(seq(6, "2"), seq(6, "2"), a);
  const NormEstimate closed = ell_norm_mc(h, {});
  const NormEstimate sampled = ell_norm_mc(h, mc(40000, 3));
  EXPECT_NEAR(closed.value, a.norm(), 1e-12);
  EXPECT_LE(std::abs(sampled.value - closed.value), 3 * sampled.stderr_or_zero());
}

TEST(EllNorm, SchattenFourthMomentClosedForm) {
  // E ||G||_{S_4}^4 = n^2 (2n + 1) for a real Gaussian n x n matrix; the
  // l-norm is (E ||G||_{S_4}^2)^{1/2}, bounded above by the quartic root.
  const std::size_t n = 6;
  const auto t = SpaceMap::identity(sch(n, "2"), sch(n, "4"));
  const NormEstimate e = ell_norm_mc(t, mc(20000, 4));
  const double quartic = std::pow(36.0 * 13.0, 0.25);
  EXPECT_LE(e.value, quartic + 3 * e.stderr_or_zero());
  EXPECT_GT(e.value, 0.95 * quartic);
}

TEST(PiBLower, IdentityOnHilbertSpaceAgreesAcrossSystems) {
  const std::size_t n = 8;
  const auto t = SpaceMap::identity(seq(n, "2"), seq(n, "2"));
  const VectorSystem basis = families::coordinate_basis(seq(n, "2"));
  const auto chars = OrthonormalSystem::characters(CharacterSet::full(8));
  const auto gauss = OrthonormalSystem::gaussian(mc(20000, 9));
  const NormEstimate a = pi_b_lower(t, chars, basis);
  const NormEstimate b = pi_b_lower(t, gauss, basis);
  EXPECT_EQ(a.cert, Certification::CertifiedLower);
  EXPECT_NEAR(a.value, std::sqrt(8.0), 1e-12);
  EXPECT_LE(std::abs(b.value - std::sqrt(8.0)), 3 * b.stderr_or_zero());
  EXPECT_NEAR(ell_norm_mc(t, {}).value, std::sqrt(8.0), 1e-12);
}

TEST(PiBLower, ScalesExactlyAndRejectsForeignFamilies) {
  const auto t = SpaceMap::identity(seq(8, "1"), seq(8, "inf"));
  const auto chars = OrthonormalSystem::characters(CharacterSet::lacunary(4, 64));
  const VectorSystem fam = families::disjoint_blocks(seq(8, "1"), 4);
  const double base = pi_b_lower(t, chars, fam).value;
  for (double s : {0.25, 3.0, 17.5}) EXPECT_NEAR(pi_b_lower(t.scaled(s), chars, fam).value, s * base, 1e-12 * s * base);
  EXPECT_THROW(pi_b_lower(t, chars, families::disjoint_blocks(seq(9, "1"), 4)), DomainError);

  // A generic non-Hilbert denominator is only heuristic.
  std::vector<Element> els{Element::Ones(8), Element::Unit(8, 0)};
  const VectorSystem generic = VectorSystem::from_elements(seq(8, "1"), els, FamilyStructure::Generic);
  EXPECT_EQ(pi_b_lower(t, chars, generic).cert, Certification::Heuristic);
}

TEST(PiBSearch, RankOneFamiliesGiveRootNForS1ToS2) {
  for (std::size_t n : {4u, 8u, 16u}) {
    const auto t = SpaceMap::identity(sch(n, "1"), sch(n, "2"));
    const auto gauss = OrthonormalSystem::gaussian({1000, 1, GaussianKind::Real, 1});
    const NormEstimate e = pi_b_search(t, gauss);
    EXPECT_EQ(e.cert, Certification::CertifiedLower);
    EXPECT_NEAR(e.value, std::sqrt(static_cast<double>(n)), 1e-12);
  }
}

TEST(PiBSearch, ExtraFamiliesAreConsidered) {
  const auto t = SpaceMap::identity(seq(4, "2"), seq(4, "inf"));
  const auto chars = OrthonormalSystem::characters(CharacterSet::lacunary(3, 64));
  SearchConfig cfg;
  cfg.kernel_family = false;
  cfg.weight_sweeps = 0;
  const SearchOutcome plain = pi_b_search_detailed(t, chars, cfg);
  const VectorSystem kernel = subgroup_kernel_family(seq(4, "2"), CharacterSet::lacunary(3, 64));
  const SearchOutcome with = pi_b_search_detailed(t, chars, cfg, {kernel});
  EXPECT_GE(with.estimate.value, plain.estimate.value);
  EXPECT_NEAR(with.estimate.value, std::max(plain.estimate.value, pi_b_lower(t, chars, kernel).value), 1e-12);
}

TEST(Reference, RegisteredValues) {
  const auto a = reference_norm(Ideal::Pi2, {SpaceKind::Schatten, Exponent::one(), Exponent::two(), 16});
  EXPECT_EQ(a.status, ConstantStatus::Exact);
  EXPECT_DOUBLE_EQ(*a.value, 4.0);
  const auto b = reference_norm(Ideal::PiGamma, {SpaceKind::Sequence, Exponent::two(), Exponent::two(), 16});
  EXPECT_DOUBLE_EQ(*b.value, 4.0);
  const auto c = reference_norm(Ideal::PiGamma, {SpaceKind::Schatten, Exponent::one(), Exponent::parse("4"), 16});
  EXPECT_EQ(c.status, ConstantStatus::OrderOnly);
  EXPECT_FALSE(c.value);
  EXPECT_DOUBLE_EQ(c.exponent, 0.5);
  EXPECT_THROW(reference_norm(Ideal::Pi2, {SpaceKind::Schatten, Exponent::one(), Exponent::parse("4"), 16}), DomainError);
  EXPECT_THROW(reference_norm(Ideal::Pi2, {SpaceKind::Schatten, Exponent::one(), Exponent::two(), 0}), DomainError);
}

TEST(Factorization, RoutesAndCertification) {
  const std::size_t m = 16;
  const auto t = SpaceMap::identity(seq(m, "1"), seq(m, "inf"));
  const NormEstimate base = NormEstimate::exact(5.0, "base");
  const NormEstimate r = factorization_upper(t, {seq(m, "1"), seq(m, "2"), seq(m, "inf")}, 1, base);
  EXPECT_EQ(r.cert, Certification::CertifiedUpper);
  EXPECT_DOUBLE_EQ(r.value, 5.0);

  const auto t43 = SpaceMap::identity(seq(m, "4/3"), seq(m, "inf"));
  const NormEstimate r43 = factorization_upper(t43, {seq(m, "4/3"), seq(m, "4"), seq(m, "inf")}, 0, base);
  EXPECT_DOUBLE_EQ(r43.value, 5.0);

  // Extending a route by a norm-one inclusion never increases the bound.
  const NormEstimate longer = factorization_upper(t, {seq(m, "1"), seq(m, "1"), seq(m, "2"), seq(m, "inf")}, 2, base);
  EXPECT_LE(longer.value, r.value);
  const NormEstimate via4 = factorization_upper(t, {seq(m, "1"), seq(m, "2"), seq(m, "4"), seq(m, "inf")}, 1, base);
  EXPECT_LE(r.value, via4.value);

  EXPECT_EQ(factorization_upper(t, {seq(m, "1"), seq(m, "2"), seq(m, "inf")}, 1, NormEstimate::lower(5, "x")).cert,
            Certification::Heuristic);
  EXPECT_THROW(factorization_upper(t, {seq(m, "2"), seq(m, "inf")}, 0, base), DomainError);
  EXPECT_THROW(factorization_upper(t, {seq(m, "1"), seq(m, "inf")}, 1, base), DomainError);
  EXPECT_THROW(factorization_upper(t, {seq(m, "1"), sch(m, "2"), seq(m, "inf")}, 0, base), DomainError);
}

TEST(Factorization, SchattenRouteDominatesDirectEstimate) {
  const std::size_t n = 8;
  const auto t = SpaceMap::identity(sch(n, "2"), sch(n, "4"));
  const NormEstimate direct = ell_norm_mc(t, mc(20000, 5));
  const NormEstimate base = ell_norm_mc(SpaceMap::identity(sch(n, "2"), sch(n, "inf")), mc(20000, 6));
  const NormEstimate up = factorization_upper(t, {sch(n, "2"), sch(n, "inf"), sch(n, "4")}, 0, base);
  EXPECT_EQ(up.cert, Certification::CertifiedUpper);
  EXPECT_GE(up.value + 3 * up.stderr_or_zero(), direct.value);
}

TEST(KvBound, TemplateValues) {
  const AscentConfig cfg{16, 300, 0.1, 1e-9, 1, 1};
  EXPECT_DOUBLE_EQ(kv_bound(CharacterSet::cyclic(8, {1}), Exponent::parse("4"), 16, cfg).value, 2.0);
  EXPECT_EQ(kv_bound(CharacterSet::cyclic(8, {1}), Exponent::parse("4"), 16, cfg).cert, Certification::Heuristic);
  EXPECT_NEAR(kv_bound(CharacterSet::full(8), Exponent::parse("4"), 8, cfg).value, std::sqrt(8.0), 0.05 * std::sqrt(8.0));
  const double kinf = kp_constant_lower(CharacterSet::lacunary(3, 64), Exponent::infinity(), cfg).value;
  EXPECT_DOUBLE_EQ(kv_bound(CharacterSet::lacunary(3, 64), Exponent::infinity(), 5, cfg).value, kinf);
  EXPECT_THROW(kv_bound(CharacterSet::full(8), Exponent::two(), 8, cfg), DomainError);
  EXPECT_THROW(kv_bound(CharacterSet::full(8), Exponent::parse("4"), 0, cfg), DomainError);
}

TEST(Sandwich, CertifiedBoundsAreOrdered) {
  const std::size_t n = 8;
  const auto gauss = OrthonormalSystem::gaussian(mc(2000, 3));
  for (const char* v : {"2", "4", "inf"}) {
    const auto t = SpaceMap::identity(sch(n, "1"), sch(n, v));
    const NormEstimate lower = pi_b_search(t, gauss);
    const NormEstimate base = ell_norm_mc(SpaceMap::identity(sch(n, "2"), sch(n, v)), mc(20000, 8));
    const NormEstimate upper = factorization_upper(t, {sch(n, "1"), sch(n, "2"), sch(n, v)}, 1, base);
    const double se = std::hypot(lower.stderr_or_zero(), upper.stderr_or_zero());
    EXPECT_LE(lower.value, upper.value + 3 * se) << v;
  }
}
