#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qhankel/qbessel.hpp"
#include "qhankel/transforms.hpp"

using namespace qhankel;
using R = long double;

namespace {

const auto t32 = GridFunction<R>::monomial(1.5L);
const auto t14 = GridFunction<R>::monomial(0.25L);

int sgn(R v) { return v < 0 ? -1 : 1; }

}  // namespace

TEST(EvalH, ZeroFunction) {
  const QContext ctx(0.5);
  for (R z : {0.3L, 2.0L, 17.0L}) EXPECT_EQ(eval_H(GridFunction<R>::zero(), BesselOrder(1.0), z, ctx), 0);
  EXPECT_THROW(eval_H(t32, BesselOrder(1.0), 0.0L, ctx), numeric_error);
}

TEST(EvalH, ClosedFormForThreeHalves) {
  for (double q : {0.3, 0.5, 0.7}) {
    const QContext ctx(q);
    double worst = 0;
    for (int k = 1; k <= 200; ++k) {
      const double z = 0.1 * k;
      const double v = static_cast<double>(eval_H(t32, BesselOrder(1.0), static_cast<R>(z), ctx));
      const double ref = (1 - q) / std::sqrt(z) * oracle::J(2.0, z, q * q);
      worst = std::max(worst, oracle::rel(v, ref));
    }
    EXPECT_LE(worst, 1e-10) << "q " << q;
  }
}

TEST(EvalH, FirstZeroAtHalf) {
  const QContext ctx(0.5);
  const auto t = find_zeros<R>(KernelSpec::j_kernel(2.0, ctx), 1);  // H vanishes with J_2
  EXPECT_LT(oracle::rel(static_cast<double>(t.at(1)), 3.97127), 1e-3);
}

TEST(EvalH, Linearity) {
  const QContext ctx(0.6);
  const GridFunction<R> f([](R t) { return std::sin(2 * t); });
  const GridFunction<R> g([](R t) { return t * t - 0.3L; });
  const R a = 1.75L, b = -0.5L;
  const GridFunction<R> h([&](R t) { return a * f(t) + b * g(t); });
  for (R z : {0.5L, 3.0L, 9.0L}) {
    const R lhs = eval_H(h, BesselOrder(1.0), z, ctx);
    const R rhs = a * eval_H(f, BesselOrder(1.0), z, ctx) + b * eval_H(g, BesselOrder(1.0), z, ctx);
    EXPECT_LE(std::abs(lhs - rhs), 2e-16L * (std::abs(a * eval_H(f, BesselOrder(1.0), z, ctx)) + std::abs(rhs)) + 1e-18L);
  }
}

TEST(EvalU, ZeroAndPowerShift) {
  const QContext ctx(0.5);
  const BesselOrder nu(1.0);
  EXPECT_EQ(eval_U(GridFunction<R>::zero(), nu, 1.3L, ctx), 0);
  // z^nu U(g) is the q-integral of t^-nu g(t) J_nu(tz)
  const GridFunction<R> g([](R t) { return std::cos(t) + t; });
  const HahnExton<R> j(1.0L, 0.25L, ctx);
  const R z = 2;
  const R direct = jackson_integral<R>([&](R t) { return g(t) / t * j.value(t * z); }, R(1), ctx);
  EXPECT_LT(std::abs(z * eval_U(g, nu, z, ctx) - direct), 1e-15L * std::abs(direct));
  // with g = t^(nu+2): z^(nu+1/2) U(g) = H(t^(3/2))
  const R u = eval_U(GridFunction<R>::monomial(3.0L), nu, z, ctx);
  EXPECT_LT(std::abs(std::pow(z, 1.5L) * u / eval_H(t32, nu, z, ctx) - 1), 1e-14L);
}

TEST(EvalV, ZeroAndClosedForm) {
  const BesselOrder nu(1.0);
  for (double q : {0.3, 0.5}) {
    const QContext ctx(q);
    EXPECT_EQ(eval_V(GridFunction<R>::zero(), nu, 1.1L, ctx), 0);
    for (double z : {0.5, 2.0, 7.5}) {
      const R v = eval_V(GridFunction<R>::monomial(2.0L), nu, static_cast<R>(z), ctx);
      const double ref = (1 - q) / std::sqrt(z) * oracle::J(2.0, z, q * q);
      EXPECT_LT(oracle::rel(static_cast<double>(std::sqrt(static_cast<R>(z)) * v), ref), 1e-12);
    }
  }
}

TEST(EvalV, NoZeroBelowFirstClassicalEndpoint) {
  const double q = 0.1;
  const QContext ctx(q);
  const double mu1 = std::pow(q, -0.5) * std::sqrt((1 - q * q) * (1 - std::pow(q, 6)));
  for (int i = 1; i <= 64; ++i) {
    const R z = static_cast<R>(mu1 * i / 65.0);
    EXPECT_GT(eval_V(GridFunction<R>::monomial(2.0L), BesselOrder(1.0), z, ctx), 0) << "z " << static_cast<double>(z);
  }
}

TEST(EvalF, OrderValidation) {
  const QContext ctx(0.6);
  EXPECT_THROW(eval_F(t14, BesselOrder(0.5), 1.0, 1.0L, ctx), std::invalid_argument);
  EXPECT_THROW(eval_F(t14, BesselOrder(1.0), 1.0, 1.0L, ctx), std::invalid_argument);
  EXPECT_EQ(eval_F(GridFunction<R>::zero(), BesselOrder(0.25), 1.0, 1.0L, ctx), 0);
}

TEST(EvalF, ClosedFormForQuarter) {
  for (double q : {0.4, 0.6}) {
    const QContext ctx(q);
    for (double z : {0.5, 1.0, 2.0}) {
      const double v = static_cast<double>(eval_F(t14, BesselOrder(0.25), 1.0, static_cast<R>(z), ctx));
      const double ref = static_cast<double>(oracle::F_closed_form(oracle::mp(q), oracle::mp(z)));
      EXPECT_LT(oracle::rel(v, ref), 1e-8) << "q " << q << " z " << z;
    }
  }
}

namespace {

/// The transform written with the second-kind function, integrand
/// f(t) t^(1/2) (J(tz) Y(z) - Y(tz) J(z)) and prefactor -q^(-nu(nu-1)-1/2)/(1+q).
R F_via_second_kind(R q, R nu, R z) {
  const QContext ctx(static_cast<double>(q));
  const R Q = q * q;
  const R jz = bessel_J(BesselOrder(static_cast<double>(nu)), z, Q, ctx);
  const R yz = bessel_Y(static_cast<double>(nu), z, Q, ctx);
  const R integral = jackson_integral<R>(
      [&](R t) {
        return std::pow(t, 0.25L) * std::sqrt(t) *
               (bessel_J(BesselOrder(static_cast<double>(nu)), t * z, Q, ctx) * yz -
                bessel_Y(static_cast<double>(nu), t * z, Q, ctx) * jz);
      },
      R(1), ctx);
  return -std::pow(q, -nu * (nu - 1) - 0.5L) / (1 + q) * integral;
}

}  // namespace

// The transform built literally on the second-kind function against the
// printed closed form.
TEST(EvalF, SecondKindFormMatchesClosedForm) {
  const double v = static_cast<double>(F_via_second_kind(0.6L, 0.25L, 1.0L));
  const double ref = static_cast<double>(oracle::F_closed_form(oracle::mp(0.6), oracle::mp(1.0)));
  EXPECT_LT(oracle::rel(v, ref), 1e-8);
}

TEST(EvalF, SecondKindFormDiffersByMinusPi) {
  for (double q : {0.4, 0.6}) {
    const QContext ctx(q);
    for (double z : {0.5, 1.0, 2.0}) {
      const R direct = F_via_second_kind(static_cast<R>(q), 0.25L, static_cast<R>(z));
      const R f = eval_F(t14, BesselOrder(0.25), 1.0, static_cast<R>(z), ctx);
      EXPECT_LT(std::abs(f / direct + std::numbers::pi_v<R>), 1e-10L) << "q " << q << " z " << z;
    }
  }
}

TEST(EvalF, FirstZeroBetweenKernelZeros) {
  const QContext ctx(0.6);
  const auto t = find_zeros<R>(KernelSpec::cross(0.25, ctx, 1.0), 2);
  const R r = 2.74773L;
  ASSERT_GT(r, t.at(1));
  ASSERT_LT(r, t.at(2));
  const R lo = eval_F(t14, BesselOrder(0.25), 1.0, r * (1 - 1e-5L), ctx);
  const R hi = eval_F(t14, BesselOrder(0.25), 1.0, r * (1 + 1e-5L), ctx);
  EXPECT_LT(lo * hi, 0);
}

TEST(EvalF, CrossGridMatchesOracle) {
  const QContext ctx(0.6);
  CrossPair<R> pair(0.25L, ctx);
  const oracle::mp q(0.6), Q = q * q, s = boost::multiprecision::pow(q, oracle::mp(-0.25));
  for (double z : {0.7, 3.0, 12.0}) {
    typename CrossPair<R>::Grid grid(pair, static_cast<R>(z));
    const oracle::mp zz(z);
    const oracle::mp jp = oracle::hahn_exton(0.25, zz, Q), jm = oracle::hahn_exton(-0.25, zz * s, Q);
    for (std::size_t i = 0; i <= 10; ++i) {
      const oracle::mp t = boost::multiprecision::pow(q, static_cast<int>(i));
      const oracle::mp w =
          sqrt(t) * (oracle::hahn_exton(0.25, t * zz, Q) * jm - oracle::hahn_exton(-0.25, t * zz * s, Q) * jp);
      const double ref = static_cast<double>(w);
      EXPECT_LT(std::abs(static_cast<double>(grid(i)) - ref), 1e-12 * std::max(1.0, std::abs(ref)))
          << "z " << z << " i " << i;
    }
  }
}

TEST(FourierA, OrthonormalityOfBasis) {
  const QContext ctx(0.5);
  const auto t = find_zeros<R>(KernelSpec::j_kernel(1.0, ctx), 5);
  for (std::size_t k = 1; k <= 4; ++k) {
    const auto e = j_basis_element(t, k);
    for (std::size_t j = 1; j <= 4; ++j) {
      const R a = fourier_coeff_a(e, BesselOrder(1.0), t, j, ctx);
      EXPECT_NEAR(static_cast<double>(a), j == k ? 1.0 : 0.0, 1e-10) << k << "," << j;
    }
  }
}

TEST(FourierA, SignsAlternateForThreeHalves) {
  const QContext ctx(0.5);
  const auto t = find_zeros<R>(KernelSpec::j_kernel(1.0, ctx), 8);
  for (std::size_t k = 1; k <= 8; ++k)
    EXPECT_EQ(sgn(fourier_coeff_a(t32, BesselOrder(1.0), t, k, ctx)), k % 2 ? 1 : -1) << "k " << k;
}

TEST(FourierA, NormClosedFormAgreesWithQuadrature) {
  const QContext ctx(0.7);
  const auto t = find_zeros<R>(KernelSpec::j_kernel(1.0, ctx), 6);
  for (std::size_t k = 1; k <= 6; ++k) {
    const auto e = j_basis_element(t, k);
    const R direct = jackson_integral<R>([&](R s) { const R v = e(s); return v * v; }, R(1), ctx);
    EXPECT_LT(std::abs(j_basis_norm_sq_closed(t, k) - direct), 1e-9L * direct);
  }
}

TEST(FourierA, PartialSumsConverge) {
  const QContext ctx(0.5);
  const auto t = find_zeros<R>(KernelSpec::j_kernel(1.0, ctx), 16);
  std::vector<R> a;
  std::vector<GridFunction<R>> basis;
  for (std::size_t k = 1; k <= 16; ++k) {
    a.push_back(fourier_coeff_a(t32, BesselOrder(1.0), t, k, ctx));
    basis.push_back(j_basis_element(t, k));
  }
  R prev = std::numeric_limits<R>::infinity();
  for (std::size_t K : {2, 4, 8, 16}) {
    const R err = jackson_integral<R>(
        [&](R s) {
          R v = t32(s);
          for (std::size_t k = 0; k < K; ++k) v -= a[k] * basis[k](s);
          return v * v;
        },
        R(1), ctx);
    EXPECT_LT(err, prev) << "K " << K;
    prev = err;
  }
}

TEST(FourierA, SignBridgeToTransformValues) {
  const QContext ctx(0.5);
  const auto t = find_zeros<R>(KernelSpec::j_kernel(1.0, ctx), 7);
  const TransformEvaluator<R> h(TransformKind::H, t32, BesselOrder(1.0), ctx);
  for (std::size_t k = 1; k <= 6; ++k) {
    const R ak = fourier_coeff_a(t32, BesselOrder(1.0), t, k, ctx);
    const R ak1 = fourier_coeff_a(t32, BesselOrder(1.0), t, k + 1, ctx);
    if (sgn(ak) * sgn(ak1) == -1) {
      EXPECT_EQ(sgn(h(t.node(k).scaled(1))) * sgn(h(t.node(k + 1).scaled(1))), -1) << "k " << k;
    }
  }
}

TEST(FourierB, OrthonormalityOfBasis) {
  const QContext ctx(0.6);
  const auto t = find_zeros<R>(KernelSpec::cross(0.25, ctx, 1.0), 5);
  for (std::size_t k = 1; k <= 4; ++k) {
    const auto e = cross_basis_element(t, k);
    for (std::size_t j = 1; j <= 4; ++j) {
      const auto b = fourier_coeff_b(e, BesselOrder(0.25), 1.0, t, j, ctx);
      EXPECT_NEAR(static_cast<double>(b.b), j == k ? 1.0 : 0.0, 1e-10) << k << "," << j;
    }
  }
}

TEST(FourierB, TransformRelationAndSign) {
  const QContext ctx(0.6);
  const auto t = find_zeros<R>(KernelSpec::cross(0.25, ctx, 1.0), 8);
  for (std::size_t k = 1; k <= 8; ++k) {
    const auto b = fourier_coeff_b(t14, BesselOrder(0.25), 1.0, t, k, ctx);
    const R f = eval_F(t14, BesselOrder(0.25), 1.0, t.at(k), ctx);
    EXPECT_EQ(sgn(b.b), -sgn(f)) << "k " << k;
    EXPECT_LT(std::abs(b.b - b.via_transform), 1e-8L * std::abs(b.b)) << "k " << k;
  }
}

TEST(FourierB, AlternationIndexForQuarter) {
  for (double q : {0.4, 0.6, 0.8}) {
    const QContext ctx(q);
    const auto t = find_zeros<R>(KernelSpec::cross(0.25, ctx, 1.0), 9);
    const auto s = coefficient_stream_b(t14, BesselOrder(0.25), 1.0, t, 8, ctx);
    const auto m0 = alternation_scan(s);
    ASSERT_TRUE(m0.has_value()) << "q " << q;
    if (q == 0.8)
      EXPECT_EQ(*m0, 3u);
    else
      EXPECT_LE(*m0, 3u) << "q " << q;
  }
}

TEST(AlternationScan, SmallSequences) {
  CoeffSequence a;
  a.values = {1, -1, 1, -1};
  EXPECT_EQ(alternation_scan(a), std::optional<std::size_t>(1));
  a.values = {1, 1, -1, 1, -1};
  EXPECT_EQ(alternation_scan(a), std::optional<std::size_t>(2));
  a.values = {1, -1, 1, 1};
  EXPECT_EQ(alternation_scan(a), std::nullopt);
  a.values = {1, -1, 1};
  EXPECT_THROW(alternation_scan(a), std::invalid_argument);
  a.values = {1, -1, 1e-15, -1};
  try {
    alternation_scan(a);
    FAIL() << "expected an indeterminate sign";
  } catch (const numeric_error& e) {
    EXPECT_EQ(e.code(), errc::indeterminate_sign);
  }
}

TEST(AlternationScan, ThreeHalvesStreamFromOne) {
  const QContext ctx(0.5);
  const auto t = find_zeros<R>(KernelSpec::j_kernel(1.0, ctx), 6);
  EXPECT_EQ(alternation_scan(coefficient_stream_a(t32, BesselOrder(1.0), t, 5, ctx)), std::optional<std::size_t>(1));
}
