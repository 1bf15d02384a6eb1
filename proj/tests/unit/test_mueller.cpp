#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "oracles.hpp"
#include "polopt/mueller.hpp"

using namespace polopt;
constexpr double kPi = std::numbers::pi;

namespace {

void expect_matrix_near(const MuellerMatrix& m, std::initializer_list<double> rows, double tol = 1e-15) {
  std::array<double, 16> v{};
  std::copy(rows.begin(), rows.end(), v.begin());
  EXPECT_LE(m.max_abs_diff(MuellerMatrix::from_row_major(v)), tol);
}

}  // namespace

TEST(Angle, CanonicalRange) {
  EXPECT_DOUBLE_EQ(Angle(kPi).canonical().radians(), 0.0);
  EXPECT_NEAR(Angle(-0.25).canonical().radians(), kPi - 0.25, 1e-15);
  EXPECT_NEAR(Angle(7.0).canonical().radians(), 7.0 - 2 * kPi, 1e-14);
  EXPECT_NEAR(Angle::from_degrees(90).radians(), kPi / 2, 1e-15);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const double c = Angle(oracle::angle(rng) * 10).canonical().radians();
    EXPECT_GE(c, 0.0);
    EXPECT_LT(c, kPi);
  }
}

TEST(Angle, SymmetricWrap) {
  EXPECT_DOUBLE_EQ(wrap_symmetric(kPi / 2), kPi / 2);
  EXPECT_NEAR(wrap_symmetric(-kPi / 2), kPi / 2, 1e-15);
  EXPECT_NEAR(wrap_symmetric(0.1 + kPi), 0.1, 1e-15);
  EXPECT_NEAR(wrap_symmetric(-0.1), -0.1, 1e-15);
}

TEST(Elements, PolarizerSpotValues) {
  expect_matrix_near(linear_polarizer(Angle(0.0)), {.5, .5, 0, 0, .5, .5, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0});
  expect_matrix_near(linear_polarizer(Angle(kPi / 4)), {.5, 0, .5, 0, 0, 0, 0, 0, .5, 0, .5, 0, 0, 0, 0, 0}, 1e-15);
}

TEST(Elements, QuarterWaveSpotValues) {
  expect_matrix_near(quarter_wave_plate(Angle(0.0)), {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0, -1, 0});
  const StokesVector out = quarter_wave_plate(Angle(kPi / 4)) * (linear_polarizer(Angle(0.0)) * StokesVector::unpolarized(1.0));
  EXPECT_NEAR(out[0], 0.5, 1e-15);
  EXPECT_NEAR(out[1], 0.0, 1e-15);
  EXPECT_NEAR(out[2], 0.0, 1e-15);
  EXPECT_NEAR(out[3], 0.5, 1e-15);
}

TEST(Elements, RotatorSpotValues) {
  EXPECT_EQ(rotator(Angle(0.0)).max_abs_diff(MuellerMatrix::identity()), 0.0);
  EXPECT_LE((rotator(Angle(1.1)) * rotator(Angle(-1.1))).max_abs_diff(MuellerMatrix::identity()), 1e-15);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) {
    const StokesVector s = rotator(Angle(oracle::angle(rng))) * StokesVector{{1, 0, 0, 1}};
    EXPECT_NEAR(s[0], 1.0, 1e-15);
    EXPECT_NEAR(s[1], 0.0, 1e-15);
    EXPECT_NEAR(s[2], 0.0, 1e-15);
    EXPECT_NEAR(s[3], 1.0, 1e-15);
  }
}

TEST(Elements, MatchIndependentFormulas) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100; ++i) {
    const double t = oracle::angle(rng);
    EXPECT_LE(oracle::max_abs(oracle::polarizer(t), linear_polarizer(Angle(t))), 1e-15);
    EXPECT_LE(oracle::max_abs(oracle::quarter_wave(t), quarter_wave_plate(Angle(t))), 1e-15);
    EXPECT_LE(oracle::max_abs(oracle::rotation(t), rotator(Angle(t))), 1e-15);
  }
}

TEST(Properties, PolarizerIdempotent) {
  std::mt19937_64 rng(11);
  EXPECT_LE((linear_polarizer(Angle(0.3)) * linear_polarizer(Angle(0.3))).max_abs_diff(linear_polarizer(Angle(0.3))),
            1e-12);
  for (int i = 0; i < 100; ++i) {
    const MuellerMatrix l = linear_polarizer(Angle(oracle::angle(rng)));
    EXPECT_LE((l * l).max_abs_diff(l), 1e-12);
  }
}

TEST(Properties, QuarterWaveFourthPowerIsIdentity) {
  std::mt19937_64 rng(13);
  std::vector<double> thetas{0.7};
  for (int i = 0; i < 100; ++i) thetas.push_back(oracle::angle(rng));
  for (double t : thetas) {
    const MuellerMatrix q = quarter_wave_plate(Angle(t));
    EXPECT_LE((q * q * q * q).max_abs_diff(MuellerMatrix::identity()), 1e-12) << t;
  }
}

TEST(Properties, RotationConjugationConsistency) {
  std::mt19937_64 rng(17);
  EXPECT_LE(rotate_mueller(linear_polarizer(Angle(0.0)), Angle(0.4)).max_abs_diff(linear_polarizer(Angle(0.4))),
            1e-12);
  for (int i = 0; i < 100; ++i) {
    const Angle t(oracle::angle(rng));
    EXPECT_LE(rotate_mueller(linear_polarizer(Angle(0.0)), t).max_abs_diff(linear_polarizer(t)), 1e-12);
    EXPECT_LE(rotate_mueller(quarter_wave_plate(Angle(0.0)), t).max_abs_diff(quarter_wave_plate(t)), 1e-12);
  }
}

TEST(Properties, RotateMuellerTrivialCases) {
  std::mt19937_64 rng(19);
  const MuellerMatrix m = oracle::from_eigen(oracle::random_matrix(rng));
  EXPECT_LE(rotate_mueller(m, Angle(0.0)).max_abs_diff(m), 0.0);
  EXPECT_LE(rotate_mueller(MuellerMatrix::identity(), Angle(0.9)).max_abs_diff(MuellerMatrix::identity()), 1e-15);
  const oracle::Matrix4d expected = oracle::rotation(-0.9) * oracle::to_eigen(m) * oracle::rotation(0.9);
  EXPECT_LE(oracle::max_abs(expected, rotate_mueller(m, Angle(0.9))), 1e-15);
}

TEST(Properties, HalfTurnPeriodicity) {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 100; ++i) {
    const double t = oracle::angle(rng);
    EXPECT_LE(linear_polarizer(Angle(t)).max_abs_diff(linear_polarizer(Angle(t + kPi))), 1e-12);
    EXPECT_LE(quarter_wave_plate(Angle(t)).max_abs_diff(quarter_wave_plate(Angle(t + kPi))), 1e-12);
    EXPECT_LE(rotator(Angle(t)).max_abs_diff(rotator(Angle(t + kPi))), 1e-12);
  }
}

TEST(Properties, MalusLaw) {
  const auto through = [](double phi) {
    return (linear_polarizer(Angle(phi)) * (linear_polarizer(Angle(0.0)) * StokesVector::unpolarized(1.0)))[0];
  };
  EXPECT_NEAR(through(0.0), 0.5, 1e-15);
  EXPECT_NEAR(through(kPi / 4), 0.25, 1e-15);
  EXPECT_NEAR(through(kPi / 2), 0.0, 1e-15);
  std::mt19937_64 rng(29);
  for (int i = 0; i < 100; ++i) {
    const double phi = oracle::angle(rng);
    EXPECT_NEAR(through(phi), std::cos(phi) * std::cos(phi) / 2, 1e-15);
  }
}

TEST(Apply, SpotValues) {
  const StokesVector half = apply(linear_polarizer(Angle(0.0)), StokesVector::unpolarized(1.0));
  EXPECT_EQ(half.s, (Vec4<double>{0.5, 0.5, 0.0, 0.0}));
  const StokesVector dark = apply(linear_polarizer(Angle(kPi / 2)), half);
  for (double v : dark.s) EXPECT_NEAR(v, 0.0, 1e-16);
  const StokesVector s{{0.9, 0.1, -0.2, 0.3}};
  EXPECT_EQ(apply(MuellerMatrix::identity(), s).s, s.s);
}

TEST(Properties, PassiveElementsPreservePhysicality) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    Vec4<double> v{0, u(rng), u(rng), u(rng)};
    const double norm = std::sqrt(v[1] * v[1] + v[2] * v[2] + v[3] * v[3]);
    v[0] = norm * (1.0 + std::abs(u(rng)));
    const StokesVector s{v};
    ASSERT_TRUE(s.is_physical());
    const Angle t(oracle::angle(rng));
    EXPECT_TRUE(apply(linear_polarizer(t), s).is_physical());
    EXPECT_TRUE(apply(quarter_wave_plate(t), s).is_physical());
    EXPECT_TRUE(apply(rotator(t), s).is_physical());
  }
}

TEST(Stokes, PhysicalityAndDop) {
  EXPECT_TRUE(StokesVector::unpolarized(1.0).is_physical());
  EXPECT_DOUBLE_EQ(StokesVector::unpolarized(2.0).degree_of_polarization(), 0.0);
  EXPECT_DOUBLE_EQ((StokesVector{{1, 0, 0, 1}}).degree_of_polarization(), 1.0);
  EXPECT_FALSE((StokesVector{{1, 1, 1, 0}}).is_physical());
  EXPECT_FALSE((StokesVector{{-0.1, 0, 0, 0}}).is_physical());
}

TEST(Mueller, PassivityPredicate) {
  EXPECT_TRUE(MuellerMatrix::identity().is_passive());
  EXPECT_TRUE(linear_polarizer(Angle(0.2)).is_passive());
  MuellerMatrix m = MuellerMatrix::identity();
  m(2, 3) = 1.5;
  EXPECT_FALSE(m.is_passive());
}

TEST(Mueller, AlgebraMatchesEigen) {
  std::mt19937_64 rng(37);
  for (int i = 0; i < 50; ++i) {
    const auto a = oracle::random_matrix(rng), b = oracle::random_matrix(rng), c = oracle::random_matrix(rng);
    const MuellerMatrix ma = oracle::from_eigen(a), mb = oracle::from_eigen(b), mc = oracle::from_eigen(c);
    EXPECT_LE(oracle::max_abs(a * b, ma * mb), 1e-15);
    EXPECT_LE(((ma * mb) * mc).max_abs_diff(ma * (mb * mc)), 1e-14);
    EXPECT_LE((MuellerMatrix::identity() * ma).max_abs_diff(ma), 0.0);
    EXPECT_LE(oracle::max_abs(a + 2.0 * b, ma + 2.0 * mb), 1e-15);
    EXPECT_LE(oracle::max_abs(a.transpose(), ma.transposed()), 0.0);
    EXPECT_NEAR(ma.frobenius_distance(mb), (a - b).norm(), 1e-14);
  }
}
