#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fnls/fft.hpp"
#include "fnls/noise.hpp"
#include "fnls/operators.hpp"

using namespace fnls;
using std::numbers::pi;

TEST(Covariance, SingleModeAndZero) {
  const Grid g = make_grid(1, 8, 2 * pi);
  auto modes = trig_modes(g, 0);
  ASSERT_EQ(modes.size(), 1u);
  EXPECT_DOUBLE_EQ(hs_norm(CovarianceSpec::from_modes(g, modes, {0.7})), 0.7);
  EXPECT_EQ(CovarianceSpec::from_modes(g, modes, {0.0}).hs_norm_squared(), 0.0);
  EXPECT_EQ(CovarianceSpec::none(g).hs_norm_squared(), 0.0);
}

TEST(Covariance, PowerLawFiniteSum) {
  const Grid g = make_grid(1, 8, 2 * pi);
  const auto spec = CovarianceSpec::power_law(g, 1.0, 4.0, 2);
  // m = 0 once; m = 1, 2 once as cosine and once as sine.
  double oracle = 1.0;
  for (int m = 1; m <= 2; ++m) oracle += 2.0 * std::pow(1.0 + m * m, -4.0);
  EXPECT_NEAR(spec.hs_norm_squared(), oracle, 1e-15);
  EXPECT_NEAR(spec.hs_norm_squared(), 1.1282, 1e-4);
  EXPECT_EQ(spec.mode_count(), 5u);
}

TEST(Covariance, CutoffMustStayInDealiasedBand) {
  const Grid g = make_grid(2, 16, 1.0);
  EXPECT_NO_THROW(CovarianceSpec::power_law(g, 1.0, 2.0, 5));
  EXPECT_THROW(CovarianceSpec::power_law(g, 1.0, 2.0, 6), std::invalid_argument);
}

TEST(Basis, Orthonormal) {
  const Grid g = make_grid(2, 16, 3.0);
  const auto modes = trig_modes(g, 2);
  EXPECT_EQ(modes.size(), 25u);
  std::vector<SpectralField> e;
  for (const auto& m : modes) e.push_back(basis_function(g, m));
  for (std::size_t a = 0; a < e.size(); ++a)
    for (std::size_t b = 0; b < e.size(); ++b)
      EXPECT_NEAR(std::abs(inner_product(e[a], e[b])), a == b ? 1.0 : 0.0, 1e-12);
}

TEST(Basis, ProjectionMatchesPhysicalInnerProduct) {
  const Grid g = make_grid(2, 16, 3.0);
  const auto modes = trig_modes(g, 3);
  SpectralField u(g, Space::physical);
  for (std::size_t i = 0; i < g.size(); ++i)
    u[i] = {std::sin(g.coordinate(i, 0)), std::cos(2.0 * g.coordinate(i, 1))};
  const SpectralField freq = forward_transform(u);
  for (const auto& m : modes)
    EXPECT_LT(std::abs(project_on_mode(freq, m) - inner_product(u, basis_function(g, m))), 1e-12);
}

TEST(Stream, ZeroSpecGivesZeroIncrement) {
  const Grid g = make_grid(2, 8, 1.0);
  auto spec = std::make_shared<const CovarianceSpec>(CovarianceSpec::none(g));
  NoiseStream s(spec, 1, 0);
  const auto inc = sample_increment(s, 0.01);
  for (auto v : inc.field.values()) EXPECT_EQ(v, Complex(0.0));
}

TEST(Stream, SecondMomentMatchesHsNorm) {
  const Grid g = make_grid(2, 16, 4.0);
  auto spec = std::make_shared<const CovarianceSpec>(CovarianceSpec::power_law(g, 0.5, 2.0, 3));
  NoiseStream s(spec, 42, 0);
  const double dt = 0.01;
  double acc = 0.0;
  const int n = 10000;
  for (int k = 0; k < n; ++k) acc += mass(sample_increment(s, dt).field) / dt;
  EXPECT_NEAR(acc / n, spec->hs_norm_squared(), 0.05 * spec->hs_norm_squared());
}

TEST(Stream, DeterministicPerSeedAndPath) {
  const Grid g = make_grid(2, 16, 4.0);
  auto spec = std::make_shared<const CovarianceSpec>(CovarianceSpec::power_law(g, 0.5, 2.0, 3));
  NoiseStream a(spec, 7, 3), b(spec, 7, 3), c(spec, 7, 4);
  for (int k = 0; k < 5; ++k) {
    const auto x = a.draw_coefficients(0.1), y = b.draw_coefficients(0.1),
               z = c.draw_coefficients(0.1);
    EXPECT_EQ(x, y);
    EXPECT_NE(x, z);
  }
}

TEST(Stream, CoarseStepSumsFineDraws) {
  const Grid g = make_grid(1, 16, 4.0);
  auto spec = std::make_shared<const CovarianceSpec>(CovarianceSpec::power_law(g, 1.0, 2.0, 2));
  NoiseStream fine(spec, 5, 1), coarse(spec, 5, 1);
  std::vector<double> sum(spec->mode_count(), 0.0);
  for (int k = 0; k < 4; ++k) {
    const auto d = fine.brownian_increments(0.01);
    for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += d[j];
  }
  const auto c = coarse.brownian_increments(0.04, 4);
  for (std::size_t j = 0; j < sum.size(); ++j) EXPECT_NEAR(c[j], sum[j], 1e-15);
  EXPECT_EQ(fine.counter(), coarse.counter());
}

TEST(Stream, RejectsBadArguments) {
  const Grid g = make_grid(1, 16, 4.0);
  auto spec = std::make_shared<const CovarianceSpec>(CovarianceSpec::power_law(g, 1.0, 2.0, 2));
  NoiseStream s(spec, 1, 0);
  EXPECT_THROW(s.draw_coefficients(0.0), std::invalid_argument);
  EXPECT_THROW(s.draw_coefficients(0.1, 0), std::invalid_argument);
}

TEST(CovarianceCheck, ZeroSpec) {
  const Grid g = make_grid(2, 8, 1.0);
  const auto spec = CovarianceSpec::from_modes(g, trig_modes(g, 1), std::vector<double>(9, 0.0));
  const auto rep = covariance_check(spec, 200);
  for (const auto& m : rep.modes) EXPECT_EQ(m.empirical, 0.0);
  EXPECT_FALSE(rep.flagged);
}

TEST(CovarianceCheck, SingleModeVariance) {
  const Grid g = make_grid(2, 16, 2.0);
  const auto spec = CovarianceSpec::from_modes(g, {trig_modes(g, 1)[2]}, {1.0});
  const auto rep = covariance_check(spec, 10000, 0.01, 3);
  ASSERT_EQ(rep.modes.size(), 1u);
  EXPECT_DOUBLE_EQ(rep.modes[0].expected, 0.01);
  // Chi-square: SE of the sample variance is sqrt(2/(n-1)) * dt.
  EXPECT_LE(std::abs(rep.modes[0].empirical - 0.01), 3.0 * std::sqrt(2.0 / 9999.0) * 0.01);
}

TEST(CovarianceCheck, IndependentModesUncorrelated) {
  const Grid g = make_grid(2, 16, 2.0);
  const auto all = trig_modes(g, 1);
  const auto spec = CovarianceSpec::from_modes(g, {all[1], all[4]}, {1.0, 0.5});
  const auto rep = covariance_check(spec, 10000, 0.01, 8);
  EXPECT_LE(rep.max_abs_cross_z, 3.0);
  EXPECT_LE(rep.max_abs_z, 3.0);
}
