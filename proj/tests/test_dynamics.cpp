#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fnls/dynamics.hpp"

using namespace fnls;

namespace {

std::vector<SpectralField> random_probes(const Grid& g, int count, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, 2.0);
  std::vector<SpectralField> out;
  for (int k = 0; k < count; ++k) {
    SpectralField f(g, Space::physical);
    for (auto& v : f.values()) v = {d(rng), d(rng)};
    out.push_back(std::move(f));
  }
  return out;
}

// f = 2 i beta u while declaring the linear_phase bounds (psi_1 = 0, psi_2 = psi_4 = beta).
struct DoublePhase {
  double b;
  Complex value(double, std::size_t, Complex u) const { return Complex(0.0, 2.0 * b) * u; }
  double beta() const { return b; }
  double psi1(double, std::size_t) const { return 0.0; }
  double psi2(std::size_t) const { return b; }
  double psi3(double, std::size_t) const { return 0.0; }
  double psi4(std::size_t) const { return b; }
};

}  // namespace

TEST(Nonlinearity, Examples) {
  const Grid g = make_grid(2, 8, 1.0);
  const SpectralField two = SpectralField::constant(g, 2.0);
  EXPECT_EQ(max_abs_difference(nonlinearity(two, 0.0), two), 0.0);
  const SpectralField cubic = nonlinearity(two, 1.0);
  for (auto v : cubic.values()) EXPECT_EQ(v, Complex(8.0));
  const SpectralField zero = nonlinearity(SpectralField::zeros(g), 1.5);
  for (auto v : zero.values()) EXPECT_EQ(v, Complex(0.0));
}

TEST(Nonlinearity, GaugeInvariant) {
  const Grid g = make_grid(2, 8, 1.0);
  const SpectralField u = random_probes(g, 1, 4)[0];
  const SpectralField n = nonlinearity(u, 1.3);
  for (std::size_t i = 0; i < u.size(); ++i)
    EXPECT_NEAR((n[i] * std::conj(u[i])).imag(), 0.0, 1e-12 * std::norm(n[i]) + 1e-300);
}

TEST(Forcing, FamilyValues) {
  const Grid g = make_grid(2, 8, 1.0);
  const SpectralField one = SpectralField::constant(g, 1.0);
  const SpectralField fz = forcing_eval(ForcingSpec::zero(g), 0.0, one);
  for (auto v : fz.values()) EXPECT_EQ(v, Complex(0.0));
  const SpectralField fl = forcing_eval(ForcingSpec::linear_phase(g, 0.3), 0.0, one);
  for (auto v : fl.values()) EXPECT_EQ(v, Complex(0.0, 0.3));
  std::vector<Complex> g0(g.size());
  for (std::size_t i = 0; i < g0.size(); ++i) g0[i] = {std::sin(0.1 * i), 0.5};
  const auto add = ForcingSpec::additive(g, 0.2, g0);
  for (const auto& u : random_probes(g, 2, 1)) {
    const SpectralField f = forcing_eval(add, 1.0, u);
    for (std::size_t i = 0; i < g0.size(); ++i) EXPECT_EQ(f[i], g0[i]);
  }
}

TEST(Forcing, RejectsProfilesAboveBeta) {
  const Grid g = make_grid(2, 8, 1.0);
  EXPECT_THROW(ForcingSpec::linear_phase(g, 0.1, std::vector<double>(g.size(), 0.2)),
               std::invalid_argument);
}

TEST(Assumptions, ZeroFamily) {
  const Grid g = make_grid(2, 8, 1.0);
  const auto probes = random_probes(g, 3, 2);
  const auto rep = check_assumptions(ForcingSpec::zero(g), probes);
  EXPECT_TRUE(rep.passes());
  EXPECT_LE(rep.growth_violation, 0.0);
}

TEST(Assumptions, LinearPhaseGrowthIdentity) {
  const Grid g = make_grid(2, 8, 1.0);
  std::vector<double> c(g.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = 0.25 * (1.0 + std::cos(0.3 * i)) / 2.0;
  const auto f = ForcingSpec::linear_phase(g, 0.25, c);
  const auto probes = random_probes(g, 4, 3);
  const auto rep = check_assumptions(f, probes);
  EXPECT_TRUE(rep.passes());
  for (const auto& u : probes)
    for (std::size_t i = 0; i < u.size(); ++i)
      EXPECT_LE((f.value(0.0, i, u[i]) * std::conj(u[i])).imag() - 0.25 * std::norm(u[i]), 1e-12);
}

TEST(Assumptions, AdditiveAndCombined) {
  const Grid g = make_grid(2, 8, 1.0);
  std::vector<Complex> g0(g.size());
  for (std::size_t i = 0; i < g0.size(); ++i) g0[i] = {std::cos(0.2 * i), std::sin(0.5 * i)};
  const auto probes = random_probes(g, 3, 5);
  const double times[] = {0.0, 0.5, 2.0};
  EXPECT_TRUE(check_assumptions(ForcingSpec::additive(g, 0.3, g0, TemporalEnvelope::exponential(-0.4)),
                                std::span<const SpectralField>(probes), times)
                  .passes());
  EXPECT_TRUE(check_assumptions(ForcingSpec::combined(g, 0.3, std::vector<double>(g.size(), 0.1), g0),
                                std::span<const SpectralField>(probes), times)
                  .passes());
}

TEST(Assumptions, AdversarialViolationReported) {
  const Grid g = make_grid(2, 8, 1.0);
  const auto probes = random_probes(g, 2, 7);
  const auto rep = check_assumptions(DoublePhase{0.2}, std::span<const SpectralField>(probes),
                                     std::span<const double>{});
  EXPECT_FALSE(rep.passes());
  EXPECT_GT(rep.growth_violation, 0.0);
  EXPECT_GT(rep.bound_violation, 0.0);
}

TEST(Admissible, ReferenceTriple) {
  const auto p = admissible_pair(2, 0.75, 1.0);
  EXPECT_DOUBLE_EQ(p.r, 3.0);
  EXPECT_DOUBLE_EQ(p.p, 4.0);
  EXPECT_NEAR(2 * 0.75 / p.r + 2.0 / p.p, 1.0, 1e-15);
  EXPECT_NEAR(p.scaling_residual(2, 0.75), 0.0, 1e-15);
}

TEST(Admissible, Endpoint) {
  const auto p = admissible_pair(3, 0.8, 0.0);
  EXPECT_TRUE(p.r_is_infinite());
  EXPECT_DOUBLE_EQ(p.p, 2.0);
  EXPECT_NEAR(p.scaling_residual(3, 0.8), 0.0, 1e-15);
}

TEST(Admissible, LowerAlphaBoundary) {
  EXPECT_DOUBLE_EQ(alpha_lower_bound(2), 2.0 / 3.0);
  EXPECT_NEAR(sigma_upper_bound(2, 2.0 / 3.0), 2.0, 1e-14);
  EXPECT_NO_THROW(admissible_pair(2, 2.0 / 3.0, 1.0));
  EXPECT_TRUE(validate_regime(2, 2.0 / 3.0, 1.0, 1.0, 0.0).well_posed());
}

TEST(Admissible, NamesViolatedConstraint) {
  try {
    admissible_pair(2, 0.4, 1.0);
    FAIL();
  } catch (const RegimeError& e) {
    EXPECT_EQ(e.constraint(), "alpha >= n/(2n-1)");
  }
  try {
    admissible_pair(1, 0.9, 1.0);
    FAIL();
  } catch (const RegimeError& e) {
    EXPECT_EQ(e.constraint(), "n >= 2");
  }
  try {
    admissible_pair(3, 0.8, 5.0);
    FAIL();
  } catch (const RegimeError& e) {
    EXPECT_EQ(e.constraint(), "sigma < 2alpha/(n-2alpha)");
  }
}

TEST(Admissible, RandomTriplesSatisfyIdentity) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 2000; ++k) {
    const int n = 2 + static_cast<int>(u(rng) * 2.0);
    const double lo = alpha_lower_bound(n);
    const double alpha = lo + (1.0 - lo) * u(rng) * 0.999;
    const double smax = std::min(sigma_upper_bound(n, alpha), 50.0);
    const double sigma = smax * u(rng);
    const auto p = admissible_pair(n, alpha, sigma);
    EXPECT_LE(std::abs(p.scaling_residual(n, alpha)), 1e-12);
    EXPECT_FALSE(p.endpoint);
  }
}

TEST(Regime, Report) {
  const auto ok = validate_regime(2, 0.75, 1.0, 1.0, 0.1);
  EXPECT_TRUE(ok.all_ok());
  EXPECT_TRUE(ok.violations().empty());
  const auto bad = validate_regime(2, 0.4, 1.0, 1.0, 0.1);
  EXPECT_FALSE(bad.alpha_ok);
  EXPECT_FALSE(bad.well_posed());
  const auto edge = validate_regime(2, 0.75, 1.0, 0.5, 0.5);
  EXPECT_TRUE(edge.well_posed());
  EXPECT_FALSE(edge.moment_diagnostics_enabled());
}

TEST(Radiality, GaussianIsRadial) {
  const Grid g = make_grid(2, 32, 10.0);
  SpectralField u(g, Space::physical);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coordinate(i, 0) - 5.0, y = g.coordinate(i, 1) - 5.0;
    u[i] = std::exp(-(x * x + y * y) / 4.0);
  }
  EXPECT_LT(radiality_deviation(u), 1e-12);
  for (std::size_t i = 0; i < g.size(); ++i) u[i] *= 1.0 + 0.5 * std::cos(g.coordinate(i, 0));
  EXPECT_GT(radiality_deviation(u), 1e-2);
}
