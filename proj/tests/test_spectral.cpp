#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fnls/fft.hpp"
#include "fnls/grid.hpp"
#include "fnls/operators.hpp"
#include "fnls/snapshot.hpp"

using namespace fnls;
using std::numbers::pi;

namespace {

SpectralField random_field(const Grid& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  SpectralField f(g, Space::physical);
  for (auto& v : f.values()) v = {d(rng), d(rng)};
  return f;
}

// e^{i xi.x} for integer wavenumber m along every axis listed.
SpectralField plane_wave(const Grid& g, std::array<int, 3> m) {
  SpectralField f(g, Space::physical);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double phase = 0.0;
    for (int d = 0; d < g.dim(); ++d) phase += 2.0 * pi * m[d] / g.length() * g.coordinate(i, d);
    f[i] = std::polar(1.0, phase);
  }
  return f;
}

}  // namespace

TEST(Grid, SmallestLattice) {
  const Grid g = make_grid(1, 2, 2 * pi);
  const auto xi = g.axis_frequencies();
  ASSERT_EQ(xi.size(), 2u);
  EXPECT_DOUBLE_EQ(xi[0], 0.0);
  EXPECT_DOUBLE_EQ(xi[1], -1.0);
}

TEST(Grid, TwoDimensionalLattice) {
  const Grid g = make_grid(2, 64, 2 * pi);
  EXPECT_EQ(g.size(), 4096u);
  const auto xi = g.axis_frequencies();
  EXPECT_DOUBLE_EQ(*std::min_element(xi.begin(), xi.end()), -32.0);
  EXPECT_DOUBLE_EQ(*std::max_element(xi.begin(), xi.end()), 31.0);
}

TEST(Grid, FrequencySpacing) {
  const Grid g = make_grid(1, 8, 4 * pi);
  EXPECT_DOUBLE_EQ(g.frequency_step(), 0.5);
  EXPECT_DOUBLE_EQ(g.axis_frequencies()[1], 0.5);
}

TEST(Grid, RejectsBadShapes) {
  EXPECT_THROW(make_grid(0, 8, 1.0), std::invalid_argument);
  EXPECT_THROW(make_grid(4, 8, 1.0), std::invalid_argument);
  EXPECT_THROW(make_grid(2, 12, 1.0), std::invalid_argument);
  EXPECT_THROW(make_grid(2, 8, 0.0), std::invalid_argument);
}

TEST(Grid, FlattenRoundTrip) {
  const Grid g = make_grid(3, 8, 1.0);
  for (std::size_t i = 0; i < g.size(); i += 37) EXPECT_EQ(g.flatten(g.unflatten(i)), i);
}

TEST(Transform, ConstantFieldIsDcOnly) {
  const Grid g = make_grid(2, 16, 3.0);
  const Complex c{1.5, -0.25};
  const SpectralField f = forward_transform(SpectralField::constant(g, c));
  EXPECT_NEAR(std::abs(f[0] - c * g.box_volume()), 0.0, 1e-12);
  for (std::size_t i = 1; i < f.size(); ++i) EXPECT_LT(std::abs(f[i]), 1e-12);
}

TEST(Transform, RoundTripIdentity) {
  const Grid g = make_grid(2, 32, 7.0);
  const SpectralField u = random_field(g, 3);
  const SpectralField back = inverse_transform(forward_transform(u));
  EXPECT_LT(max_abs_difference(u, back), 1e-12);
}

TEST(Transform, PlaneWaveMatchesDirectSum) {
  const Grid g = make_grid(2, 8, 5.0);
  const SpectralField u = plane_wave(g, {2, -1, 0});
  const SpectralField f = forward_transform(u);
  // Direct evaluation of sum_x u(x) e^{-i xi.x} dV at every frequency.
  for (std::size_t k = 0; k < g.size(); ++k) {
    Complex direct{0.0, 0.0};
    const auto m = g.wavenumber(k);
    for (std::size_t i = 0; i < g.size(); ++i) {
      double ph = 0.0;
      for (int d = 0; d < 2; ++d) ph += 2.0 * pi * m[d] / g.length() * g.coordinate(i, d);
      direct += u[i] * std::polar(1.0, -ph) * g.cell_volume();
    }
    EXPECT_LT(std::abs(f[k] - direct), 1e-11);
  }
  EXPECT_NEAR(std::abs(f[g.flatten({2, g.fft_index(-1), 0})]), g.box_volume(), 1e-11);
}

TEST(Transform, WrongTagThrows) {
  const Grid g = make_grid(1, 8, 1.0);
  EXPECT_THROW(inverse_transform(SpectralField(g, Space::physical)), std::invalid_argument);
  EXPECT_THROW(forward_transform(SpectralField(g, Space::frequency)), std::invalid_argument);
}

TEST(Operators, ConstantIsAnnihilated) {
  const Grid g = make_grid(2, 16, 4.0);
  const MultiplierCache cache(g, 0.75);
  const SpectralField out = frac_laplacian(SpectralField::constant(g, 2.0), cache);
  for (auto v : out.values()) EXPECT_LT(std::abs(v), 1e-12);
}

TEST(Operators, HalfPowerOnPlaneWave) {
  const Grid g = make_grid(2, 16, 2 * pi);
  const MultiplierCache cache(g, 0.5);
  const SpectralField u = plane_wave(g, {3, 4, 0});
  const SpectralField out = frac_laplacian(u, cache);
  EXPECT_LT(max_abs_difference(out, Complex(5.0) * u), 1e-11);
}

TEST(Operators, AlphaOneIsClassicalLaplacian) {
  const Grid g = make_grid(2, 16, 3.0);
  const MultiplierCache cache(g, 1.0);
  const SpectralField u = plane_wave(g, {1, 2, 0});
  const double k2 = std::pow(2 * pi / 3.0, 2) * 5.0;
  EXPECT_LT(max_abs_difference(frac_laplacian(u, cache), Complex(k2) * u), 1e-10);
}

TEST(Operators, FreePropagator) {
  const Grid g = make_grid(2, 16, 2 * pi);
  const MultiplierCache cache(g, 0.5);
  const SpectralField u = random_field(g, 5);
  EXPECT_LT(max_abs_difference(free_propagator(u, 0.0, cache), u), 1e-12);
  const SpectralField w = plane_wave(g, {3, 4, 0});
  EXPECT_LT(max_abs_difference(free_propagator(w, 1.0, cache), std::polar(1.0, -5.0) * w), 1e-11);
  for (double t : {0.3, 1.7, 12.0})
    EXPECT_NEAR(l2_norm(free_propagator(u, t, cache)), l2_norm(u), 1e-10 * l2_norm(u));
}

TEST(Operators, DampedPropagator) {
  const Grid g = make_grid(2, 16, 5.0);
  const MultiplierCache cache(g, 0.75);
  const SpectralField u = random_field(g, 9);
  EXPECT_LT(max_abs_difference(damped_propagator(u, 0.8, 0.0, cache),
                               free_propagator(u, 0.8, cache)),
            1e-12);
  EXPECT_NEAR(l2_norm(damped_propagator(u, 1.0, 0.5, cache)), std::exp(-0.5) * l2_norm(u),
              1e-12 * l2_norm(u));
  const SpectralField z = damped_propagator(SpectralField::zeros(g), 1.0, 0.5, cache);
  for (auto v : z.values()) EXPECT_EQ(v, Complex(0.0));
  EXPECT_THROW(damped_propagator(u, -1.0, 0.5, cache), std::invalid_argument);
}

TEST(Operators, LpNormOfConstant) {
  const Grid g = make_grid(2, 8, 3.0);
  const double V = 9.0;
  for (double p : {1.0, 2.0, 3.5, 6.0})
    EXPECT_NEAR(lp_norm(SpectralField::constant(g, Complex(0.0, -2.0)), p),
                2.0 * std::pow(V, 1.0 / p), 1e-12);
  EXPECT_EQ(lp_norm(SpectralField::zeros(g), 4.0), 0.0);
}

TEST(Operators, Parseval) {
  const Grid g = make_grid(3, 8, 2.5);
  const SpectralField u = random_field(g, 11);
  EXPECT_NEAR(l2_norm(u), l2_norm(forward_transform(u)), 1e-12 * l2_norm(u));
  const SpectralField v = random_field(g, 12);
  const Complex a = inner_product(u, v);
  const Complex b = inner_product(forward_transform(u), forward_transform(v));
  EXPECT_LT(std::abs(a - b), 1e-10 * std::abs(a));
}

TEST(Operators, DealiasKeepsTwoThirds) {
  const Grid g = make_grid(1, 16, 1.0);
  const MultiplierCache cache(g, 0.75);
  std::size_t kept = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const bool keep = cache.dealias_mask()[i] != 0;
    EXPECT_EQ(keep, std::abs(g.wavenumber(i)[0]) <= 5);
    kept += keep;
  }
  EXPECT_EQ(kept, 11u);
}

TEST(Snapshot, RoundTripAndHeader) {
  const Grid g = make_grid(2, 8, 3.5);
  const SpectralField u = random_field(g, 2);
  const auto bytes = encode_snapshot(u);
  EXPECT_EQ(bytes.size(), kSnapshotHeaderBytes + 16 * g.size());
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "FNLS");
  const SpectralField back = decode_snapshot(bytes);
  EXPECT_EQ(back.grid(), g);
  EXPECT_EQ(max_abs_difference(u, back), 0.0);
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(decode_snapshot(bad), std::runtime_error);
  bad = bytes;
  bad.resize(bytes.size() - 1);
  EXPECT_THROW(decode_snapshot(bad), std::runtime_error);
}
