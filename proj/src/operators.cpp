#include "fnls/operators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fnls/fft.hpp"

namespace fnls {

MultiplierCache::MultiplierCache(const Grid& grid, double alpha)
    : grid_(grid), alpha_(alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("fractional exponent must lie in (0, 1]");
  symbol_.resize(grid.size());
  mask_.resize(grid.size());
  const int cutoff = grid.dealias_cutoff();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double xi2 = grid.xi_squared(k);
    // |xi|^{2 alpha} = (|xi|^2)^alpha; exactly zero at the origin.
    symbol_[k] = xi2 == 0.0 ? 0.0 : std::pow(xi2, alpha);
    const auto m = grid.wavenumber(k);
    bool keep = true;
    for (int d = 0; d < grid.dim(); ++d) keep = keep && std::abs(m[d]) <= cutoff;
    mask_[k] = keep ? 1 : 0;
    if (keep) max_retained_ = std::max(max_retained_, symbol_[k]);
  }
}

namespace {

void require_grid(const SpectralField& field, const MultiplierCache& cache) {
  if (!(field.grid() == cache.grid()))
    throw std::invalid_argument("field and multiplier cache use different grids");
}

template <class Fn>
SpectralField apply_multiplier(const SpectralField& field,
                               const MultiplierCache& cache, Fn&& factor) {
  require_grid(field, cache);
  SpectralField freq = to_space(field, Space::frequency);
  const auto& sym = cache.symbol();
  for (std::size_t k = 0; k < freq.size(); ++k) freq[k] *= factor(sym[k]);
  return field.is_physical() ? inverse_transform(std::move(freq)) : freq;
}

}  // namespace

SpectralField frac_laplacian(const SpectralField& field,
                             const MultiplierCache& cache) {
  return apply_multiplier(field, cache, [](double s) { return Complex(s, 0.0); });
}

SpectralField free_propagator(const SpectralField& field, double t,
                              const MultiplierCache& cache) {
  return apply_multiplier(field, cache, [t](double s) {
    return std::polar(1.0, -t * s);
  });
}

SpectralField damped_propagator(const SpectralField& field, double t,
                                double gamma, const MultiplierCache& cache) {
  if (t < 0.0) throw std::invalid_argument("damped propagator needs t >= 0");
  if (gamma < 0.0)
    throw std::invalid_argument("damped propagator needs gamma >= 0");
  const double decay = std::exp(-gamma * t);
  return apply_multiplier(field, cache, [t, decay](double s) {
    return std::polar(decay, -t * s);
  });
}

void apply_damped_propagator(SpectralField& freq, double t, double gamma,
                             const MultiplierCache& cache) {
  require_grid(freq, cache);
  require_space(freq, Space::frequency, "apply_damped_propagator");
  const double decay = std::exp(-gamma * t);
  const auto& sym = cache.symbol();
  for (std::size_t k = 0; k < freq.size(); ++k)
    freq[k] *= std::polar(decay, -t * sym[k]);
}

void apply_dealias(SpectralField& freq, const MultiplierCache& cache) {
  require_grid(freq, cache);
  require_space(freq, Space::frequency, "apply_dealias");
  const auto& mask = cache.dealias_mask();
  for (std::size_t k = 0; k < freq.size(); ++k)
    if (!mask[k]) freq[k] = Complex{0.0, 0.0};
}

SpectralField dealias(const SpectralField& field, const MultiplierCache& cache) {
  require_grid(field, cache);
  SpectralField freq = to_space(field, Space::frequency);
  apply_dealias(freq, cache);
  return field.is_physical() ? inverse_transform(std::move(freq)) : freq;
}

double mass(const SpectralField& field) {
  double s = 0.0;
  for (const auto& v : field.values()) s += std::norm(v);
  const Grid& g = field.grid();
  return field.is_physical() ? s * g.cell_volume() : s / g.box_volume();
}

double l2_norm(const SpectralField& field) { return std::sqrt(mass(field)); }

double lp_norm(const SpectralField& field, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm needs p >= 1");
  if (p == 2.0) return l2_norm(field);
  require_space(field, Space::physical, "lp_norm");
  if (std::isinf(p)) {
    double m = 0.0;
    for (const auto& v : field.values()) m = std::max(m, std::abs(v));
    return m;
  }
  double s = 0.0;
  for (const auto& v : field.values()) s += std::pow(std::abs(v), p);
  return std::pow(s * field.grid().cell_volume(), 1.0 / p);
}

Complex inner_product(const SpectralField& a, const SpectralField& b) {
  require_compatible(a, b);
  Complex s{0.0, 0.0};
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * std::conj(b[i]);
  const Grid& g = a.grid();
  return a.is_physical() ? s * g.cell_volume() : s / g.box_volume();
}

double boundary_mass_fraction(const SpectralField& field) {
  const SpectralField u = to_space(field, Space::physical);
  const Grid& g = u.grid();
  const double shell = 0.05 * g.length();
  double total = 0.0, outer = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double w = std::norm(u[i]);
    total += w;
    bool in_shell = false;
    for (int d = 0; d < g.dim(); ++d) {
      const double x = g.coordinate(i, d);
      in_shell = in_shell || std::min(x, g.length() - x) < shell;
    }
    if (in_shell) outer += w;
  }
  return total > 0.0 ? outer / total : 0.0;
}

}  // namespace fnls
