#include "fnls/noise.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "fnls/fft.hpp"

namespace fnls {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

bool is_representative(const std::array<int, Grid::kMaxDim>& m, int dim) {
  for (int d = 0; d < dim; ++d) {
    if (m[d] > 0) return true;
    if (m[d] < 0) return false;
  }
  return false;  // the zero vector
}

}  // namespace

std::vector<NoiseMode> trig_modes(const Grid& grid, int cutoff) {
  if (cutoff < 0) throw std::invalid_argument("noise cutoff must be >= 0");
  if (cutoff > grid.dealias_cutoff())
    throw std::invalid_argument("noise cutoff " + std::to_string(cutoff) +
                                " exceeds the dealiased band N/3 = " +
                                std::to_string(grid.dealias_cutoff()));
  std::vector<NoiseMode> modes;
  const int dim = grid.dim();
  std::array<int, Grid::kMaxDim> m{0, 0, 0};
  for (int d = 0; d < dim; ++d) m[d] = -cutoff;
  while (true) {
    const bool zero = std::all_of(m.begin(), m.begin() + dim, [](int v) { return v == 0; });
    if (zero || is_representative(m, dim)) {
      std::array<int, Grid::kMaxDim> plus{0, 0, 0}, minus{0, 0, 0};
      for (int d = 0; d < dim; ++d) {
        plus[d] = grid.fft_index(m[d]);
        minus[d] = grid.fft_index(-m[d]);
      }
      NoiseMode mode;
      mode.wavenumber = m;
      mode.plus_index = grid.flatten(plus);
      mode.minus_index = grid.flatten(minus);
      mode.xi_squared = grid.xi_squared(mode.plus_index);
      if (zero) {
        mode.kind = ModeKind::constant;
        modes.push_back(mode);
      } else {
        mode.kind = ModeKind::cosine;
        modes.push_back(mode);
        mode.kind = ModeKind::sine;
        modes.push_back(mode);
      }
    }
    int d = dim - 1;
    while (d >= 0 && m[d] == cutoff) {
      m[d] = -cutoff;
      --d;
    }
    if (d < 0) break;
    ++m[d];
  }
  return modes;
}

CovarianceSpec::CovarianceSpec(Grid grid, std::vector<NoiseMode> modes,
                               std::vector<double> amplitudes)
    : grid_(grid), modes_(std::move(modes)), amplitudes_(std::move(amplitudes)) {
  if (modes_.size() != amplitudes_.size())
    throw std::invalid_argument("one amplitude per noise mode is required");
  for (double a : amplitudes_) {
    if (!(a >= 0.0) || !std::isfinite(a))
      throw std::invalid_argument("noise amplitudes must be finite and nonnegative");
    hs_squared_ += a * a;
  }
}

CovarianceSpec CovarianceSpec::power_law(const Grid& grid, double scale,
                                         double decay, int cutoff) {
  if (!(scale >= 0.0)) throw std::invalid_argument("noise scale must be >= 0");
  auto modes = trig_modes(grid, cutoff);
  std::vector<double> amps;
  amps.reserve(modes.size());
  for (const auto& m : modes)
    amps.push_back(scale * std::pow(1.0 + m.xi_squared, -0.5 * decay));
  CovarianceSpec spec(grid, std::move(modes), std::move(amps));
  spec.scale_ = scale;
  spec.decay_ = decay;
  spec.cutoff_ = cutoff;
  return spec;
}

CovarianceSpec CovarianceSpec::from_modes(const Grid& grid,
                                          std::vector<NoiseMode> modes,
                                          std::vector<double> amplitudes) {
  return CovarianceSpec(grid, std::move(modes), std::move(amplitudes));
}

CovarianceSpec CovarianceSpec::scaled(double factor) const {
  if (!(factor >= 0.0)) throw std::invalid_argument("scale factor must be >= 0");
  std::vector<double> amps = amplitudes_;
  for (auto& a : amps) a *= factor;
  CovarianceSpec spec(grid_, modes_, std::move(amps));
  spec.scale_ = scale_ * factor;
  spec.decay_ = decay_;
  spec.cutoff_ = cutoff_;
  return spec;
}

double hs_norm(const CovarianceSpec& spec) {
  return std::sqrt(spec.hs_norm_squared());
}

SpectralField basis_function(const Grid& grid, const NoiseMode& mode) {
  SpectralField e(grid, Space::physical);
  const double v = grid.box_volume();
  const double step = grid.frequency_step();
  for (std::size_t i = 0; i < e.size(); ++i) {
    double phase = 0.0;
    for (int d = 0; d < grid.dim(); ++d)
      phase += step * mode.wavenumber[d] * grid.coordinate(i, d);
    switch (mode.kind) {
      case ModeKind::constant: e[i] = 1.0 / std::sqrt(v); break;
      case ModeKind::cosine: e[i] = std::sqrt(2.0 / v) * std::cos(phase); break;
      case ModeKind::sine: e[i] = std::sqrt(2.0 / v) * std::sin(phase); break;
    }
  }
  return e;
}

void add_modes_to_frequency(SpectralField& freq, const std::vector<NoiseMode>& modes,
                            const std::vector<double>& coeffs, Complex factor) {
  require_space(freq, Space::frequency, "add_modes_to_frequency");
  const double v = freq.grid().box_volume();
  const double pair = std::sqrt(0.5 * v);
  const Complex i{0.0, 1.0};
  for (std::size_t k = 0; k < modes.size(); ++k) {
    const NoiseMode& m = modes[k];
    const double b = coeffs[k];
    switch (m.kind) {
      case ModeKind::constant:
        freq[m.plus_index] += factor * (b * std::sqrt(v));
        break;
      case ModeKind::cosine:
        freq[m.plus_index] += factor * (b * pair);
        freq[m.minus_index] += factor * (b * pair);
        break;
      case ModeKind::sine:
        freq[m.plus_index] += factor * (-i * b * pair);
        freq[m.minus_index] += factor * (i * b * pair);
        break;
    }
  }
}

Complex project_on_mode(const SpectralField& freq, const NoiseMode& m) {
  const double v = freq.grid().box_volume();
  const Complex plus = freq[m.plus_index];
  const Complex minus = freq[m.minus_index];
  switch (m.kind) {
    case ModeKind::constant: return plus / std::sqrt(v);
    case ModeKind::cosine: return std::sqrt(2.0 / v) * 0.5 * (minus + plus);
    case ModeKind::sine:
      return std::sqrt(2.0 / v) * (minus - plus) / Complex(0.0, 2.0);
  }
  return {};
}

std::uint64_t stream_key(std::uint64_t seed, std::uint64_t path_index,
                         std::uint64_t counter) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ path_index);
  return splitmix64(h ^ counter);
}

NoiseStream::NoiseStream(std::shared_ptr<const CovarianceSpec> spec,
                         std::uint64_t seed, std::uint64_t path_index,
                         std::uint64_t counter)
    : spec_(std::move(spec)), seed_(seed), path_index_(path_index), counter_(counter) {
  if (!spec_) throw std::invalid_argument("noise stream needs a covariance spec");
}

std::vector<double> NoiseStream::brownian_increments(double dt, int substeps) {
  if (!(dt > 0.0)) throw std::invalid_argument("noise increment needs dt > 0");
  if (substeps < 1) throw std::invalid_argument("substeps must be >= 1");
  const std::size_t k = spec_->mode_count();
  std::vector<double> inc(k, 0.0);
  const double sd = std::sqrt(dt / substeps);
  for (int s = 0; s < substeps; ++s) {
    std::mt19937_64 engine(stream_key(seed_, path_index_, counter_));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t j = 0; j < k; ++j) inc[j] += sd * normal(engine);
    ++counter_;
  }
  return inc;
}

std::vector<double> NoiseStream::draw_coefficients(double dt, int substeps) {
  auto b = brownian_increments(dt, substeps);
  const auto& amps = spec_->amplitudes();
  for (std::size_t j = 0; j < b.size(); ++j) b[j] *= amps[j];
  return b;
}

WienerIncrement sample_increment(NoiseStream& stream, double dt) {
  WienerIncrement inc;
  inc.dt = dt;
  inc.coefficients = stream.draw_coefficients(dt);
  SpectralField freq(stream.spec().grid(), Space::frequency);
  add_modes_to_frequency(freq, stream.spec().modes(), inc.coefficients, 1.0);
  inc.field = inverse_transform(std::move(freq));
  for (auto& v : inc.field.values()) v = Complex(v.real(), 0.0);
  return inc;
}

CovarianceReport covariance_check(const CovarianceSpec& spec, std::size_t n_samples,
                                  double dt, std::uint64_t seed) {
  if (n_samples < 100)
    throw std::invalid_argument("covariance_check needs at least 100 samples");
  const std::size_t k = spec.mode_count();
  const std::size_t kc = std::min<std::size_t>(k, 32);
  auto shared = std::make_shared<const CovarianceSpec>(spec);
  NoiseStream stream(shared, seed, 0);

  std::vector<double> sum_sq(k, 0.0);
  std::vector<double> cross(kc * kc, 0.0);
  std::vector<double> proj(k);
  for (std::size_t s = 0; s < n_samples; ++s) {
    const auto inc = sample_increment(stream, dt);
    const SpectralField freq = forward_transform(inc.field);
    for (std::size_t j = 0; j < k; ++j) {
      proj[j] = project_on_mode(freq, spec.modes()[j]).real();
      sum_sq[j] += proj[j] * proj[j];
    }
    for (std::size_t a = 0; a < kc; ++a)
      for (std::size_t b = a + 1; b < kc; ++b) cross[a * kc + b] += proj[a] * proj[b];
  }

  CovarianceReport report;
  report.samples = n_samples;
  report.dt = dt;
  const double n = static_cast<double>(n_samples);
  // Roundoff leaking into zero-amplitude modes is not a statistical effect.
  const double se_floor = 1e-14 * spec.hs_norm_squared() * dt;
  auto zscore = [se_floor](double diff, double se) {
    se = std::max(se, se_floor);
    if (se > 0.0) return diff / se;
    return diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff);
  };
  for (std::size_t j = 0; j < k; ++j) {
    ModeVarianceStat st;
    const double phi = spec.amplitudes()[j];
    st.expected = phi * phi * dt;
    st.empirical = sum_sq[j] / n;
    // Known zero mean: Var(x^2) = 2 sigma^4 for Gaussian x.
    st.z = zscore(st.empirical - st.expected, st.expected * std::sqrt(2.0 / n));
    report.max_abs_z = std::max(report.max_abs_z, std::abs(st.z));
    report.modes.push_back(st);
  }
  for (std::size_t a = 0; a < kc; ++a) {
    for (std::size_t b = a + 1; b < kc; ++b) {
      const double se =
          std::sqrt(report.modes[a].expected * report.modes[b].expected / n);
      const double z = zscore(cross[a * kc + b] / n, se);
      report.max_abs_cross_z = std::max(report.max_abs_cross_z, std::abs(z));
    }
  }
  report.flagged = report.max_abs_z > 5.0 || report.max_abs_cross_z > 5.0;
  return report;
}

}  // namespace fnls
