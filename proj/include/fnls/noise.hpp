#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "fnls/spectral_field.hpp"

namespace fnls {

enum class ModeKind { constant, cosine, sine };

/// One element e_k of the real trigonometric basis on the periodic box,
/// orthonormal for the cell-volume weighted inner product:
///   constant: 1/sqrt(V), cosine: sqrt(2/V) cos(xi.x), sine: sqrt(2/V) sin(xi.x).
/// `plus_index`/`minus_index` are the flat FFT offsets of +xi and -xi.
struct NoiseMode {
  ModeKind kind = ModeKind::constant;
  std::array<int, Grid::kMaxDim> wavenumber{0, 0, 0};
  std::size_t plus_index = 0;
  std::size_t minus_index = 0;
  double xi_squared = 0.0;
};

/// All basis modes with |m_j| <= cutoff, in a fixed deterministic order.
std::vector<NoiseMode> trig_modes(const Grid& grid, int cutoff);

/// Diagonal covariance Phi e_k = phi_k e_k on the real trigonometric basis.
class CovarianceSpec {
 public:
  /// Built-in family phi_k = scale * (1 + |xi_k|^2)^{-decay/2}, |m_j| <= cutoff.
  /// The cutoff must stay inside the dealiased band (cutoff <= N/3).
  static CovarianceSpec power_law(const Grid& grid, double scale, double decay,
                                  int cutoff);
  /// Explicit amplitudes on explicit modes.
  static CovarianceSpec from_modes(const Grid& grid, std::vector<NoiseMode> modes,
                                   std::vector<double> amplitudes);
  static CovarianceSpec none(const Grid& grid) { return from_modes(grid, {}, {}); }

  const Grid& grid() const { return grid_; }
  const std::vector<NoiseMode>& modes() const { return modes_; }
  const std::vector<double>& amplitudes() const { return amplitudes_; }
  std::size_t mode_count() const { return modes_.size(); }
  double scale() const { return scale_; }
  double decay() const { return decay_; }
  int cutoff() const { return cutoff_; }

  /// sum phi_k^2, accumulated in mode order.
  double hs_norm_squared() const { return hs_squared_; }
  bool is_zero() const { return hs_squared_ == 0.0; }

  /// Same modes, every amplitude multiplied by `factor` (>= 0).
  CovarianceSpec scaled(double factor) const;

 private:
  CovarianceSpec(Grid grid, std::vector<NoiseMode> modes,
                 std::vector<double> amplitudes);
  Grid grid_;
  std::vector<NoiseMode> modes_;
  std::vector<double> amplitudes_;
  double scale_ = 0.0;
  double decay_ = 0.0;
  int cutoff_ = -1;
  double hs_squared_ = 0.0;
};

/// ||Phi||_HS = sqrt(sum phi_k^2).
double hs_norm(const CovarianceSpec& spec);

/// Basis function e_k evaluated on the lattice (physical space).
SpectralField basis_function(const Grid& grid, const NoiseMode& mode);

/// Adds factor * sum_k coeffs[k] e_k to a frequency-space field.
void add_modes_to_frequency(SpectralField& freq, const std::vector<NoiseMode>& modes,
                            const std::vector<double>& coeffs, Complex factor);

/// Projection (u, e_k) read off a frequency-space field.
Complex project_on_mode(const SpectralField& freq, const NoiseMode& mode);

/// Reproducible source of Brownian increments for one path.
///
/// The Gaussian draws used at counter c depend only on (seed, path_index, c),
/// so streams can be recreated, skipped ahead, or coarsened: a step of
/// `substeps` sub-increments consumes the same draws as `substeps` fine steps.
class NoiseStream {
 public:
  NoiseStream(std::shared_ptr<const CovarianceSpec> spec, std::uint64_t seed,
              std::uint64_t path_index, std::uint64_t counter = 0);

  /// Brownian increments Delta beta_k over dt, advancing the counter by
  /// `substeps`. Throws std::invalid_argument for dt <= 0 or substeps < 1.
  std::vector<double> brownian_increments(double dt, int substeps = 1);
  /// phi_k * Delta beta_k.
  std::vector<double> draw_coefficients(double dt, int substeps = 1);

  void skip(std::uint64_t steps) { counter_ += steps; }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t path_index() const { return path_index_; }
  std::uint64_t counter() const { return counter_; }
  const CovarianceSpec& spec() const { return *spec_; }
  const std::shared_ptr<const CovarianceSpec>& spec_ptr() const { return spec_; }

 private:
  std::shared_ptr<const CovarianceSpec> spec_;
  std::uint64_t seed_;
  std::uint64_t path_index_;
  std::uint64_t counter_;
};

/// 64-bit key for the generator used at one (seed, path, counter) triple.
std::uint64_t stream_key(std::uint64_t seed, std::uint64_t path_index,
                         std::uint64_t counter);

struct WienerIncrement {
  SpectralField field;  // physical space, imaginary part exactly zero
  double dt = 0.0;
  std::vector<double> coefficients;  // phi_k * Delta beta_k per mode
};

/// Delta W = sum_k phi_k Delta beta_k e_k with Delta beta_k ~ N(0, dt).
WienerIncrement sample_increment(NoiseStream& stream, double dt);

struct ModeVarianceStat {
  double expected = 0.0;   // phi_k^2 dt
  double empirical = 0.0;  // sample variance of (Delta W, e_k)
  double z = 0.0;
};

struct CovarianceReport {
  std::size_t samples = 0;
  double dt = 0.0;
  std::vector<ModeVarianceStat> modes;
  double max_abs_z = 0.0;
  /// Largest |z| of empirical cross-covariances between distinct modes
  /// (first 32 modes).
  double max_abs_cross_z = 0.0;
  bool flagged = false;  // some |z| > 5
};

/// Samples increments, projects them back onto the basis, and compares
/// per-mode variances with phi_k^2 dt. Needs n_samples >= 100.
CovarianceReport covariance_check(const CovarianceSpec& spec, std::size_t n_samples,
                                  double dt = 0.01, std::uint64_t seed = 1);

}  // namespace fnls
