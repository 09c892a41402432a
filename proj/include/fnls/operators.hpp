#pragma once

#include <vector>

#include "fnls/spectral_field.hpp"

namespace fnls {

/// Symbol |xi|^{2 alpha} of the fractional Laplacian on one grid, in FFT
/// order, together with the 2/3-rule dealiasing mask.
class MultiplierCache {
 public:
  /// alpha must lie in (0, 1]; alpha = 1 reproduces the classical Laplacian.
  MultiplierCache(const Grid& grid, double alpha);

  const Grid& grid() const { return grid_; }
  double alpha() const { return alpha_; }
  const std::vector<double>& symbol() const { return symbol_; }
  const std::vector<unsigned char>& dealias_mask() const { return mask_; }

  /// Largest symbol value among modes kept by the dealiasing mask.
  double max_retained_symbol() const { return max_retained_; }

 private:
  Grid grid_;
  double alpha_;
  std::vector<double> symbol_;
  std::vector<unsigned char> mask_;
  double max_retained_ = 0.0;
};

/// (-Delta)^alpha as a Fourier multiplier. Output keeps the input's tag.
SpectralField frac_laplacian(const SpectralField& field,
                             const MultiplierCache& cache);

/// S(t) = exp(-i t (-Delta)^alpha). Output keeps the input's tag.
SpectralField free_propagator(const SpectralField& field, double t,
                              const MultiplierCache& cache);

/// e^{-gamma t} S(t). Requires t >= 0 and gamma >= 0.
SpectralField damped_propagator(const SpectralField& field, double t,
                                double gamma, const MultiplierCache& cache);

/// In-place e^{-gamma t} S(t) on a frequency-space field.
void apply_damped_propagator(SpectralField& freq, double t, double gamma,
                             const MultiplierCache& cache);

/// Zeroes every mode with some |m_j| > N/3 (includes the Nyquist mode).
void apply_dealias(SpectralField& freq, const MultiplierCache& cache);
SpectralField dealias(const SpectralField& field, const MultiplierCache& cache);

/// Discrete L^2 norm with cell-volume weights (Parseval in frequency space).
double l2_norm(const SpectralField& field);
/// Squared L^2 norm, the mass M(u).
double mass(const SpectralField& field);
/// (sum |u|^p dV)^{1/p}. Needs p >= 1; frequency tags only allowed for p = 2.
double lp_norm(const SpectralField& field, double p);

/// (a, b) = sum a conj(b) dV, computed in whichever space both fields share.
Complex inner_product(const SpectralField& a, const SpectralField& b);

/// Fraction of the mass sitting in the outer 10% shell of the box. Monitors
/// periodic-truncation error for data meant to live on R^n.
double boundary_mass_fraction(const SpectralField& field);

}  // namespace fnls
