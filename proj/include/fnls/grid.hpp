#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace fnls {

/// Periodic lattice [0, L)^n with N points per dimension.
///
/// Frequencies follow xi_j = 2 pi m_j / L with integer m_j in [-N/2, N/2).
/// Storage is row-major with the last dimension fastest, and frequency
/// arrays use the usual FFT ordering (m = j for j < N/2, m = j - N otherwise).
class Grid {
 public:
  static constexpr int kMaxDim = 3;

  Grid() = default;

  int dim() const { return dim_; }
  int points() const { return points_; }
  double length() const { return length_; }

  std::size_t size() const { return size_; }
  double spacing() const { return length_ / points_; }
  double cell_volume() const { return cell_volume_; }
  double box_volume() const { return box_volume_; }
  double frequency_step() const;

  /// Integer wavenumber for FFT index j in one dimension.
  int mode_index(int j) const { return j < points_ / 2 ? j : j - points_; }
  /// Inverse of mode_index; m must lie in [-N/2, N/2).
  int fft_index(int m) const { return m >= 0 ? m : m + points_; }

  /// Per-dimension indices of a flat row-major offset. Unused dims are 0.
  std::array<int, kMaxDim> unflatten(std::size_t flat) const;
  std::size_t flatten(const std::array<int, kMaxDim>& idx) const;

  /// Integer wavenumber vector at a flat frequency offset.
  std::array<int, kMaxDim> wavenumber(std::size_t flat) const;
  /// Squared frequency |xi|^2 at a flat frequency offset.
  double xi_squared(std::size_t flat) const;
  /// Physical coordinate of lattice point `flat` along dimension d.
  double coordinate(std::size_t flat, int d) const;

  /// Frequencies along one dimension, in FFT order.
  std::vector<double> axis_frequencies() const;

  /// Largest |m_j| kept by the 2/3 dealiasing rule.
  int dealias_cutoff() const { return points_ / 3; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  friend Grid make_grid(int n, int points_per_dim, double box_length);
  Grid(int n, int points, double length);

  int dim_ = 0;
  int points_ = 0;
  double length_ = 0.0;
  std::size_t size_ = 0;
  double cell_volume_ = 0.0;
  double box_volume_ = 0.0;
};

/// Validated constructor. Throws std::invalid_argument for n outside
/// {1,2,3}, non-power-of-two N (or N < 2), or nonpositive L.
Grid make_grid(int n, int points_per_dim, double box_length);

}  // namespace fnls
