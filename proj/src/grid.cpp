#include "fnls/grid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fnls {

namespace {

bool is_power_of_two(int v) { return v >= 2 && (v & (v - 1)) == 0; }

}  // namespace

Grid::Grid(int n, int points, double length)
    : dim_(n), points_(points), length_(length) {
  size_ = 1;
  for (int d = 0; d < n; ++d) size_ *= static_cast<std::size_t>(points);
  cell_volume_ = std::pow(length / points, n);
  box_volume_ = std::pow(length, n);
}

Grid make_grid(int n, int points_per_dim, double box_length) {
  if (n < 1 || n > Grid::kMaxDim)
    throw std::invalid_argument("grid dimension must be 1, 2 or 3, got " +
                                std::to_string(n));
  if (!is_power_of_two(points_per_dim))
    throw std::invalid_argument(
        "points per dimension must be a power of two >= 2, got " +
        std::to_string(points_per_dim));
  if (!(box_length > 0.0) || !std::isfinite(box_length))
    throw std::invalid_argument("box length must be positive and finite");
  return Grid(n, points_per_dim, box_length);
}

double Grid::frequency_step() const {
  return 2.0 * std::numbers::pi / length_;
}

std::array<int, Grid::kMaxDim> Grid::unflatten(std::size_t flat) const {
  std::array<int, kMaxDim> idx{0, 0, 0};
  for (int d = dim_ - 1; d >= 0; --d) {
    idx[d] = static_cast<int>(flat % points_);
    flat /= points_;
  }
  return idx;
}

std::size_t Grid::flatten(const std::array<int, kMaxDim>& idx) const {
  std::size_t flat = 0;
  for (int d = 0; d < dim_; ++d) flat = flat * points_ + idx[d];
  return flat;
}

std::array<int, Grid::kMaxDim> Grid::wavenumber(std::size_t flat) const {
  auto idx = unflatten(flat);
  for (int d = 0; d < dim_; ++d) idx[d] = mode_index(idx[d]);
  return idx;
}

double Grid::xi_squared(std::size_t flat) const {
  const double step = frequency_step();
  const auto m = wavenumber(flat);
  double s = 0.0;
  for (int d = 0; d < dim_; ++d) {
    const double xi = step * m[d];
    s += xi * xi;
  }
  return s;
}

double Grid::coordinate(std::size_t flat, int d) const {
  return spacing() * unflatten(flat)[d];
}

std::vector<double> Grid::axis_frequencies() const {
  std::vector<double> xi(points_);
  const double step = frequency_step();
  for (int j = 0; j < points_; ++j) xi[j] = step * mode_index(j);
  return xi;
}

}  // namespace fnls
