#include "fnls/spectral_field.hpp"

#include <string>
#include <fftw3.h>

#include <algorithm>
#include <new>
#include <stdexcept>

namespace fnls {

void* fftw_aligned_alloc(std::size_t bytes) {
  void* p = fftw_malloc(bytes == 0 ? 1 : bytes);
  if (p == nullptr) throw std::bad_alloc();
  return p;
}

void fftw_aligned_free(void* p) noexcept { fftw_free(p); }

SpectralField::SpectralField(Grid grid, Space space)
    : grid_(grid), space_(space), values_(grid.size(), Complex{0.0, 0.0}) {}

SpectralField::SpectralField(Grid grid, Space space,
                             std::span<const Complex> values)
    : grid_(grid), space_(space), values_(values.begin(), values.end()) {
  if (values_.size() != grid_.size())
    throw std::invalid_argument("field value count does not match grid size");
}

SpectralField SpectralField::constant(const Grid& grid, Complex c) {
  SpectralField f(grid, Space::physical);
  std::fill(f.values_.begin(), f.values_.end(), c);
  return f;
}

void require_compatible(const SpectralField& a, const SpectralField& b) {
  if (!(a.grid() == b.grid()))
    throw std::invalid_argument("fields live on different grids");
  if (a.space() != b.space())
    throw std::invalid_argument("fields are tagged with different spaces");
}

void require_space(const SpectralField& f, Space expected, const char* what) {
  if (f.space() != expected)
    throw std::invalid_argument(
        std::string(what) + ": expected a " +
        (expected == Space::physical ? "physical" : "frequency") +
        "-space field");
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  require_compatible(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
  require_compatible(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other[i];
  return *this;
}

SpectralField& SpectralField::operator*=(Complex c) {
  for (auto& v : values_) v *= c;
  return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) {
  a += b;
  return a;
}

SpectralField operator-(SpectralField a, const SpectralField& b) {
  a -= b;
  return a;
}

SpectralField operator*(Complex c, SpectralField a) {
  a *= c;
  return a;
}

double max_abs_difference(const SpectralField& a, const SpectralField& b) {
  require_compatible(a, b);
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace fnls
