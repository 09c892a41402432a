#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "fnls/grid.hpp"

namespace fnls {

using Complex = std::complex<double>;

/// Allocator backed by fftw_malloc so field storage always meets the SIMD
/// alignment FFTW planned for.
template <class T>
struct FftwAllocator {
  using value_type = T;
  FftwAllocator() noexcept = default;
  template <class U>
  FftwAllocator(const FftwAllocator<U>&) noexcept {}
  T* allocate(std::size_t n);
  void deallocate(T* p, std::size_t) noexcept;
  template <class U>
  bool operator==(const FftwAllocator<U>&) const noexcept { return true; }
};

void* fftw_aligned_alloc(std::size_t bytes);
void fftw_aligned_free(void* p) noexcept;

template <class T>
T* FftwAllocator<T>::allocate(std::size_t n) {
  return static_cast<T*>(fftw_aligned_alloc(n * sizeof(T)));
}

template <class T>
void FftwAllocator<T>::deallocate(T* p, std::size_t) noexcept {
  fftw_aligned_free(p);
}

using FieldStorage = std::vector<Complex, FftwAllocator<Complex>>;

enum class Space { physical, frequency };

/// Complex lattice function tagged with the space it lives in.
///
/// Frequency coefficients follow the Fourier-series convention
///   u_hat(xi) = sum_x u(x) e^{-i xi.x} dV,   u(x) = (1/V) sum_xi u_hat(xi) e^{i xi.x}
/// so that sum |u|^2 dV = (1/V) sum |u_hat|^2.
class SpectralField {
 public:
  SpectralField() = default;
  SpectralField(Grid grid, Space space);
  SpectralField(Grid grid, Space space, std::span<const Complex> values);

  static SpectralField zeros(const Grid& grid, Space space = Space::physical) {
    return SpectralField(grid, space);
  }
  static SpectralField constant(const Grid& grid, Complex c);

  const Grid& grid() const { return grid_; }
  Space space() const { return space_; }
  bool is_physical() const { return space_ == Space::physical; }
  std::size_t size() const { return values_.size(); }

  std::span<Complex> values() { return values_; }
  std::span<const Complex> values() const { return values_; }
  Complex* data() { return values_.data(); }
  const Complex* data() const { return values_.data(); }
  Complex& operator[](std::size_t i) { return values_[i]; }
  const Complex& operator[](std::size_t i) const { return values_[i]; }

  /// Retags without touching values. Used by transforms.
  void set_space(Space s) { space_ = s; }

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator-=(const SpectralField& other);
  SpectralField& operator*=(Complex c);

 private:
  Grid grid_;
  Space space_ = Space::physical;
  FieldStorage values_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(Complex c, SpectralField a);

/// Throws std::invalid_argument unless both fields share grid and space.
void require_compatible(const SpectralField& a, const SpectralField& b);
void require_space(const SpectralField& f, Space expected, const char* what);

/// Largest absolute difference between two compatible fields.
double max_abs_difference(const SpectralField& a, const SpectralField& b);

}  // namespace fnls
