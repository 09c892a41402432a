#pragma once

#include <memory>

#include "fnls/spectral_field.hpp"

namespace fnls {

/// Pair of in-place FFTW plans (forward and backward) for one grid shape.
///
/// Plans are created once per (dim, N) and shared; executing them on
/// distinct arrays is safe from any thread.
class FftPlan {
 public:
  static std::shared_ptr<const FftPlan> for_grid(const Grid& grid);

  ~FftPlan();
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  /// Unnormalized transforms of an aligned, contiguous array of grid.size().
  void forward(Complex* data) const;
  void backward(Complex* data) const;

 private:
  explicit FftPlan(const Grid& grid);
  void* forward_ = nullptr;
  void* backward_ = nullptr;
};

/// Physical -> frequency, scaled by the cell volume. Throws on wrong tag.
SpectralField forward_transform(SpectralField field);
/// Frequency -> physical, scaled by 1/V. Throws on wrong tag.
SpectralField inverse_transform(SpectralField field);

void forward_in_place(SpectralField& field);
void inverse_in_place(SpectralField& field);

/// Copy in the requested space, transforming when needed.
SpectralField to_space(const SpectralField& field, Space space);

}  // namespace fnls
