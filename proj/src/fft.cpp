#include "fnls/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace fnls {

namespace {

// FFTW's planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

std::shared_ptr<const FftPlan> FftPlan::for_grid(const Grid& grid) {
  // Mutex first so it outlives the cache during static destruction.
  std::mutex& mutex = planner_mutex();
  static std::map<std::pair<int, int>, std::shared_ptr<const FftPlan>> cache;
  std::lock_guard lock(mutex);
  const auto key = std::make_pair(grid.dim(), grid.points());
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::shared_ptr<const FftPlan> plan(new FftPlan(grid));
  cache.emplace(key, plan);
  return plan;
}

FftPlan::FftPlan(const Grid& grid) {
  int dims[Grid::kMaxDim];
  for (int d = 0; d < grid.dim(); ++d) dims[d] = grid.points();
  FieldStorage scratch(grid.size());
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  forward_ = fftw_plan_dft(grid.dim(), dims, buf, buf, FFTW_FORWARD,
                           FFTW_MEASURE);
  backward_ = fftw_plan_dft(grid.dim(), dims, buf, buf, FFTW_BACKWARD,
                            FFTW_MEASURE);
}

FftPlan::~FftPlan() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_));
  fftw_destroy_plan(static_cast<fftw_plan>(backward_));
}

void FftPlan::forward(Complex* data) const {
  auto* buf = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(forward_), buf, buf);
}

void FftPlan::backward(Complex* data) const {
  auto* buf = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(backward_), buf, buf);
}

void forward_in_place(SpectralField& field) {
  require_space(field, Space::physical, "forward_transform");
  FftPlan::for_grid(field.grid())->forward(field.data());
  field *= field.grid().cell_volume();
  field.set_space(Space::frequency);
}

void inverse_in_place(SpectralField& field) {
  require_space(field, Space::frequency, "inverse_transform");
  FftPlan::for_grid(field.grid())->backward(field.data());
  field *= 1.0 / field.grid().box_volume();
  field.set_space(Space::physical);
}

SpectralField forward_transform(SpectralField field) {
  forward_in_place(field);
  return field;
}

SpectralField inverse_transform(SpectralField field) {
  inverse_in_place(field);
  return field;
}

SpectralField to_space(const SpectralField& field, Space space) {
  if (field.space() == space) return field;
  return space == Space::frequency ? forward_transform(field)
                                   : inverse_transform(field);
}

}  // namespace fnls
