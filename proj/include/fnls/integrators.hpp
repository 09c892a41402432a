#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fnls/dynamics.hpp"
#include "fnls/fft.hpp"
#include "fnls/noise.hpp"
#include "fnls/operators.hpp"

namespace fnls {

enum class SchemeId { exp_euler, strang };

const char* to_string(SchemeId s);
SchemeId parse_scheme(const std::string& name);

/// Stops a run once the discrete mass exceeds a threshold or turns
/// non-finite. A negative threshold means 1e6 * max(initial mass, 1).
struct BlowupGuard {
  double mass_threshold = -1.0;
  /// Consecutive mass increases tolerated before the trajectory is flagged
  /// (0 disables the flag). Never stops the run.
  int consecutive_growth_limit = 0;

  double resolve_threshold(double initial_mass) const;
};

/// Left-endpoint quantities of one step, everything the mass ledger needs.
/// Inner products are (a, b) = sum a conj(b) dV.
struct StepRecord {
  double t = 0.0;
  double dt = 0.0;
  double mass = 0.0;         // ||u_k||^2
  double im_u_f = 0.0;       // Im(u_k, f(t_k, u_k))
  double im_u_dw = 0.0;      // Im(u_k, Delta W_k)
  double noise_qv = 0.0;     // sum_j [Im(u_k, Phi e_j)]^2
  double im_u_nonlin = 0.0;  // Im(u_k, |u_k|^{2 sigma} u_k)
  double dw_norm_sq = 0.0;   // ||Delta W_k||^2
  std::vector<double> coefficients;  // phi_j Delta beta_j, when kept
};

struct Trajectory;

/// Raised when the guard fires. Mirrors the stopping-time alternative: the
/// reported time is the first step end at which the mass left the bound.
class BlowupDetected : public std::runtime_error {
 public:
  BlowupDetected(double stopping_time, double mass);
  double stopping_time() const { return stopping_time_; }
  double mass() const { return mass_; }
  /// Trajectory up to the last finite step, attached by run_path.
  std::shared_ptr<const Trajectory> partial;

 private:
  double stopping_time_;
  double mass_;
};

struct StepOptions {
  /// Number of fine Brownian sub-increments summed into each step. Lets a
  /// coarse run reuse the exact Brownian path of a finer one.
  int noise_substeps = 1;
  bool keep_coefficients = false;
  bool record_log = true;
  double mass_threshold = std::numeric_limits<double>::infinity();
};

/// Mutable integration state of one path. The solution is held as
/// frequency-space coefficients; `physical()` gives u(t) on the lattice.
class StepState {
 public:
  StepState(const SpectralField& u0, double t0, NoiseStream stream, SchemeId scheme);

  double t = 0.0;
  SpectralField u;  // frequency space
  NoiseStream stream;
  std::vector<StepRecord> recorded_increments;
  SchemeId scheme;
  std::size_t steps = 0;
  double last_mass = 0.0;  // mass after the latest step

  SpectralField physical() const { return inverse_transform(u); }
  double current_mass() const { return mass(u); }

  struct Workspace;
  std::shared_ptr<Workspace> workspace;
};

void step_exp_euler(StepState& state, double dt, const ModelParams& params,
                    const MultiplierCache& cache, const StepOptions& opts = {});
void step_strang(StepState& state, double dt, const ModelParams& params,
                 const MultiplierCache& cache, const StepOptions& opts = {});
void step(StepState& state, double dt, const ModelParams& params,
          const MultiplierCache& cache, const StepOptions& opts = {});

/// Largest dt with dt * max retained |xi|^{2 alpha} <= pi / 4.
double default_time_step(const MultiplierCache& cache);

struct SnapshotSchedule {
  enum class Kind { none, uniform, geometric };
  Kind kind = Kind::uniform;
  int count = 10;
  /// Step indices (0..n_steps) at which snapshots are taken; always contains
  /// the first and last step unless kind is none.
  std::vector<std::size_t> step_indices(std::size_t n_steps) const;
  static SnapshotSchedule parse(const std::string& text);
  std::string to_string() const;
};

struct Snapshot {
  double t = 0.0;
  SpectralField u;  // physical
};

struct Trajectory {
  Grid grid;
  SchemeId scheme = SchemeId::exp_euler;
  std::uint64_t seed = 0;
  std::uint64_t path_index = 0;
  double t0 = 0.0;
  double dt = 0.0;
  double gamma = 0.0;
  double sigma = 0.0;
  double hs_norm_squared = 0.0;
  std::size_t steps = 0;           // completed steps
  std::vector<double> times;       // t0 + k dt, k = 0..steps
  std::vector<double> mass;        // ||u(t_k)||^2, every step
  std::vector<StepRecord> increments;  // one per completed step when logged
  std::vector<Snapshot> snapshots;
  bool has_increment_log = false;
  int max_growth_streak = 0;
  bool growth_flag = false;
  std::optional<double> stopping_time;  // set when the guard fired
};

struct RunOptions {
  SnapshotSchedule snapshots;
  BlowupGuard guard;
  int noise_substeps = 1;
  bool keep_coefficients = false;
  bool record_log = true;
  /// Counter of the first noise draw; lets pullback runs starting later on
  /// a common time axis reuse the same Brownian path.
  std::uint64_t counter_offset = 0;
};

/// Integrates from t0 to t1 with fixed dt. Deterministic in (seed,
/// path_index). Throws BlowupDetected (with the partial trajectory) when
/// the guard fires, std::invalid_argument when dt does not divide t1 - t0.
Trajectory run_path(const SpectralField& u0, double t0, double t1, double dt,
                    const ModelParams& params, const MultiplierCache& cache,
                    std::shared_ptr<const CovarianceSpec> cov, SchemeId scheme,
                    std::uint64_t seed, std::uint64_t path_index,
                    const RunOptions& options = {});

/// Number of steps of size dt in [t0, t1]; throws if dt does not divide it.
std::size_t step_count(double t0, double t1, double dt);

}  // namespace fnls
