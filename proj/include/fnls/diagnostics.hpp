#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fnls/dynamics.hpp"
#include "fnls/integrators.hpp"
#include "fnls/noise.hpp"

namespace fnls {

/// Terms of the Ito balance for ||u||^{2m}, accumulated with left-point
/// quadrature over the trajectory's own increment log. Entry k of each
/// series is the cumulative value at times[k].
///
///   d||u||^{2m} = m M^{m-1} [ -2 gamma M - 2 Im(u,f) + ||Phi||^2 ] dt
///                 - 2 m M^{m-1} Im(u, dW)
///                 + 2 m (m-1) M^{m-2} sum_j [Im(u, Phi e_j)]^2 dt
struct MassLedger {
  int m = 1;
  std::vector<double> times;
  std::vector<double> lhs;             // ||u(t)||^{2m}
  std::vector<double> damping;         // -2 gamma m int M^m
  std::vector<double> forcing;         // -2 m int M^{m-1} Im(u, f)
  std::vector<double> martingale;      // -2 m sum M^{m-1} Im(u, dW)
  std::vector<double> ito_correction;  // m ||Phi||^2 int M^{m-1}
  std::vector<double> quadratic_term;  // 2 m (m-1) int M^{m-2} sum_j [Im(u, Phi e_j)]^2
  std::vector<double> nonlinear;       // 2 m int M^{m-1} Im(u, |u|^{2s} u), not in the balance
  std::vector<double> residual;        // lhs - (lhs[0] + all balance terms)
  double max_abs_residual = 0.0;
  /// max |residual| / max(1, ||u0||^{2m}).
  double relative_residual = 0.0;
  /// Same normalization applied to the injected nonlinear contribution.
  double relative_nonlinear = 0.0;
};

/// Throws std::invalid_argument for m < 1 or a trajectory without a
/// complete increment log.
MassLedger ito_mass_residual(const Trajectory& traj, int m = 1);

/// sum_j [Im(u, Phi e_j)]^2 evaluated with lattice basis functions and the
/// physical-space inner product (independent of the frequency projections
/// used during stepping).
double quadratic_variation_direct(const SpectralField& u, const CovarianceSpec& cov);

/// Per-time mean, variance and 3-standard-error band over paths.
struct EnsembleStats {
  std::size_t n_paths = 0;
  std::vector<double> mean;
  std::vector<double> variance;  // unbiased; zero when n_paths == 1
  std::vector<double> standard_error;
  bool bands_enabled = false;    // false for a single path

  double lower(std::size_t k) const { return mean[k] - 3.0 * standard_error[k]; }
  double upper(std::size_t k) const { return mean[k] + 3.0 * standard_error[k]; }
};

/// series[path][k]; every path must have the same length.
EnsembleStats ensemble_stats(const std::vector<std::vector<double>>& series);

/// Per-path scalar series on a common time axis, ordered by path index.
struct MassEnsemble {
  std::vector<double> times;
  double dt = 0.0;
  std::vector<std::uint64_t> path_index;
  std::vector<std::vector<double>> mass;
  /// Per-step left-point ledger terms (empty unless logged).
  std::vector<std::vector<double>> im_u_f;
  std::vector<std::vector<double>> im_u_dw;

  std::size_t paths() const { return mass.size(); }
  bool has_ledger() const { return !im_u_f.empty(); }
  /// Appends one trajectory; times must match the first one added.
  void add(const Trajectory& traj);
  /// Sorts paths by index so reductions are order independent.
  void sort_by_path();
};

struct ExpectedMassReport {
  bool closed_form = false;  // f = 0: exact law available
  std::size_t paths = 0;
  std::vector<double> times;
  std::vector<double> mean;
  std::vector<double> standard_error;
  std::vector<double> reference;  // closed form, or ODE prediction from ensemble means
  std::vector<double> z;          // (mean - reference) / SE, 0 where SE = 0 and equal
  double max_abs_deviation = 0.0;
  double max_abs_z = 0.0;
  double stationary_level = 0.0;  // ||Phi||^2 / (2 gamma)
  /// Nonlinear case: mean of the discrete martingale sum and its SE at the
  /// final time.
  double martingale_mean = 0.0;
  double martingale_se = 0.0;
  bool pass = false;
};

/// E||u(t)||^2 = e^{-2 gamma t} E||u0||^2 + ||Phi||^2 (1 - e^{-2 gamma t}) / (2 gamma).
double expected_mass_closed_form(double t, double m0, double gamma, double hs2);

/// Compares the ensemble mean mass with the exact law (f = 0) or with the
/// ODE d/dt E||u||^2 = -2 gamma E||u||^2 - 2 E Im(u,f) + ||Phi||^2 driven by
/// ensemble means. `stride` thins the output times. Needs >= 100 paths.
ExpectedMassReport expected_mass_check(const MassEnsemble& ens, const ModelParams& params,
                                       double hs2, std::size_t stride = 1);

/// Time profile of ||psi_1(s)||_{L^1}.
struct Psi1Schedule {
  enum class Kind { zero, constant, exponential, window, custom };
  Kind kind = Kind::zero;
  double level = 0.0;  // constant value, or the factor h of h e^{rate s}
  double rate = 0.0;
  double start = 0.0, end = 0.0;
  std::function<double(double)> norm;  // custom

  double at(double s) const;
  static Psi1Schedule zero() { return {}; }
  static Psi1Schedule constant(double level);
  static Psi1Schedule exponential(double level, double rate);
  static Psi1Schedule window(double level, double start, double end);
  static Psi1Schedule custom(std::function<double(double)> norm);
  /// Schedule implied by a built-in forcing family; an envelope e^{lambda t}
  /// becomes rate 2 lambda because psi_1 is quadratic in g.
  static Psi1Schedule from_forcing(const ForcingSpec& f);
};

class DivergentIntegral : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// int_a^b e^{-kappa (b - s)} ||psi_1(s)||^power ds; a may be -infinity.
/// Closed form for the built-in kinds, adaptive Gauss-Kronrod otherwise.
double discounted_psi1_integral(const Psi1Schedule& psi, double kappa, double power,
                                double a, double b);

/// Constants of the moment estimate, with ((m-1)/m)^{m-1} = 1 at m = 1:
///   C1(m) = 2^{m-1} ((m-1)/m)^{m-1} (2m-1)^m / m
///   C2(m) = 4^m 2^{m-1} ((m-1)/m)^{m-1} / m
double moment_constant_c1(double m);
double moment_constant_c2(double m);

/// Bound on E||u(varrho, varrho - t, u0)||^{2m}:
///   e^{-k t} E||u0||^{2m} + C1 ||Phi||^{2m} (gamma-beta)^{-m} (1 - e^{-k t})
///   + C2 (gamma-beta)^{1-m} int_{varrho-t}^{varrho} e^{-k (varrho-s)} ||psi_1||^m ds,
/// k = (gamma - beta) m. Throws RegimeError unless gamma > beta.
double moment_bound(const ModelParams& params, double hs2, double m, double t,
                    double varrho, double initial_moment, const Psi1Schedule& psi);

struct MomentBoundReport {
  int m = 1;
  std::vector<double> times;
  std::vector<double> mean;  // E||u||^{2m}
  std::vector<double> standard_error;
  std::vector<double> bound;
  std::vector<double> margin;  // bound - mean
  std::vector<bool> within;    // mean <= bound + 3 SE
  double min_margin_in_se = std::numeric_limits<double>::infinity();
  double decay_exponent = 0.0;    // fitted rate of E||u||^{2m} toward its plateau
  double reference_exponent = 0.0;  // (gamma - beta) m
  bool pass = false;
};

/// A forward ensemble started at tau_0 is read in pullback form: the value
/// at tau_k is u(varrho, varrho - t, u0) with varrho = tau_k, t = tau_k - tau_0.
/// Throws RegimeError unless gamma > beta.
MomentBoundReport moment_bound_check(const MassEnsemble& ens, int m,
                                     const ModelParams& params, double hs2,
                                     const Psi1Schedule& psi, std::size_t stride = 1);

/// Least-squares slope of -log(values) against times over positive entries.
double fit_decay_exponent(const std::vector<double>& times,
                          const std::vector<double>& values);

/// Decay rate of E M_a(t) - E M_b(t) over entries where the gap exceeds
/// `floor` (absolute).
double gap_decay_exponent(const std::vector<double>& times, const std::vector<double>& mean_a,
                          const std::vector<double>& mean_b, double floor);

/// ||u||_{L^r(t0,t1; L^p)} from snapshots: L^p norm per snapshot, then
/// trapezoid of the r-th power in time. r = infinity takes the sup.
/// Throws std::invalid_argument for fewer than 8 snapshots.
double strichartz_norm(const std::vector<Snapshot>& snapshots, double r, double p);
double strichartz_norm(const Trajectory& traj, double r, double p);

/// R(varrho) = E||u0||^rho + C1(rho/2) ||Phi||^rho (gamma-beta)^{-rho/2}
///   + C2(rho/2) (gamma-beta)^{1-rho/2} int_{-inf}^{varrho} e^{-(gamma-beta)(rho/2)(varrho-s)} ||psi_1(s)||^{rho/2} ds.
/// Throws RegimeError unless gamma > beta, DivergentIntegral when the psi_1
/// integral does not converge.
double absorbing_radius(const ModelParams& params, double hs2, double rho, double varrho,
                        const Psi1Schedule& psi, double reference_moment = 0.0);

/// Initial data generator with declared bound E||u0||^2 <= level e^{-growth s}
/// at start time s. `sample` rescales the profile to that mass.
struct InitialFamily {
  std::string name;
  SpectralField profile;  // physical
  double level = 1.0;
  double growth = 0.0;

  double bound(double s) const { return level * std::exp(-growth * s); }
  SpectralField sample(double s) const;
};

struct AbsorbingProbe {
  double rho = 2.0;
  std::vector<double> varrho_grid{0.0};
  std::vector<double> t_grid;
  std::vector<InitialFamily> families;
  double reference_moment = 0.0;
  std::vector<double> R_values;                    // per varrho
  std::vector<std::optional<double>> entry_times;  // per (varrho, family), row major
};

struct ProbeSettings {
  double dt = 1e-2;
  SchemeId scheme = SchemeId::strang;
  std::size_t paths = 100;
  std::uint64_t seed = 0;
  std::shared_ptr<const CovarianceSpec> cov;
  Psi1Schedule psi;
  BlowupGuard guard;
  int threads = 1;
};

struct ProbeCell {
  double varrho = 0.0;
  std::string family;
  std::vector<double> mean;  // E||u(varrho)||^rho per horizon
  std::vector<double> standard_error;
  std::optional<double> entry_time;  // first t after which mean stays <= R
  bool monotone_after_entry = true;   // up to 3 combined SE
  bool blowup = false;
  bool forward_shortcut = false;
};

struct ProbeReport {
  std::vector<double> t_grid;
  std::vector<double> R_values;
  std::vector<ProbeCell> cells;
};

/// Simulates u(varrho, varrho - t, u0) for every varrho, family and t. With
/// autonomous forcing and a fixed family one forward run per path serves all
/// horizons; otherwise each horizon is integrated separately with the noise
/// counter aligned on absolute time. Fills probe.R_values and entry_times.
ProbeReport pullback_absorption_probe(AbsorbingProbe& probe, const ModelParams& params,
                                      const MultiplierCache& cache,
                                      const ProbeSettings& settings);

/// First grid time after which every value stays <= level.
std::optional<double> entry_time(const std::vector<double>& times,
                                 const std::vector<double>& values, double level);

}  // namespace fnls
