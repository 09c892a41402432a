#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fnls/spectral_field.hpp"

namespace fnls {

/// |u|^{2 sigma} u pointwise (0 maps to 0). Input must be physical.
SpectralField nonlinearity(const SpectralField& field, double sigma);

/// Time factor multiplying the additive profile g0(x).
struct TemporalEnvelope {
  enum class Kind { constant, exponential, window };
  Kind kind = Kind::constant;
  double rate = 0.0;   // exponential: e^{rate t}
  double start = 0.0;  // window: 1 on [start, end), 0 elsewhere
  double end = 0.0;

  double value(double t) const;
  static TemporalEnvelope constant() { return {}; }
  static TemporalEnvelope exponential(double rate) {
    return {Kind::exponential, rate, 0.0, 0.0};
  }
  static TemporalEnvelope window(double start, double end) {
    return {Kind::window, 0.0, start, end};
  }
};

enum class ForcingFamily { zero, linear_phase, additive, combined };

const char* to_string(ForcingFamily f);
ForcingFamily parse_forcing_family(const std::string& name);

/// Forcing f(t, x, u) drawn from one of the built-in families, each with
/// bound functions psi_1..psi_4 known in closed form:
///
///   zero          f = 0
///   linear_phase  f = i c(x) u,          0 <= c <= beta
///   additive      f = e(t) g0(x),        beta > 0
///   combined      f = i c(x) u + e(t) g0(x),  0 <= c < beta
///
/// For the additive part, Im(g conj(u)) <= |g||u| <= (beta - c)|u|^2 +
/// |g|^2 / (4 (beta - c)), which fixes psi_1.
class ForcingSpec {
 public:
  ForcingSpec() = default;
  static ForcingSpec zero(const Grid& grid, double beta = 0.0);
  static ForcingSpec linear_phase(const Grid& grid, double beta,
                                  std::vector<double> c_profile);
  static ForcingSpec linear_phase(const Grid& grid, double beta) {
    return linear_phase(grid, beta, std::vector<double>(grid.size(), beta));
  }
  static ForcingSpec additive(const Grid& grid, double beta,
                              std::vector<Complex> g_profile,
                              TemporalEnvelope envelope = {});
  static ForcingSpec combined(const Grid& grid, double beta,
                              std::vector<double> c_profile,
                              std::vector<Complex> g_profile,
                              TemporalEnvelope envelope = {});

  ForcingFamily family() const { return family_; }
  double beta() const { return beta_; }
  const Grid& grid() const { return grid_; }
  std::size_t size() const { return grid_.size(); }
  const std::vector<double>& c_profile() const { return c_; }
  const std::vector<Complex>& g_profile() const { return g_; }
  const TemporalEnvelope& envelope() const { return envelope_; }

  /// True when f does not depend on t.
  bool autonomous() const;
  bool has_linear_part() const { return !c_.empty(); }
  bool has_additive_part() const { return !g_.empty(); }

  Complex value(double t, std::size_t i, Complex u) const {
    Complex f{0.0, 0.0};
    if (!c_.empty()) f += Complex(0.0, c_[i]) * u;
    if (!g_.empty()) f += envelope_.value(t) * g_[i];
    return f;
  }

  double psi1(double t, std::size_t i) const;
  double psi2(std::size_t i) const { return c_.empty() ? 0.0 : c_[i]; }
  double psi3(double t, std::size_t i) const {
    return g_.empty() ? 0.0 : std::abs(envelope_.value(t) * g_[i]);
  }
  double psi4(std::size_t i) const { return c_.empty() ? 0.0 : c_[i]; }

  /// ||psi_1(t)||_{L^1} on the grid.
  double psi1_l1(double t) const;
  /// ||psi_1(t)||_{L^1} / e(t)^2, the time-independent factor of psi_1.
  double psi1_l1_profile() const;

 private:
  ForcingSpec(Grid grid, ForcingFamily family, double beta)
      : grid_(grid), family_(family), beta_(beta) {}
  Grid grid_;
  ForcingFamily family_ = ForcingFamily::zero;
  double beta_ = 0.0;
  std::vector<double> c_;
  std::vector<Complex> g_;
  TemporalEnvelope envelope_;
};

/// f(t, ., u(.)) for physical-space u.
SpectralField forcing_eval(const ForcingSpec& spec, double t,
                           const SpectralField& field);

/// Anything that exposes f pointwise together with its declared bounds.
template <class F>
concept PointwiseForcing = requires(const F& f, double t, std::size_t i, Complex u) {
  { f.value(t, i, u) } -> std::convertible_to<Complex>;
  { f.beta() } -> std::convertible_to<double>;
  { f.psi1(t, i) } -> std::convertible_to<double>;
  { f.psi2(i) } -> std::convertible_to<double>;
  { f.psi3(t, i) } -> std::convertible_to<double>;
  { f.psi4(i) } -> std::convertible_to<double>;
};

/// Worst pointwise violation (lhs - rhs) of each structural bound:
///   growth     Im(f conj u) <= beta |u|^2 + psi1
///   bound      |f| <= psi2 |u| + psi3
///   lipschitz  |f(u) - f(v)| <= psi4 |u - v|
struct AssumptionReport {
  double growth_violation = -std::numeric_limits<double>::infinity();
  double bound_violation = -std::numeric_limits<double>::infinity();
  double lipschitz_violation = -std::numeric_limits<double>::infinity();
  std::size_t points_checked = 0;
  static constexpr double kTolerance = 1e-12;
  bool passes() const {
    return growth_violation <= kTolerance && bound_violation <= kTolerance &&
           lipschitz_violation <= kTolerance;
  }
};

/// Checks every probe at every lattice point and time; the Lipschitz bound is
/// tested on consecutive probe pairs and on each probe against zero.
template <PointwiseForcing F>
AssumptionReport check_assumptions(const F& f, std::span<const SpectralField> probes,
                                   std::span<const double> times) {
  if (probes.empty()) throw std::invalid_argument("check_assumptions needs probes");
  static constexpr double kZeroTime[] = {0.0};
  if (times.empty()) times = kZeroTime;
  AssumptionReport rep;
  const double beta = f.beta();
  for (double t : times) {
    for (std::size_t p = 0; p < probes.size(); ++p) {
      const SpectralField& u = probes[p];
      require_space(u, Space::physical, "check_assumptions");
      const SpectralField* v = p + 1 < probes.size() ? &probes[p + 1] : nullptr;
      for (std::size_t i = 0; i < u.size(); ++i) {
        const Complex ui = u[i];
        const Complex fu = f.value(t, i, ui);
        const double au = std::abs(ui);
        rep.growth_violation = std::max(
            rep.growth_violation, (fu * std::conj(ui)).imag() - beta * au * au - f.psi1(t, i));
        rep.bound_violation =
            std::max(rep.bound_violation, std::abs(fu) - f.psi2(i) * au - f.psi3(t, i));
        const Complex f0 = f.value(t, i, Complex{0.0, 0.0});
        rep.lipschitz_violation =
            std::max(rep.lipschitz_violation, std::abs(fu - f0) - f.psi4(i) * au);
        if (v != nullptr) {
          const Complex vi = (*v)[i];
          rep.lipschitz_violation =
              std::max(rep.lipschitz_violation,
                       std::abs(fu - f.value(t, i, vi)) - f.psi4(i) * std::abs(ui - vi));
        }
        ++rep.points_checked;
      }
    }
  }
  return rep;
}

inline AssumptionReport check_assumptions(const ForcingSpec& f,
                                          std::span<const SpectralField> probes) {
  return check_assumptions(f, probes, std::span<const double>{});
}

/// Thrown when (n, alpha, sigma) leave the range where the Strichartz pair
/// is defined. `constraint()` names the violated inequality.
class RegimeError : public std::domain_error {
 public:
  RegimeError(std::string constraint, const std::string& what)
      : std::domain_error(what), constraint_(std::move(constraint)) {}
  const std::string& constraint() const { return constraint_; }

 private:
  std::string constraint_;
};

/// Space-time exponents (r, p) = (4 (sigma+1) alpha / (n sigma), 2 sigma + 2).
/// r = +infinity encodes the sigma = 0 endpoint.
struct AdmissiblePair {
  double r = 0.0;
  double p = 0.0;
  bool endpoint = false;  // (r, p) == (2, (4n-2)/(2n-3)), excluded

  bool r_is_infinite() const { return std::isinf(r); }
  /// 2 alpha / r + n / p - n / 2.
  double scaling_residual(int n, double alpha) const;
};

AdmissiblePair admissible_pair(int n, double alpha, double sigma);

/// Lower bound n / (2n - 1) on alpha.
double alpha_lower_bound(int n);
/// Upper bound 2 alpha / (n - 2 alpha) on sigma (infinite when n <= 2 alpha).
double sigma_upper_bound(int n, double alpha);

struct RegimeReport {
  int n = 0;
  double alpha = 0.0, sigma = 0.0, gamma = 0.0, beta = 0.0;
  bool dimension_ok = false;  // n >= 2
  bool alpha_ok = false;      // alpha in [n/(2n-1), 1)
  bool sigma_ok = false;      // 0 <= sigma < 2 alpha / (n - 2 alpha)
  bool damping_ok = false;    // gamma > beta

  bool well_posed() const { return dimension_ok && alpha_ok && sigma_ok; }
  /// Moment bounds and absorption need gamma > beta.
  bool moment_diagnostics_enabled() const { return damping_ok; }
  bool all_ok() const { return well_posed() && damping_ok; }
  std::vector<std::string> violations() const;
};

RegimeReport validate_regime(int n, double alpha, double sigma, double gamma,
                             double beta);

/// Coefficients of the damped equation.
struct ModelParams {
  int n = 2;
  double alpha = 0.75;
  double sigma = 1.0;
  double gamma = 1.0;
  ForcingSpec forcing;

  /// Throws std::invalid_argument unless alpha in (0,1), sigma >= 0,
  /// gamma >= 0 and the forcing grid dimension matches n.
  void validate() const;
  RegimeReport regime() const {
    return validate_regime(n, alpha, sigma, gamma, forcing.beta());
  }
};

/// Relative L^2 distance between u and its average over radial shells
/// centred in the box. Zero for exactly radial lattice data.
double radiality_deviation(const SpectralField& field);

}  // namespace fnls
