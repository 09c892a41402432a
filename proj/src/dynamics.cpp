#include "fnls/dynamics.hpp"

#include <cmath>
#include <map>

namespace fnls {

SpectralField nonlinearity(const SpectralField& field, double sigma) {
  require_space(field, Space::physical, "nonlinearity");
  SpectralField out(field.grid(), Space::physical);
  for (std::size_t i = 0; i < field.size(); ++i) {
    const Complex u = field[i];
    const double a2 = std::norm(u);
    out[i] = a2 == 0.0 ? Complex{0.0, 0.0} : std::pow(a2, sigma) * u;
  }
  return out;
}

double TemporalEnvelope::value(double t) const {
  switch (kind) {
    case Kind::constant: return 1.0;
    case Kind::exponential: return std::exp(rate * t);
    case Kind::window: return (t >= start && t < end) ? 1.0 : 0.0;
  }
  return 1.0;
}

const char* to_string(ForcingFamily f) {
  switch (f) {
    case ForcingFamily::zero: return "zero";
    case ForcingFamily::linear_phase: return "linear_phase";
    case ForcingFamily::additive: return "additive";
    case ForcingFamily::combined: return "combined";
  }
  return "?";
}

ForcingFamily parse_forcing_family(const std::string& name) {
  static const std::map<std::string, ForcingFamily> names{
      {"zero", ForcingFamily::zero},
      {"linear_phase", ForcingFamily::linear_phase},
      {"additive", ForcingFamily::additive},
      {"combined", ForcingFamily::combined}};
  auto it = names.find(name);
  if (it == names.end()) throw std::invalid_argument("unknown forcing family '" + name + "'");
  return it->second;
}

namespace {

void require_size(std::size_t got, const Grid& grid, const char* what) {
  if (got != grid.size())
    throw std::invalid_argument(std::string(what) + " profile size does not match grid");
}

}  // namespace

ForcingSpec ForcingSpec::zero(const Grid& grid, double beta) {
  if (!(beta >= 0.0)) throw std::invalid_argument("forcing beta must be >= 0");
  return ForcingSpec(grid, ForcingFamily::zero, beta);
}

ForcingSpec ForcingSpec::linear_phase(const Grid& grid, double beta,
                                      std::vector<double> c_profile) {
  if (!(beta >= 0.0)) throw std::invalid_argument("forcing beta must be >= 0");
  require_size(c_profile.size(), grid, "linear_phase c");
  for (double c : c_profile)
    if (!(c >= 0.0 && c <= beta))
      throw std::invalid_argument("linear_phase profile must satisfy 0 <= c(x) <= beta");
  ForcingSpec f(grid, ForcingFamily::linear_phase, beta);
  f.c_ = std::move(c_profile);
  return f;
}

ForcingSpec ForcingSpec::additive(const Grid& grid, double beta,
                                  std::vector<Complex> g_profile,
                                  TemporalEnvelope envelope) {
  if (!(beta > 0.0)) throw std::invalid_argument("additive forcing needs beta > 0");
  require_size(g_profile.size(), grid, "additive g");
  ForcingSpec f(grid, ForcingFamily::additive, beta);
  f.g_ = std::move(g_profile);
  f.envelope_ = envelope;
  return f;
}

ForcingSpec ForcingSpec::combined(const Grid& grid, double beta,
                                  std::vector<double> c_profile,
                                  std::vector<Complex> g_profile,
                                  TemporalEnvelope envelope) {
  if (!(beta > 0.0)) throw std::invalid_argument("combined forcing needs beta > 0");
  require_size(c_profile.size(), grid, "combined c");
  require_size(g_profile.size(), grid, "combined g");
  for (double c : c_profile)
    if (!(c >= 0.0 && c < beta))
      throw std::invalid_argument("combined profile must satisfy 0 <= c(x) < beta");
  ForcingSpec f(grid, ForcingFamily::combined, beta);
  f.c_ = std::move(c_profile);
  f.g_ = std::move(g_profile);
  f.envelope_ = envelope;
  return f;
}

bool ForcingSpec::autonomous() const {
  return g_.empty() || envelope_.kind == TemporalEnvelope::Kind::constant;
}

double ForcingSpec::psi1(double t, std::size_t i) const {
  if (g_.empty()) return 0.0;
  const double slack = beta_ - (c_.empty() ? 0.0 : c_[i]);
  return std::norm(envelope_.value(t) * g_[i]) / (4.0 * slack);
}

double ForcingSpec::psi1_l1(double t) const {
  if (g_.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < g_.size(); ++i) s += psi1(t, i);
  return s * grid_.cell_volume();
}

double ForcingSpec::psi1_l1_profile() const {
  if (g_.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < g_.size(); ++i) {
    const double slack = beta_ - (c_.empty() ? 0.0 : c_[i]);
    s += std::norm(g_[i]) / (4.0 * slack);
  }
  return s * grid_.cell_volume();
}

SpectralField forcing_eval(const ForcingSpec& spec, double t,
                           const SpectralField& field) {
  require_space(field, Space::physical, "forcing_eval");
  SpectralField out(field.grid(), Space::physical);
  if (spec.family() == ForcingFamily::zero) return out;
  if (!(spec.grid() == field.grid()))
    throw std::invalid_argument("forcing profile and field use different grids");
  for (std::size_t i = 0; i < field.size(); ++i) out[i] = spec.value(t, i, field[i]);
  return out;
}

double AdmissiblePair::scaling_residual(int n, double alpha) const {
  const double time_part = r_is_infinite() ? 0.0 : 2.0 * alpha / r;
  return time_part + n / p - 0.5 * n;
}

double alpha_lower_bound(int n) { return static_cast<double>(n) / (2.0 * n - 1.0); }

double sigma_upper_bound(int n, double alpha) {
  const double denom = n - 2.0 * alpha;
  return denom > 0.0 ? 2.0 * alpha / denom : std::numeric_limits<double>::infinity();
}

AdmissiblePair admissible_pair(int n, double alpha, double sigma) {
  if (n < 2)
    throw RegimeError("n >= 2", "dimension n = " + std::to_string(n) +
                                    " violates n >= 2");
  const double lo = alpha_lower_bound(n);
  if (!(alpha >= lo && alpha < 1.0))
    throw RegimeError("alpha >= n/(2n-1)",
                      "alpha = " + std::to_string(alpha) + " violates " +
                          std::to_string(lo) + " <= alpha < 1");
  const double hi = sigma_upper_bound(n, alpha);
  if (!(sigma >= 0.0 && sigma < hi))
    throw RegimeError("sigma < 2alpha/(n-2alpha)",
                      "sigma = " + std::to_string(sigma) + " violates 0 <= sigma < " +
                          std::to_string(hi));
  AdmissiblePair pair;
  pair.p = 2.0 * sigma + 2.0;
  pair.r = sigma == 0.0 ? std::numeric_limits<double>::infinity()
                        : 4.0 * (sigma + 1.0) * alpha / (n * sigma);
  const double excluded_p = (4.0 * n - 2.0) / (2.0 * n - 3.0);
  pair.endpoint = pair.r == 2.0 && pair.p == excluded_p;
  return pair;
}

std::vector<std::string> RegimeReport::violations() const {
  std::vector<std::string> out;
  if (!dimension_ok) out.push_back("n >= 2");
  if (!alpha_ok)
    out.push_back("alpha >= n/(2n-1) = " + std::to_string(alpha_lower_bound(n)) +
                  " and alpha < 1");
  if (!sigma_ok)
    out.push_back("0 <= sigma < 2alpha/(n-2alpha) = " +
                  std::to_string(sigma_upper_bound(n, alpha)));
  if (!damping_ok) out.push_back("gamma > beta");
  return out;
}

RegimeReport validate_regime(int n, double alpha, double sigma, double gamma,
                             double beta) {
  RegimeReport r;
  r.n = n;
  r.alpha = alpha;
  r.sigma = sigma;
  r.gamma = gamma;
  r.beta = beta;
  r.dimension_ok = n >= 2;
  r.alpha_ok = n >= 1 && alpha >= alpha_lower_bound(n) && alpha < 1.0;
  r.sigma_ok = sigma >= 0.0 && sigma < sigma_upper_bound(n, alpha);
  r.damping_ok = gamma > beta;
  return r;
}

void ModelParams::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("model.alpha must lie in (0, 1)");
  if (!(sigma >= 0.0)) throw std::invalid_argument("model.sigma must be >= 0");
  if (!(gamma >= 0.0)) throw std::invalid_argument("model.gamma must be >= 0");
  if (forcing.grid().dim() != 0 && forcing.grid().dim() != n)
    throw std::invalid_argument("forcing grid dimension differs from model.n");
}

double radiality_deviation(const SpectralField& field) {
  require_space(field, Space::physical, "radiality_deviation");
  const Grid& g = field.grid();
  const double h = g.spacing();
  const double centre = 0.5 * g.length();
  // Shells are the exact lattice distances |x - centre|^2 / h^2.
  std::vector<std::size_t> shell(field.size());
  std::map<long long, std::size_t> ids;
  for (std::size_t i = 0; i < field.size(); ++i) {
    double r2 = 0.0;
    for (int d = 0; d < g.dim(); ++d) {
      const double x = (g.coordinate(i, d) - centre) / h;
      r2 += x * x;
    }
    const auto key = std::llround(4.0 * r2);
    shell[i] = ids.emplace(key, ids.size()).first->second;
  }
  const std::size_t shells = ids.size();
  std::vector<Complex> sum(shells, Complex{0.0, 0.0});
  std::vector<double> count(shells, 0.0);
  for (std::size_t i = 0; i < field.size(); ++i) {
    sum[shell[i]] += field[i];
    count[shell[i]] += 1.0;
  }
  double dev = 0.0, total = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) {
    const Complex avg = sum[shell[i]] / count[shell[i]];
    dev += std::norm(field[i] - avg);
    total += std::norm(field[i]);
  }
  return total > 0.0 ? std::sqrt(dev / total) : 0.0;
}

}  // namespace fnls
