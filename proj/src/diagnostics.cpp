#include "fnls/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fnls/operators.hpp"
#include "fnls/parallel.hpp"

namespace fnls {

MassLedger ito_mass_residual(const Trajectory& traj, int m) {
  if (m < 1) throw std::invalid_argument("ledger order m must be >= 1");
  if (!traj.has_increment_log || traj.increments.size() != traj.steps)
    throw std::invalid_argument("trajectory carries no complete increment log");
  MassLedger L;
  L.m = m;
  const std::size_t n = traj.steps;
  const double hs2 = traj.hs_norm_squared;
  const double gamma = traj.gamma;
  const double md = m;
  for (auto* v : {&L.lhs, &L.damping, &L.forcing, &L.martingale, &L.ito_correction,
                  &L.quadratic_term, &L.nonlinear, &L.residual})
    v->assign(n + 1, 0.0);
  L.times.assign(traj.times.begin(), traj.times.begin() + static_cast<long>(n) + 1);
  for (std::size_t k = 0; k <= n; ++k) L.lhs[k] = std::pow(traj.mass[k], md);

  double dmp = 0.0, frc = 0.0, mart = 0.0, ito = 0.0, quad = 0.0, nl = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const StepRecord& r = traj.increments[k];
    const double M = r.mass;
    const double dt = r.dt;
    const double Mm1 = std::pow(M, md - 1.0);
    const double Mm2 = m >= 2 ? std::pow(M, md - 2.0) : 0.0;
    dmp += -2.0 * gamma * md * Mm1 * M * dt;
    frc += -2.0 * md * Mm1 * r.im_u_f * dt;
    mart += -2.0 * md * Mm1 * r.im_u_dw;
    ito += md * Mm1 * hs2 * dt;
    quad += 2.0 * md * (md - 1.0) * Mm2 * r.noise_qv * dt;
    nl += 2.0 * md * Mm1 * r.im_u_nonlin * dt;
    L.damping[k + 1] = dmp;
    L.forcing[k + 1] = frc;
    L.martingale[k + 1] = mart;
    L.ito_correction[k + 1] = ito;
    L.quadratic_term[k + 1] = quad;
    L.nonlinear[k + 1] = nl;
    L.residual[k + 1] = L.lhs[k + 1] - (L.lhs[0] + dmp + frc + mart + ito + quad);
  }
  const double scale = std::max(1.0, L.lhs[0]);
  double max_nl = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    L.max_abs_residual = std::max(L.max_abs_residual, std::abs(L.residual[k]));
    max_nl = std::max(max_nl, std::abs(L.nonlinear[k]));
  }
  L.relative_residual = L.max_abs_residual / scale;
  L.relative_nonlinear = max_nl / scale;
  return L;
}

double quadratic_variation_direct(const SpectralField& u, const CovarianceSpec& cov) {
  require_space(u, Space::physical, "quadratic_variation_direct");
  double qv = 0.0;
  for (std::size_t j = 0; j < cov.mode_count(); ++j) {
    SpectralField e = basis_function(u.grid(), cov.modes()[j]);
    e *= cov.amplitudes()[j];
    const double im = inner_product(u, e).imag();
    qv += im * im;
  }
  return qv;
}

EnsembleStats ensemble_stats(const std::vector<std::vector<double>>& series) {
  EnsembleStats s;
  s.n_paths = series.size();
  if (series.empty()) return s;
  const std::size_t len = series.front().size();
  for (const auto& p : series)
    if (p.size() != len) throw std::invalid_argument("ensemble series differ in length");
  const double n = static_cast<double>(s.n_paths);
  s.mean.assign(len, 0.0);
  s.variance.assign(len, 0.0);
  s.standard_error.assign(len, 0.0);
  for (const auto& p : series)
    for (std::size_t k = 0; k < len; ++k) s.mean[k] += p[k];
  for (auto& v : s.mean) v /= n;
  s.bands_enabled = s.n_paths > 1;
  if (!s.bands_enabled) return s;
  for (const auto& p : series)
    for (std::size_t k = 0; k < len; ++k) {
      const double d = p[k] - s.mean[k];
      s.variance[k] += d * d;
    }
  for (std::size_t k = 0; k < len; ++k) {
    s.variance[k] /= n - 1.0;
    s.standard_error[k] = std::sqrt(s.variance[k] / n);
  }
  return s;
}

void MassEnsemble::add(const Trajectory& traj) {
  if (mass.empty()) {
    times = traj.times;
    dt = traj.dt;
  } else if (traj.times.size() != times.size()) {
    throw std::invalid_argument("ensemble trajectories use different time axes");
  }
  path_index.push_back(traj.path_index);
  mass.push_back(traj.mass);
  if (traj.has_increment_log) {
    std::vector<double> f, w;
    f.reserve(traj.increments.size());
    w.reserve(traj.increments.size());
    for (const auto& r : traj.increments) {
      f.push_back(r.im_u_f);
      w.push_back(r.im_u_dw);
    }
    im_u_f.push_back(std::move(f));
    im_u_dw.push_back(std::move(w));
  }
}

void MassEnsemble::sort_by_path() {
  std::vector<std::size_t> order(path_index.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return path_index[a] < path_index[b]; });
  auto permute = [&](auto& v) {
    if (v.empty()) return;
    std::remove_reference_t<decltype(v)> out;
    out.reserve(v.size());
    for (std::size_t i : order) out.push_back(std::move(v[i]));
    v = std::move(out);
  };
  permute(path_index);
  permute(mass);
  permute(im_u_f);
  permute(im_u_dw);
}

double expected_mass_closed_form(double t, double m0, double gamma, double hs2) {
  const double e = std::exp(-2.0 * gamma * t);
  const double drive = gamma > 0.0 ? hs2 * (1.0 - e) / (2.0 * gamma) : hs2 * t;
  return e * m0 + drive;
}

namespace {

std::vector<std::size_t> strided(std::size_t len, std::size_t stride) {
  if (stride == 0) throw std::invalid_argument("stride must be >= 1");
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < len; k += stride) idx.push_back(k);
  return idx;
}

void require_damping(const ModelParams& p) {
  if (!(p.gamma > p.forcing.beta()))
    throw RegimeError("gamma > beta", "moment diagnostics need gamma > beta (gamma = " +
                                          std::to_string(p.gamma) + ", beta = " +
                                          std::to_string(p.forcing.beta()) + ")");
}

}  // namespace

ExpectedMassReport expected_mass_check(const MassEnsemble& ens, const ModelParams& params,
                                       double hs2, std::size_t stride) {
  if (ens.paths() < 100)
    throw std::invalid_argument("expected_mass_check needs at least 100 paths, got " +
                                std::to_string(ens.paths()));
  ExpectedMassReport rep;
  rep.paths = ens.paths();
  rep.closed_form = params.forcing.family() == ForcingFamily::zero;
  rep.stationary_level = params.gamma > 0.0 ? hs2 / (2.0 * params.gamma)
                                            : std::numeric_limits<double>::infinity();
  const auto idx = strided(ens.times.size(), stride);
  const std::size_t n = ens.paths();

  if (rep.closed_form) {
    std::vector<std::vector<double>> cols(n);
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t k : idx) cols[p].push_back(ens.mass[p][k]);
    const EnsembleStats st = ensemble_stats(cols);
    const double m0 = st.mean.front();
    rep.pass = true;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const double t = ens.times[idx[i]] - ens.times.front();
      const double ref = expected_mass_closed_form(t, m0, params.gamma, hs2);
      const double dev = st.mean[i] - ref;
      const double se = st.standard_error[i];
      const double z = se > 0.0 ? dev / se : 0.0;
      rep.times.push_back(ens.times[idx[i]]);
      rep.mean.push_back(st.mean[i]);
      rep.standard_error.push_back(se);
      rep.reference.push_back(ref);
      rep.z.push_back(z);
      rep.max_abs_deviation = std::max(rep.max_abs_deviation, std::abs(dev));
      rep.max_abs_z = std::max(rep.max_abs_z, std::abs(z));
      if (std::abs(dev) > 3.0 * se + 1e-12 * std::max(1.0, std::abs(ref))) rep.pass = false;
    }
    return rep;
  }

  if (!ens.has_ledger())
    throw std::invalid_argument("forced ensembles need increment logs for the ODE check");
  const double dt = ens.dt;
  std::vector<std::vector<double>> pred(n), mart(n), mass_cols(n);
  for (std::size_t p = 0; p < n; ++p) {
    double drift = ens.mass[p][0], m = 0.0;
    std::size_t next = 0;
    for (std::size_t k = 0; k < ens.times.size(); ++k) {
      if (next < idx.size() && idx[next] == k) {
        pred[p].push_back(drift);
        mart[p].push_back(m);
        mass_cols[p].push_back(ens.mass[p][k]);
        ++next;
      }
      if (k + 1 < ens.times.size()) {
        drift += (-2.0 * params.gamma * ens.mass[p][k] - 2.0 * ens.im_u_f[p][k] + hs2) * dt;
        m += -2.0 * ens.im_u_dw[p][k];
      }
    }
  }
  const EnsembleStats sm = ensemble_stats(mass_cols);
  const EnsembleStats sp = ensemble_stats(pred);
  const EnsembleStats sw = ensemble_stats(mart);
  std::vector<std::vector<double>> resid(n);
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t i = 0; i < idx.size(); ++i)
      resid[p].push_back(mass_cols[p][i] - pred[p][i]);
  const EnsembleStats sr = ensemble_stats(resid);
  rep.pass = true;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const double dev = sm.mean[i] - sp.mean[i];
    const double se = sr.standard_error[i];
    const double z = se > 0.0 ? dev / se : 0.0;
    rep.times.push_back(ens.times[idx[i]]);
    rep.mean.push_back(sm.mean[i]);
    rep.standard_error.push_back(sm.standard_error[i]);
    rep.reference.push_back(sp.mean[i]);
    rep.z.push_back(z);
    rep.max_abs_deviation = std::max(rep.max_abs_deviation, std::abs(dev));
    rep.max_abs_z = std::max(rep.max_abs_z, std::abs(z));
    if (std::abs(sw.mean[i]) > 3.0 * sw.standard_error[i] + 1e-12) rep.pass = false;
  }
  rep.martingale_mean = sw.mean.back();
  rep.martingale_se = sw.standard_error.back();
  return rep;
}

double Psi1Schedule::at(double s) const {
  switch (kind) {
    case Kind::zero: return 0.0;
    case Kind::constant: return level;
    case Kind::exponential: return level * std::exp(rate * s);
    case Kind::window: return (s >= start && s < end) ? level : 0.0;
    case Kind::custom: return norm(s);
  }
  return 0.0;
}

Psi1Schedule Psi1Schedule::constant(double level) {
  Psi1Schedule p;
  p.kind = Kind::constant;
  p.level = level;
  return p;
}

Psi1Schedule Psi1Schedule::exponential(double level, double rate) {
  Psi1Schedule p;
  p.kind = Kind::exponential;
  p.level = level;
  p.rate = rate;
  return p;
}

Psi1Schedule Psi1Schedule::window(double level, double start, double end) {
  Psi1Schedule p;
  p.kind = Kind::window;
  p.level = level;
  p.start = start;
  p.end = end;
  return p;
}

Psi1Schedule Psi1Schedule::custom(std::function<double(double)> norm) {
  Psi1Schedule p;
  p.kind = Kind::custom;
  p.norm = std::move(norm);
  return p;
}

Psi1Schedule Psi1Schedule::from_forcing(const ForcingSpec& f) {
  if (!f.has_additive_part()) return zero();
  const double h = f.psi1_l1_profile();
  const TemporalEnvelope& e = f.envelope();
  switch (e.kind) {
    case TemporalEnvelope::Kind::constant: return constant(h);
    case TemporalEnvelope::Kind::exponential: return exponential(h, 2.0 * e.rate);
    case TemporalEnvelope::Kind::window: return window(h, e.start, e.end);
  }
  return zero();
}

namespace {

// int_a^b e^{-mu (b - s)} ds, a possibly -inf.
double discounted_exp(double mu, double a, double b) {
  if (std::isinf(a)) {
    if (!(mu > 0.0)) throw DivergentIntegral("psi_1 integral diverges at -infinity");
    return 1.0 / mu;
  }
  if (mu == 0.0) return b - a;
  return -std::expm1(-mu * (b - a)) / mu;
}

}  // namespace

double discounted_psi1_integral(const Psi1Schedule& psi, double kappa, double power,
                                double a, double b) {
  if (!(b >= a)) throw std::invalid_argument("integration range must satisfy a <= b");
  switch (psi.kind) {
    case Psi1Schedule::Kind::zero: return 0.0;
    case Psi1Schedule::Kind::constant:
      if (psi.level == 0.0) return 0.0;
      return std::pow(psi.level, power) * discounted_exp(kappa, a, b);
    case Psi1Schedule::Kind::exponential: {
      if (psi.level == 0.0) return 0.0;
      const double mu = kappa + power * psi.rate;
      return std::pow(psi.level, power) * std::exp(power * psi.rate * b) *
             discounted_exp(mu, a, b);
    }
    case Psi1Schedule::Kind::window: {
      const double lo = std::max(a, psi.start);
      const double hi = std::min(b, psi.end);
      if (!(hi > lo) || psi.level == 0.0) return 0.0;
      return std::pow(psi.level, power) * std::exp(-kappa * (b - hi)) *
             discounted_exp(kappa, lo, hi);
    }
    case Psi1Schedule::Kind::custom: {
      if (!psi.norm) throw std::invalid_argument("custom psi_1 schedule has no function");
      auto f = [&](double s) {
        const double v = psi.norm(s);
        return v == 0.0 ? 0.0 : std::exp(-kappa * (b - s)) * std::pow(v, power);
      };
      double err = 0.0, l1 = 0.0;
      const double val = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
          f, a, b, 15, 1e-8, &err, &l1);
      if (!std::isfinite(val) || !std::isfinite(err) || err > 1e-6 * std::max(l1, 1e-300))
        throw DivergentIntegral("psi_1 integral did not converge (estimate " +
                                std::to_string(val) + ", error " + std::to_string(err) + ")");
      return val;
    }
  }
  return 0.0;
}

double moment_constant_c1(double m) {
  if (!(m >= 1.0)) throw std::invalid_argument("moment order m must be >= 1");
  return std::pow(2.0, m - 1.0) * std::pow((m - 1.0) / m, m - 1.0) *
         std::pow(2.0 * m - 1.0, m) / m;
}

double moment_constant_c2(double m) {
  if (!(m >= 1.0)) throw std::invalid_argument("moment order m must be >= 1");
  return std::pow(4.0, m) * std::pow(2.0, m - 1.0) * std::pow((m - 1.0) / m, m - 1.0) / m;
}

double moment_bound(const ModelParams& params, double hs2, double m, double t,
                    double varrho, double initial_moment, const Psi1Schedule& psi) {
  require_damping(params);
  if (!(t >= 0.0)) throw std::invalid_argument("pullback horizon must be >= 0");
  const double gb = params.gamma - params.forcing.beta();
  const double k = gb * m;
  const double decay = std::exp(-k * t);
  return decay * initial_moment +
         moment_constant_c1(m) * std::pow(hs2, m) * std::pow(gb, -m) * (-std::expm1(-k * t)) +
         moment_constant_c2(m) * std::pow(gb, 1.0 - m) *
             discounted_psi1_integral(psi, k, m, varrho - t, varrho);
}

double fit_decay_exponent(const std::vector<double>& times,
                          const std::vector<double>& values) {
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0, n = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!(values[k] > 0.0)) continue;
    const double y = std::log(values[k]);
    st += times[k];
    sy += y;
    stt += times[k] * times[k];
    sty += times[k] * y;
    n += 1.0;
  }
  if (n < 2.0) return std::numeric_limits<double>::quiet_NaN();
  const double den = n * stt - st * st;
  if (den == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return -(n * sty - st * sy) / den;
}

double gap_decay_exponent(const std::vector<double>& times, const std::vector<double>& mean_a,
                          const std::vector<double>& mean_b, double floor) {
  std::vector<double> t, g;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double gap = mean_a[k] - mean_b[k];
    if (gap > floor) {
      t.push_back(times[k]);
      g.push_back(gap);
    }
  }
  return fit_decay_exponent(t, g);
}

MomentBoundReport moment_bound_check(const MassEnsemble& ens, int m,
                                     const ModelParams& params, double hs2,
                                     const Psi1Schedule& psi, std::size_t stride) {
  require_damping(params);
  if (m < 1) throw std::invalid_argument("moment order m must be >= 1");
  if (ens.paths() == 0) throw std::invalid_argument("moment_bound_check needs paths");
  const auto idx = strided(ens.times.size(), stride);
  std::vector<std::vector<double>> cols(ens.paths());
  for (std::size_t p = 0; p < ens.paths(); ++p)
    for (std::size_t k : idx) cols[p].push_back(std::pow(ens.mass[p][k], m));
  const EnsembleStats st = ensemble_stats(cols);

  MomentBoundReport rep;
  rep.m = m;
  rep.reference_exponent = (params.gamma - params.forcing.beta()) * m;
  const double e0 = st.mean.front();
  rep.pass = true;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const double t = ens.times[idx[i]] - ens.times.front();
    const double b = moment_bound(params, hs2, m, t, ens.times[idx[i]], e0, psi);
    const double se = st.standard_error[i];
    rep.times.push_back(t);
    rep.mean.push_back(st.mean[i]);
    rep.standard_error.push_back(se);
    rep.bound.push_back(b);
    rep.margin.push_back(b - st.mean[i]);
    const bool ok = st.mean[i] <= b + 3.0 * se;
    rep.within.push_back(ok);
    if (se > 1e-12 * std::abs(st.mean[i]))
      rep.min_margin_in_se = std::min(rep.min_margin_in_se, (b - st.mean[i]) / se);
    if (!ok) rep.pass = false;
  }
  const double plateau = rep.mean.back();
  std::vector<double> t, gap;
  const double first = rep.mean.front() - plateau;
  for (std::size_t i = 0; i < rep.mean.size(); ++i) {
    const double g = rep.mean[i] - plateau;
    if (first > 0.0 && g > 0.05 * first) {
      t.push_back(rep.times[i]);
      gap.push_back(g);
    }
  }
  rep.decay_exponent = fit_decay_exponent(t, gap);
  return rep;
}

double strichartz_norm(const std::vector<Snapshot>& snaps, double r, double p) {
  if (snaps.size() < 8)
    throw std::invalid_argument("strichartz_norm needs at least 8 snapshots, got " +
                                std::to_string(snaps.size()));
  if (!(p >= 1.0)) throw std::invalid_argument("space exponent p must be >= 1");
  if (!(r >= 1.0)) throw std::invalid_argument("time exponent r must be >= 1");
  std::vector<double> norms;
  norms.reserve(snaps.size());
  for (const auto& s : snaps) norms.push_back(lp_norm(to_space(s.u, Space::physical), p));
  if (std::isinf(r)) return *std::max_element(norms.begin(), norms.end());
  double integral = 0.0;
  for (std::size_t k = 0; k + 1 < snaps.size(); ++k) {
    const double h = snaps[k + 1].t - snaps[k].t;
    if (!(h >= 0.0)) throw std::invalid_argument("snapshots must be time ordered");
    integral += 0.5 * h * (std::pow(norms[k], r) + std::pow(norms[k + 1], r));
  }
  return std::pow(integral, 1.0 / r);
}

double strichartz_norm(const Trajectory& traj, double r, double p) {
  return strichartz_norm(traj.snapshots, r, p);
}

double absorbing_radius(const ModelParams& params, double hs2, double rho, double varrho,
                        const Psi1Schedule& psi, double reference_moment) {
  require_damping(params);
  if (!(rho >= 2.0)) throw std::invalid_argument("moment order rho must be >= 2");
  const double m = 0.5 * rho;
  const double gb = params.gamma - params.forcing.beta();
  double R = reference_moment;
  if (hs2 > 0.0) R += moment_constant_c1(m) * std::pow(hs2, m) * std::pow(gb, -m);
  const double I = discounted_psi1_integral(psi, gb * m, m,
                                            -std::numeric_limits<double>::infinity(), varrho);
  if (I != 0.0) R += moment_constant_c2(m) * std::pow(gb, 1.0 - m) * I;
  if (!std::isfinite(R)) throw DivergentIntegral("absorbing radius is not finite");
  return R;
}

SpectralField InitialFamily::sample(double s) const {
  const double m = mass(profile);
  if (!(m > 0.0)) throw std::invalid_argument("initial family profile has zero mass");
  SpectralField u = profile;
  u *= std::sqrt(bound(s) / m);
  return u;
}

std::optional<double> entry_time(const std::vector<double>& times,
                                 const std::vector<double>& values, double level) {
  std::optional<double> entry;
  for (std::size_t k = values.size(); k-- > 0;) {
    if (!(values[k] <= level)) break;
    entry = times[k];
  }
  return entry;
}

namespace {

struct PathResult {
  bool blowup = false;
  std::vector<double> moments;
};

}  // namespace

ProbeReport pullback_absorption_probe(AbsorbingProbe& probe, const ModelParams& params,
                                      const MultiplierCache& cache,
                                      const ProbeSettings& settings) {
  require_damping(params);
  if (!settings.cov) throw std::invalid_argument("probe needs a covariance spec");
  if (probe.t_grid.empty()) throw std::invalid_argument("probe t_grid is empty");
  if (probe.families.empty()) throw std::invalid_argument("probe has no initial families");
  for (std::size_t i = 0; i + 1 < probe.t_grid.size(); ++i)
    if (!(probe.t_grid[i + 1] > probe.t_grid[i]))
      throw std::invalid_argument("probe t_grid must be increasing");
  if (!(probe.t_grid.front() >= 0.0))
    throw std::invalid_argument("pullback horizons must be >= 0");
  const double hs2 = settings.cov->hs_norm_squared();
  const double m = 0.5 * probe.rho;

  ProbeReport rep;
  rep.t_grid = probe.t_grid;
  probe.R_values.clear();
  probe.entry_times.clear();
  for (double vr : probe.varrho_grid)
    probe.R_values.push_back(
        absorbing_radius(params, hs2, probe.rho, vr, settings.psi, probe.reference_moment));
  rep.R_values = probe.R_values;

  double s_min = std::numeric_limits<double>::infinity();
  for (double vr : probe.varrho_grid) s_min = std::min(s_min, vr - probe.t_grid.back());

  RunOptions opts;
  opts.snapshots.kind = SnapshotSchedule::Kind::none;
  opts.record_log = false;
  opts.guard = settings.guard;

  for (std::size_t v = 0; v < probe.varrho_grid.size(); ++v) {
    const double vr = probe.varrho_grid[v];
    for (const InitialFamily& fam : probe.families) {
      ProbeCell cell;
      cell.varrho = vr;
      cell.family = fam.name;
      cell.forward_shortcut = params.forcing.autonomous() && fam.growth == 0.0;
      const std::size_t nt = probe.t_grid.size();

      auto simulate = [&](std::size_t path) -> PathResult {
        PathResult res;
        res.moments.assign(nt, 0.0);
        try {
          if (cell.forward_shortcut) {
            const double tmax = probe.t_grid.back();
            const Trajectory tr =
                run_path(fam.sample(0.0), 0.0, tmax, settings.dt, params, cache, settings.cov,
                         settings.scheme, settings.seed, path, opts);
            for (std::size_t i = 0; i < nt; ++i)
              res.moments[i] =
                  std::pow(tr.mass[step_count(0.0, probe.t_grid[i], settings.dt)], m);
          } else {
            for (std::size_t i = 0; i < nt; ++i) {
              const double s = vr - probe.t_grid[i];
              RunOptions o = opts;
              o.counter_offset = step_count(s_min, s, settings.dt);
              const Trajectory tr = run_path(fam.sample(s), s, vr, settings.dt, params, cache,
                                             settings.cov, settings.scheme, settings.seed,
                                             path, o);
              res.moments[i] = std::pow(tr.mass.back(), m);
            }
          }
        } catch (const BlowupDetected&) {
          res.blowup = true;
        }
        return res;
      };
      const auto results = parallel_map(settings.paths, simulate, settings.threads);

      std::vector<std::vector<double>> cols;
      for (const auto& r : results) {
        if (r.blowup) cell.blowup = true;
        cols.push_back(r.moments);
      }
      if (!cell.blowup) {
        const EnsembleStats st = ensemble_stats(cols);
        cell.mean = st.mean;
        cell.standard_error = st.standard_error;
        cell.entry_time = entry_time(probe.t_grid, cell.mean, probe.R_values[v]);
        if (cell.entry_time) {
          for (std::size_t i = 0; i + 1 < nt; ++i) {
            if (probe.t_grid[i] < *cell.entry_time) continue;
            const double tol = 3.0 * std::hypot(st.standard_error[i], st.standard_error[i + 1]);
            if (cell.mean[i + 1] > cell.mean[i] + tol) cell.monotone_after_entry = false;
          }
        }
      }
      probe.entry_times.push_back(cell.entry_time);
      rep.cells.push_back(std::move(cell));
    }
  }
  return rep;
}

}  // namespace fnls
