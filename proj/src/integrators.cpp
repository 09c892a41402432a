#include "fnls/integrators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace fnls {

const char* to_string(SchemeId s) {
  return s == SchemeId::strang ? "strang" : "exp_euler";
}

SchemeId parse_scheme(const std::string& name) {
  if (name == "exp_euler") return SchemeId::exp_euler;
  if (name == "strang") return SchemeId::strang;
  throw std::invalid_argument("unknown scheme '" + name + "' (exp_euler|strang)");
}

double BlowupGuard::resolve_threshold(double initial_mass) const {
  if (mass_threshold >= 0.0) return mass_threshold;
  return 1e6 * std::max(initial_mass, 1.0);
}

BlowupDetected::BlowupDetected(double stopping_time, double mass)
    : std::runtime_error("blow-up guard fired at t = " + std::to_string(stopping_time) +
                         " (mass " + std::to_string(mass) + ")"),
      stopping_time_(stopping_time),
      mass_(mass) {}

struct StepState::Workspace {
  std::shared_ptr<const FftPlan> plan;
  SpectralField a, b;
  // prop = e^{-gamma h} e^{-i h s(xi)}; closing = dV * mask * prop, which also
  // undoes the forward FFT scaling.
  std::vector<Complex> prop, closing;
  double prop_h = -1.0, prop_gamma = -1.0;

  void factors(double h, double gamma, const MultiplierCache& cache) {
    if (h == prop_h && gamma == prop_gamma) return;
    const auto& s = cache.symbol();
    const auto& mask = cache.dealias_mask();
    const double cv = cache.grid().cell_volume();
    const double damp = std::exp(-gamma * h);
    prop.resize(s.size());
    closing.resize(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) {
      prop[k] = std::polar(damp, -h * s[k]);
      closing[k] = mask[k] ? cv * prop[k] : Complex{0.0, 0.0};
    }
    prop_h = h;
    prop_gamma = gamma;
  }
};

StepState::StepState(const SpectralField& u0, double t0, NoiseStream stream_in,
                     SchemeId scheme_in)
    : t(t0), u(to_space(u0, Space::frequency)), stream(std::move(stream_in)),
      scheme(scheme_in), workspace(std::make_shared<Workspace>()) {
  if (!(stream.spec().grid() == u0.grid()))
    throw std::invalid_argument("noise covariance and initial data use different grids");
  workspace->plan = FftPlan::for_grid(u0.grid());
  workspace->a = SpectralField(u0.grid(), Space::physical);
  workspace->b = SpectralField(u0.grid(), Space::physical);
}

namespace {

void scale_into(const SpectralField& from, SpectralField& to, double factor) {
  for (std::size_t k = 0; k < from.size(); ++k) to[k] = from[k] * factor;
}

double pow_sigma(double a2, double sigma) {
  if (sigma == 0.0) return 1.0;
  if (sigma == 1.0) return a2;
  return a2 == 0.0 ? 0.0 : std::pow(a2, sigma);
}

// Left-endpoint ledger terms that need u_k in physical space.
void physical_terms(const SpectralField& u, double t, const ModelParams& params,
                    StepRecord& rec) {
  const ForcingSpec& f = params.forcing;
  const bool forced = f.family() != ForcingFamily::zero;
  const double cv = u.grid().cell_volume();
  double m = 0.0, nl = 0.0, uf = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Complex ui = u[i];
    const double a2 = std::norm(ui);
    m += a2;
    // Im(u conj(|u|^{2s} u)) vanishes pointwise; accumulate it anyway so the
    // ledger sees the same roundoff the scheme does.
    const Complex nli = pow_sigma(a2, params.sigma) * ui;
    nl += (ui * std::conj(nli)).imag();
    if (forced) uf += (ui * std::conj(f.value(t, i, ui))).imag();
  }
  rec.mass = m * cv;
  rec.im_u_nonlin = nl * cv;
  rec.im_u_f = uf * cv;
}

// Noise pairings from the frequency-space state and draws coefficients.
std::vector<double> noise_terms(StepState& st, double dt, const StepOptions& opts,
                                StepRecord& rec) {
  const CovarianceSpec& cov = st.stream.spec();
  const auto& modes = cov.modes();
  const auto& amps = cov.amplitudes();
  std::vector<double> b = st.stream.draw_coefficients(dt, opts.noise_substeps);
  double dw = 0.0, qv = 0.0, w2 = 0.0;
  for (std::size_t j = 0; j < modes.size(); ++j) {
    const double im = project_on_mode(st.u, modes[j]).imag();
    dw += b[j] * im;
    qv += amps[j] * amps[j] * im * im;
    w2 += b[j] * b[j];
  }
  rec.im_u_dw = dw;
  rec.noise_qv = qv;
  rec.dw_norm_sq = w2;
  return b;
}

void nonlinear_phase(SpectralField& w, double t, double dt, const ModelParams& params) {
  const ForcingSpec& f = params.forcing;
  const bool forced = f.family() != ForcingFamily::zero;
  const Complex minus_i_dt{0.0, -dt};
  if (params.sigma == 0.0) {
    const Complex rot = std::polar(1.0, dt);
    for (std::size_t i = 0; i < w.size(); ++i) {
      const Complex wi = w[i];
      w[i] = wi * rot;
      if (forced) w[i] += minus_i_dt * f.value(t, i, wi);
    }
    return;
  }
  for (std::size_t i = 0; i < w.size(); ++i) {
    const Complex wi = w[i];
    const double theta = pow_sigma(std::norm(wi), params.sigma) * dt;
    w[i] = wi * Complex(std::cos(theta), std::sin(theta));
    if (forced) w[i] += minus_i_dt * f.value(t, i, wi);
  }
}

// u <- closing * w_hat - i Delta W propagated by prop, then the guard.
void close_step(StepState& st, SpectralField& w, double dt,
                const std::vector<double>& b, const StepOptions& opts, StepRecord& rec) {
  StepState::Workspace& ws = *st.workspace;
  ws.plan->forward(w.data());
  for (std::size_t k = 0; k < w.size(); ++k) st.u[k] = w[k] * ws.closing[k];
  const auto& modes = st.stream.spec().modes();
  const double v = st.u.grid().box_volume();
  const double one = std::sqrt(v), pair = std::sqrt(0.5 * v);
  for (std::size_t j = 0; j < modes.size(); ++j) {
    const NoiseMode& m = modes[j];
    // -i b e_j in frequency space, see add_modes_to_frequency
    switch (m.kind) {
      case ModeKind::constant:
        st.u[m.plus_index] += Complex(0.0, -b[j] * one) * ws.prop[m.plus_index];
        break;
      case ModeKind::cosine:
        st.u[m.plus_index] += Complex(0.0, -b[j] * pair) * ws.prop[m.plus_index];
        st.u[m.minus_index] += Complex(0.0, -b[j] * pair) * ws.prop[m.minus_index];
        break;
      case ModeKind::sine:
        st.u[m.plus_index] += Complex(-b[j] * pair, 0.0) * ws.prop[m.plus_index];
        st.u[m.minus_index] += Complex(b[j] * pair, 0.0) * ws.prop[m.minus_index];
        break;
    }
  }
  st.t += dt;
  ++st.steps;
  const double mnew = mass(st.u);
  st.last_mass = mnew;
  if (!std::isfinite(mnew) || mnew > opts.mass_threshold) throw BlowupDetected(st.t, mnew);
  if (opts.record_log) {
    rec.t = st.t - dt;
    rec.dt = dt;
    if (opts.keep_coefficients) rec.coefficients = b;
    st.recorded_increments.push_back(std::move(rec));
  }
}

void check_step(const StepState& st, double dt, const ModelParams& params,
                const MultiplierCache& cache) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be > 0");
  if (!(cache.grid() == st.u.grid()))
    throw std::invalid_argument("multiplier cache built for a different grid");
  if (cache.alpha() != params.alpha)
    throw std::invalid_argument("multiplier cache built for a different alpha");
  if (params.forcing.family() != ForcingFamily::zero &&
      !(params.forcing.grid() == st.u.grid()))
    throw std::invalid_argument("forcing profile built for a different grid");
}

}  // namespace

// u_{k+1} = T(dt) [ P( u_k e^{i |u_k|^{2s} dt} - i dt f(t_k, u_k) ) - i Delta W_k ]
void step_exp_euler(StepState& st, double dt, const ModelParams& params,
                    const MultiplierCache& cache, const StepOptions& opts) {
  check_step(st, dt, params, cache);
  StepState::Workspace& ws = *st.workspace;
  ws.factors(dt, params.gamma, cache);
  StepRecord rec;
  const std::vector<double> b = noise_terms(st, dt, opts, rec);

  SpectralField& w = ws.a;
  scale_into(st.u, w, 1.0 / st.u.grid().box_volume());
  ws.plan->backward(w.data());
  if (opts.record_log) physical_terms(w, st.t, params, rec);
  nonlinear_phase(w, st.t, dt, params);
  close_step(st, w, dt, b, opts, rec);
}

// u_{k+1} = T(dt/2) [ P N_dt( T(dt/2) u_k ) - i Delta W_k ],
// N_dt(w) = w e^{i |w|^{2s} dt} - i dt f(t_k + dt/2, w).
void step_strang(StepState& st, double dt, const ModelParams& params,
                 const MultiplierCache& cache, const StepOptions& opts) {
  check_step(st, dt, params, cache);
  StepState::Workspace& ws = *st.workspace;
  ws.factors(0.5 * dt, params.gamma, cache);
  StepRecord rec;
  const std::vector<double> b = noise_terms(st, dt, opts, rec);
  const double inv_v = 1.0 / st.u.grid().box_volume();

  if (opts.record_log) {
    scale_into(st.u, ws.b, inv_v);
    ws.plan->backward(ws.b.data());
    physical_terms(ws.b, st.t, params, rec);
  }
  SpectralField& w = ws.a;
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = st.u[k] * ws.prop[k] * inv_v;
  ws.plan->backward(w.data());
  nonlinear_phase(w, st.t + 0.5 * dt, dt, params);
  close_step(st, w, dt, b, opts, rec);
}

void step(StepState& st, double dt, const ModelParams& params,
          const MultiplierCache& cache, const StepOptions& opts) {
  if (st.scheme == SchemeId::strang)
    step_strang(st, dt, params, cache, opts);
  else
    step_exp_euler(st, dt, params, cache, opts);
}

double default_time_step(const MultiplierCache& cache) {
  const double s = cache.max_retained_symbol();
  return s > 0.0 ? std::acos(-1.0) / (4.0 * s) : 0.1;
}

std::vector<std::size_t> SnapshotSchedule::step_indices(std::size_t n_steps) const {
  std::vector<std::size_t> idx;
  if (kind == Kind::none) return idx;
  if (count < 1) throw std::invalid_argument("snapshot count must be >= 1");
  idx.push_back(0);
  if (kind == Kind::uniform) {
    for (int k = 1; k <= count; ++k)
      idx.push_back(static_cast<std::size_t>(
          std::llround(static_cast<double>(n_steps) * k / count)));
  } else {
    for (int k = 0; k < count; ++k)
      idx.push_back(static_cast<std::size_t>(
          std::llround(std::ldexp(static_cast<double>(n_steps), k - count + 1))));
  }
  idx.push_back(n_steps);
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  return idx;
}

SnapshotSchedule SnapshotSchedule::parse(const std::string& text) {
  SnapshotSchedule s;
  if (text == "none") {
    s.kind = Kind::none;
    s.count = 0;
    return s;
  }
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  if (kind == "uniform")
    s.kind = Kind::uniform;
  else if (kind == "geometric")
    s.kind = Kind::geometric;
  else
    throw std::invalid_argument("snapshot schedule must be none, uniform:K or geometric:K");
  if (colon != std::string::npos) {
    try {
      s.count = std::stoi(text.substr(colon + 1));
    } catch (const std::exception&) {
      throw std::invalid_argument("bad snapshot count in '" + text + "'");
    }
  }
  if (s.count < 1) throw std::invalid_argument("snapshot count must be >= 1");
  return s;
}

std::string SnapshotSchedule::to_string() const {
  switch (kind) {
    case Kind::none: return "none";
    case Kind::uniform: return "uniform:" + std::to_string(count);
    case Kind::geometric: return "geometric:" + std::to_string(count);
  }
  return "none";
}

std::size_t step_count(double t0, double t1, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  if (!(t1 >= t0)) throw std::invalid_argument("t1 must be >= t0");
  const double ratio = (t1 - t0) / dt;
  const double n = std::round(ratio);
  if (std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio))
    throw std::invalid_argument("dt does not divide the time span");
  return static_cast<std::size_t>(n);
}

Trajectory run_path(const SpectralField& u0, double t0, double t1, double dt,
                    const ModelParams& params, const MultiplierCache& cache,
                    std::shared_ptr<const CovarianceSpec> cov, SchemeId scheme,
                    std::uint64_t seed, std::uint64_t path_index,
                    const RunOptions& options) {
  params.validate();
  if (!cov) throw std::invalid_argument("run_path needs a covariance spec");
  if (params.n != u0.grid().dim())
    throw std::invalid_argument("model.n differs from the grid dimension");
  const std::size_t n_steps = step_count(t0, t1, dt);

  Trajectory traj;
  traj.grid = u0.grid();
  traj.scheme = scheme;
  traj.seed = seed;
  traj.path_index = path_index;
  traj.t0 = t0;
  traj.dt = dt;
  traj.gamma = params.gamma;
  traj.sigma = params.sigma;
  traj.hs_norm_squared = cov->hs_norm_squared();
  traj.has_increment_log = options.record_log;
  traj.times.reserve(n_steps + 1);
  traj.mass.reserve(n_steps + 1);
  if (options.record_log) traj.increments.reserve(n_steps);

  NoiseStream stream(cov, seed, path_index, options.counter_offset);
  StepState st(u0, t0, stream, scheme);
  const double m0 = st.current_mass();
  StepOptions so;
  so.noise_substeps = options.noise_substeps;
  so.keep_coefficients = options.keep_coefficients;
  so.record_log = options.record_log;
  so.mass_threshold = options.guard.resolve_threshold(m0);

  const auto snaps = options.snapshots.step_indices(n_steps);
  std::size_t next_snap = 0;
  auto take_snapshot = [&](std::size_t k) {
    while (next_snap < snaps.size() && snaps[next_snap] == k) {
      traj.snapshots.push_back({st.t, st.physical()});
      ++next_snap;
    }
  };
  auto fail = [&](const BlowupDetected& e) {
    traj.stopping_time = e.stopping_time();
    BlowupDetected out(e.stopping_time(), e.mass());
    out.partial = std::make_shared<const Trajectory>(std::move(traj));
    throw out;
  };

  traj.times.push_back(t0);
  traj.mass.push_back(m0);
  if (!std::isfinite(m0) || m0 > so.mass_threshold) fail(BlowupDetected(t0, m0));
  take_snapshot(0);

  int streak = 0;
  for (std::size_t k = 1; k <= n_steps; ++k) {
    try {
      step(st, dt, params, cache, so);
    } catch (const BlowupDetected& e) {
      traj.increments = std::move(st.recorded_increments);
      fail(e);
    }
    st.t = t0 + static_cast<double>(k) * dt;
    const double m = st.last_mass;
    streak = m > traj.mass.back() ? streak + 1 : 0;
    traj.max_growth_streak = std::max(traj.max_growth_streak, streak);
    traj.times.push_back(st.t);
    traj.mass.push_back(m);
    traj.steps = k;
    take_snapshot(k);
  }
  if (options.guard.consecutive_growth_limit > 0)
    traj.growth_flag = traj.max_growth_streak >= options.guard.consecutive_growth_limit;
  traj.increments = std::move(st.recorded_increments);
  return traj;
}

}  // namespace fnls
