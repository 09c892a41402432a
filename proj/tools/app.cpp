#include "app.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "fnls/diagnostics.hpp"
#include "fnls/parallel.hpp"
#include "fnls/snapshot.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace fnls::app {

RunConfig resolve_config(const Overrides& o) {
  RunConfig cfg = o.config_path.empty() ? RunConfig() : RunConfig::load(o.config_path);
  if (o.seed) cfg.set("seed", std::to_string(*o.seed));
  if (o.paths) cfg.set("paths", std::to_string(*o.paths));
  if (o.out) cfg.set("output_dir", *o.out);
  if (o.dt) cfg.set("run.dt", format_real(*o.dt));
  return cfg;
}

std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

OutputDir::OutputDir(const fs::path& root, std::string command, const RunConfig& cfg)
    : root_(root), command_(std::move(command)), config_hash_(cfg.hash()),
      seed_(cfg.unsigned_integer("seed")), started_(std::chrono::steady_clock::now()) {
  std::error_code ec;
  if (fs::exists(root_)) {
    if (!fs::is_directory(root_))
      throw ConfigError("output_dir '" + root_.string() + "' is not a directory");
    const bool empty = fs::is_empty(root_);
    if (!empty && !fs::exists(root_ / "manifest.json"))
      throw ConfigError("output_dir '" + root_.string() +
                        "' is not empty and holds no manifest; refusing to overwrite");
    for (const auto& entry : fs::directory_iterator(root_)) fs::remove_all(entry.path());
  }
  fs::create_directories(root_, ec);
  if (ec) throw ConfigError("cannot create output_dir '" + root_.string() + "': " + ec.message());
  write_text("config.txt", cfg.serialize());
}

void OutputDir::track(const std::string& rel) {
  if (std::find(files_.begin(), files_.end(), rel) == files_.end()) files_.push_back(rel);
}

void OutputDir::write_text(const std::string& rel, const std::string& content) {
  const fs::path p = root_ / rel;
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + p.string());
  track(rel);
}

void OutputDir::write_bytes(const std::string& rel, const std::vector<unsigned char>& bytes) {
  const fs::path p = root_ / rel;
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("cannot write " + p.string());
  track(rel);
}

void OutputDir::report(json obj) {
  obj["config_hash"] = config_hash_;
  report_buffer_ += obj.dump() + "\n";
  write_text("report.jsonl", report_buffer_);
}

void OutputDir::path_status(std::uint64_t path, const std::string& status,
                            std::optional<double> stopping_time) {
  json s{{"path", path}, {"status", status}};
  if (stopping_time) s["stopping_time"] = *stopping_time;
  path_status_.push_back(std::move(s));
}

void OutputDir::warn(const std::string& message) { warnings_.push_back(message); }

int OutputDir::finish(int exit_code) {
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
  json m;
  m["artifact"] = "fnls";
  m["version"] = kArtifactVersion;
  m["command"] = command_;
  m["config_hash"] = config_hash_;
  m["seed"] = seed_;
  m["exit_code"] = exit_code;
  m["paths"] = path_status_;
  m["warnings"] = warnings_;
  m["wall_clock_seconds"] = wall;
  m["threads"] = worker_count();
  std::vector<std::string> files = files_;
  files.push_back("manifest.json");
  std::sort(files.begin(), files.end());
  m["files"] = files;
  for (auto& [k, v] : extra_.items()) m[k] = v;
  const fs::path tmp = root_ / "manifest.json.tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out << m.dump(2) << "\n";
  }
  fs::rename(tmp, root_ / "manifest.json");
  return exit_code;
}

namespace {

json regime_json(const RegimeReport& r) {
  return json{{"dimension_ok", r.dimension_ok}, {"alpha_ok", r.alpha_ok},
              {"sigma_ok", r.sigma_ok},         {"damping_ok", r.damping_ok},
              {"well_posed", r.well_posed()},   {"violations", r.violations()}};
}

std::string mass_csv(const std::vector<double>& t, const std::vector<double>& m,
                     std::size_t stride) {
  std::string out = "t,mass\n";
  for (std::size_t k = 0; k < t.size(); ++k)
    if (k % stride == 0 || k + 1 == t.size())
      out += csv_number(t[k]) + "," + csv_number(m[k]) + "\n";
  return out;
}

void write_snapshots(OutputDir& out, const Trajectory& tr) {
  for (std::size_t i = 0; i < tr.snapshots.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof name, "snapshots/snap_%04zu.bin", i);
    out.write_bytes(name, encode_snapshot(tr.snapshots[i].u));
  }
  std::string idx = "index,t\n";
  for (std::size_t i = 0; i < tr.snapshots.size(); ++i)
    idx += std::to_string(i) + "," + csv_number(tr.snapshots[i].t) + "\n";
  if (!tr.snapshots.empty()) out.write_text("snapshots/index.csv", idx);
}

std::string ledger_csv(const MassLedger& L, std::size_t stride) {
  std::string out =
      "t,lhs,damping,forcing,martingale,ito_correction,quadratic_term,nonlinear,residual\n";
  for (std::size_t k = 0; k < L.times.size(); ++k) {
    if (k % stride != 0 && k + 1 != L.times.size()) continue;
    out += csv_number(L.times[k]) + "," + csv_number(L.lhs[k]) + "," +
           csv_number(L.damping[k]) + "," + csv_number(L.forcing[k]) + "," +
           csv_number(L.martingale[k]) + "," + csv_number(L.ito_correction[k]) + "," +
           csv_number(L.quadratic_term[k]) + "," + csv_number(L.nonlinear[k]) + "," +
           csv_number(L.residual[k]) + "\n";
  }
  return out;
}

json ledger_json(const MassLedger& L) {
  return json{{"m", L.m},
              {"max_abs_residual", L.max_abs_residual},
              {"relative_residual", L.relative_residual},
              {"relative_nonlinear", L.relative_nonlinear}};
}

}  // namespace

int cmd_simulate(const RunConfig& cfg, std::ostream& log) {
  Setup s = build_setup(cfg);
  OutputDir out(cfg.text("output_dir"), "simulate", cfg);
  const auto stride = static_cast<std::size_t>(cfg.integer("run.output_every"));
  RunOptions opts = s.options;
  opts.record_log = true;

  json rep{{"type", "simulate"},
           {"scheme", to_string(s.scheme)},
           {"dt", s.dt},
           {"hs_norm_squared", s.cov->hs_norm_squared()},
           {"regime", regime_json(s.params.regime())}};
  Trajectory tr;
  int code = kOk;
  try {
    tr = run_path(s.u0, s.t0, s.t1, s.dt, s.params, *s.cache, s.cov, s.scheme, s.seed, 0, opts);
    out.path_status(0, "completed");
  } catch (const BlowupDetected& e) {
    tr = *e.partial;
    code = kBlowup;
    out.path_status(0, "blowup", e.stopping_time());
    rep["stopping_time"] = e.stopping_time();
    log << "blow-up guard fired at t = " << e.stopping_time() << "\n";
  }
  out.write_text("mass.csv", mass_csv(tr.times, tr.mass, stride));
  write_snapshots(out, tr);
  rep["steps"] = tr.steps;
  rep["growth_flag"] = tr.growth_flag;
  rep["max_growth_streak"] = tr.max_growth_streak;
  if (tr.steps > 0) {
    const MassLedger L = ito_mass_residual(tr, 1);
    out.write_text("ledger.csv", ledger_csv(L, stride));
    rep["ledger"] = ledger_json(L);
    log << "steps " << tr.steps << "  final mass " << tr.mass.back()
        << "  ledger relative residual " << L.relative_residual << "\n";
  }
  out.report(rep);
  return out.finish(code);
}

int cmd_ensemble(const RunConfig& cfg, std::ostream& log) {
  Setup s = build_setup(cfg);
  OutputDir out(cfg.text("output_dir"), "ensemble", cfg);
  const auto stride = static_cast<std::size_t>(cfg.integer("run.output_every"));
  RunOptions opts = s.options;
  opts.snapshots.kind = SnapshotSchedule::Kind::none;
  opts.record_log = s.params.forcing.family() != ForcingFamily::zero;

  struct PathOutcome {
    std::optional<Trajectory> traj;
    std::optional<double> stopping_time;
  };
  auto outcomes = parallel_map(s.paths, [&](std::size_t p) {
    PathOutcome o;
    try {
      o.traj = run_path(s.u0, s.t0, s.t1, s.dt, s.params, *s.cache, s.cov, s.scheme, s.seed,
                        p, opts);
    } catch (const BlowupDetected& e) {
      o.stopping_time = e.stopping_time();
    }
    return o;
  });

  MassEnsemble ens;
  for (std::size_t p = 0; p < outcomes.size(); ++p) {
    if (outcomes[p].traj) {
      ens.add(*outcomes[p].traj);
      outcomes[p].traj.reset();
      out.path_status(p, "completed");
    } else {
      out.path_status(p, "blowup", outcomes[p].stopping_time);
    }
  }
  ens.sort_by_path();
  const double completion = static_cast<double>(ens.paths()) / static_cast<double>(s.paths);
  if (completion < 0.95)
    out.warn("only " + std::to_string(ens.paths()) + " of " + std::to_string(s.paths) +
             " paths completed; statistics use completed paths");
  if (ens.paths() == 0) {
    out.report({{"type", "ensemble"}, {"completed_paths", 0}});
    log << "every path hit the blow-up guard\n";
    return out.finish(kBlowup);
  }

  const double hs2 = s.cov->hs_norm_squared();
  const EnsembleStats st = ensemble_stats(ens.mass);
  std::string csv = "t,mean,standard_error,lower,upper\n";
  for (std::size_t k = 0; k < ens.times.size(); ++k) {
    if (k % stride != 0 && k + 1 != ens.times.size()) continue;
    csv += csv_number(ens.times[k]) + "," + csv_number(st.mean[k]) + "," +
           csv_number(st.standard_error[k]) + "," + csv_number(st.lower(k)) + "," +
           csv_number(st.upper(k)) + "\n";
  }
  out.write_text("mass_mean.csv", csv);
  out.report({{"type", "ensemble"},
              {"paths", s.paths},
              {"completed_paths", ens.paths()},
              {"bands_enabled", st.bands_enabled},
              {"hs_norm_squared", hs2},
              {"dt", s.dt},
              {"scheme", to_string(s.scheme)},
              {"regime", regime_json(s.params.regime())}});

  bool failed = false;
  if (ens.paths() >= 100) {
    const ExpectedMassReport em = expected_mass_check(ens, s.params, hs2, stride);
    std::string ecsv = "t,mean,standard_error,reference,z\n";
    for (std::size_t i = 0; i < em.times.size(); ++i)
      ecsv += csv_number(em.times[i]) + "," + csv_number(em.mean[i]) + "," +
              csv_number(em.standard_error[i]) + "," + csv_number(em.reference[i]) + "," +
              csv_number(em.z[i]) + "\n";
    out.write_text("expected_mass.csv", ecsv);
    out.report({{"type", "expected_mass"},
                {"closed_form", em.closed_form},
                {"pass", em.pass},
                {"max_abs_z", em.max_abs_z},
                {"max_abs_deviation", em.max_abs_deviation},
                {"stationary_level", em.stationary_level},
                {"martingale_mean", em.martingale_mean},
                {"martingale_se", em.martingale_se}});
    log << "expected mass: " << (em.pass ? "PASS" : "FAIL") << "  max |z| " << em.max_abs_z
        << "\n";
    failed |= !em.pass;
  } else {
    out.report({{"type", "expected_mass"},
                {"status", "skipped"},
                {"reason", "needs at least 100 paths"}});
  }

  if (s.params.regime().moment_diagnostics_enabled()) {
    const Psi1Schedule psi = Psi1Schedule::from_forcing(s.params.forcing);
    for (double mo : cfg.real_list("moment.orders")) {
      const int m = static_cast<int>(mo);
      if (m < 1 || m != mo) throw ConfigError("moment.orders must hold integers >= 1");
      const MomentBoundReport mb = moment_bound_check(ens, m, s.params, hs2, psi, stride);
      std::string mcsv = "t,mean,standard_error,bound\n";
      for (std::size_t i = 0; i < mb.times.size(); ++i)
        mcsv += csv_number(mb.times[i]) + "," + csv_number(mb.mean[i]) + "," +
                csv_number(mb.standard_error[i]) + "," + csv_number(mb.bound[i]) + "\n";
      out.write_text("moment_m" + std::to_string(m) + ".csv", mcsv);
      out.report({{"type", "moment_bound"},
                  {"m", m},
                  {"pass", mb.pass},
                  {"min_margin_in_se", std::isfinite(mb.min_margin_in_se)
                                           ? json(mb.min_margin_in_se)
                                           : json(nullptr)},
                  {"decay_exponent", std::isfinite(mb.decay_exponent) ? json(mb.decay_exponent)
                                                                      : json(nullptr)},
                  {"reference_exponent", mb.reference_exponent},
                  {"note", "initial-data term carries e^{-(gamma-beta) m t}"}});
      log << "moment bound m=" << m << ": " << (mb.pass ? "PASS" : "FAIL") << "\n";
      failed |= !mb.pass;
    }
  } else {
    out.report({{"type", "moment_bound"}, {"status", "disabled"}, {"reason", "gamma <= beta"}});
    out.report({{"type", "absorption"}, {"status", "disabled"}, {"reason", "gamma <= beta"}});
  }
  return out.finish(failed ? kDiagnosticFailure : kOk);
}

int cmd_admissible(int n, double alpha, double sigma, std::ostream& log) {
  const RegimeReport reg = validate_regime(n, alpha, sigma, 1.0, 0.0);
  try {
    const AdmissiblePair pair = admissible_pair(n, alpha, sigma);
    const double res = pair.scaling_residual(n, alpha);
    const bool identity = std::abs(res) <= 1e-12;
    log << "r=" << (pair.r_is_infinite() ? std::string("inf") : format_real(pair.r))
        << " p=" << format_real(pair.p) << " identity=" << (identity ? "OK" : "FAIL")
        << " regime=" << (reg.well_posed() ? "OK" : "FAIL") << "\n";
    return identity ? kOk : kDiagnosticFailure;
  } catch (const RegimeError& e) {
    log << "regime=FAIL violated: " << e.constraint() << " (" << e.what() << ")\n";
    return kConfigError;
  }
}

int cmd_verify_mass(const RunConfig& cfg, std::ostream& log) {
  Setup s = build_setup(cfg);
  OutputDir out(cfg.text("output_dir"), "verify-mass", cfg);
  std::vector<double> dts = cfg.real_list("verify.dts");
  std::sort(dts.begin(), dts.end(), std::greater<>());
  const double fine = dts.back();
  if (!(fine > 0.0)) throw ConfigError("verify.dts must be positive");
  const int m = static_cast<int>(cfg.integer("verify.m"));
  if (m < 1) throw ConfigError("verify.m must be >= 1");

  RunOptions opts = s.options;
  opts.record_log = true;
  opts.snapshots.kind = SnapshotSchedule::Kind::none;
  std::vector<double> res, gauge;
  std::string csv = "dt,substeps,relative_residual,relative_nonlinear,observed_order\n";
  bool ok = true;
  for (std::size_t i = 0; i < dts.size(); ++i) {
    const double ratio = dts[i] / fine;
    const long long k = std::llround(ratio);
    if (k < 1 || std::abs(ratio - static_cast<double>(k)) > 1e-9 * ratio)
      throw ConfigError("verify.dts must be integer multiples of the smallest step");
    RunOptions o = opts;
    o.noise_substeps = static_cast<int>(k) * s.options.noise_substeps;
    Trajectory tr;
    try {
      tr = run_path(s.u0, s.t0, s.t1, dts[i], s.params, *s.cache, s.cov, s.scheme, s.seed, 0, o);
    } catch (const BlowupDetected& e) {
      out.path_status(0, "blowup", e.stopping_time());
      log << "blow-up at dt = " << dts[i] << "\n";
      return out.finish(kBlowup);
    }
    const MassLedger L = ito_mass_residual(tr, m);
    const MassLedger L1 = m == 1 ? L : ito_mass_residual(tr, 1);
    res.push_back(L.relative_residual);
    gauge.push_back(L1.relative_nonlinear);
    double order = std::numeric_limits<double>::quiet_NaN();
    if (i > 0) {
      order = std::log(res[i - 1] / res[i]) / std::log(dts[i - 1] / dts[i]);
      if (!(res[i] < res[i - 1]) || !(order >= 0.5)) ok = false;
    }
    if (!(L1.relative_nonlinear <= 1e-12)) ok = false;
    csv += csv_number(dts[i]) + "," + std::to_string(k) + "," + csv_number(res[i]) + "," +
           csv_number(gauge[i]) + "," + csv_number(order) + "\n";
    log << "dt " << dts[i] << "  relative residual " << res[i];
    if (i > 0) log << "  observed order " << order;
    log << "  nonlinear contribution " << gauge[i] << "\n";
  }
  out.path_status(0, "completed");
  out.write_text("verify_mass.csv", csv);
  out.report({{"type", "verify_mass"},
              {"m", m},
              {"dts", dts},
              {"relative_residual", res},
              {"relative_nonlinear", gauge},
              {"pass", ok}});
  log << (ok ? "PASS" : "FAIL") << "\n";
  return out.finish(ok ? kOk : kDiagnosticFailure);
}

namespace {

std::vector<double> horizon_grid(double t_max, double t_step) {
  if (!(t_step > 0.0) || !(t_max >= 0.0)) throw ConfigError("probe grid needs t_step > 0");
  const auto n = static_cast<std::size_t>(std::llround(t_max / t_step));
  std::vector<double> g;
  for (std::size_t i = 0; i <= n; ++i) g.push_back(static_cast<double>(i) * t_step);
  return g;
}

// Closed-form entry time of E||u||^2 into {<= R} for the linear mean-mass law.
std::optional<double> analytic_entry(const ModelParams& p, double hs2, double m0, double R) {
  const ForcingSpec& f = p.forcing;
  double c = 0.0;
  if (f.family() == ForcingFamily::linear_phase) {
    const auto& prof = f.c_profile();
    if (std::adjacent_find(prof.begin(), prof.end(), std::not_equal_to<>()) != prof.end())
      return std::nullopt;
    c = prof.front();
  } else if (f.family() != ForcingFamily::zero) {
    return std::nullopt;
  }
  const double rate = 2.0 * (p.gamma - c);
  const double plateau = hs2 / rate;
  if (m0 <= R) return 0.0;
  if (R <= plateau) return std::nullopt;
  return std::log((m0 - plateau) / (R - plateau)) / rate;
}

}  // namespace

int cmd_absorb_probe(const RunConfig& cfg, std::ostream& log) {
  Setup s = build_setup(cfg);
  OutputDir out(cfg.text("output_dir"), "absorb-probe", cfg);
  const RegimeReport reg = s.params.regime();
  if (!reg.moment_diagnostics_enabled()) {
    out.report({{"type", "absorption"}, {"status", "disabled"}, {"reason", "gamma <= beta"}});
    log << "absorption probe disabled: gamma <= beta\n";
    return out.finish(kOk);
  }
  const double gb = s.params.gamma - s.params.forcing.beta();
  const double hs2 = s.cov->hs_norm_squared();
  const double plateau = hs2 / (2.0 * gb);

  AbsorbingProbe probe;
  probe.rho = cfg.real("probe.rho");
  probe.varrho_grid = cfg.real_list("probe.varrho");
  probe.t_grid = horizon_grid(cfg.real("probe.t_max"), cfg.real("probe.t_step"));
  probe.reference_moment = cfg.real("probe.reference_moment");
  const double level = cfg.real("probe.level_factor") * plateau;
  double tempered = cfg.real("probe.tempered_rate");
  if (tempered < 0.0) tempered = 0.5 * gb;
  std::stringstream fams(cfg.text("probe.families"));
  std::string name;
  while (std::getline(fams, name, ',')) {
    InitialFamily f;
    f.name = name;
    f.profile = s.u0;
    f.level = level;
    if (name == "tempered")
      f.growth = tempered;
    else if (name != "fixed")
      throw ConfigError("probe.families entries must be fixed or tempered");
    probe.families.push_back(std::move(f));
  }

  ProbeSettings ps;
  ps.dt = s.dt;
  ps.scheme = s.scheme;
  ps.paths = s.paths;
  ps.seed = s.seed;
  ps.cov = s.cov;
  ps.psi = Psi1Schedule::from_forcing(s.params.forcing);
  ps.guard = s.options.guard;
  ps.threads = worker_count();
  for (double vr : probe.varrho_grid)
    for (double t : probe.t_grid) step_count(vr - t, vr, ps.dt);

  const ProbeReport rep = pullback_absorption_probe(probe, s.params, *s.cache, ps);
  std::string csv = "varrho,family,t,mean,standard_error,R\n";
  bool blowup = false, failed = false;
  const double t_step = cfg.real("probe.t_step");
  for (std::size_t c = 0; c < rep.cells.size(); ++c) {
    const ProbeCell& cell = rep.cells[c];
    const double R = rep.R_values[c / probe.families.size()];
    json j{{"type", "absorption"},
           {"varrho", cell.varrho},
           {"family", cell.family},
           {"R", R},
           {"blowup", cell.blowup},
           {"forward_shortcut", cell.forward_shortcut},
           {"monotone_after_entry", cell.monotone_after_entry}};
    j["entry_time"] = cell.entry_time ? json(*cell.entry_time) : json("not absorbed within horizon");
    if (cell.blowup) {
      blowup = true;
    } else {
      for (std::size_t i = 0; i < rep.t_grid.size(); ++i)
        csv += csv_number(cell.varrho) + "," + cell.family + "," + csv_number(rep.t_grid[i]) +
               "," + csv_number(cell.mean[i]) + "," + csv_number(cell.standard_error[i]) + "," +
               csv_number(R) + "\n";
      const InitialFamily& fam = probe.families[c % probe.families.size()];
      if (probe.rho == 2.0 && fam.growth == 0.0) {
        const auto ts = analytic_entry(s.params, hs2, fam.bound(0.0), R);
        if (ts) {
          j["analytic_entry_time"] = *ts;
          const bool within =
              cell.entry_time && std::abs(*cell.entry_time - *ts) <= 2.0 * t_step + 1e-9;
          j["entry_within_two_cells"] = within;
          failed |= !within;
        }
      }
    }
    log << "varrho " << cell.varrho << " family " << cell.family << ": R = " << R
        << ", entry "
        << (cell.entry_time ? format_real(*cell.entry_time) : std::string("none"))
        << (cell.blowup ? " (blow-up)" : "") << "\n";
    out.report(j);
  }
  out.write_text("probe.csv", csv);
  return out.finish(blowup ? kBlowup : failed ? kDiagnosticFailure : kOk);
}

int cmd_strichartz(const RunConfig& cfg, std::ostream& log) {
  Setup s = build_setup(cfg);
  const RegimeReport reg = s.params.regime();
  if (!reg.well_posed()) {
    for (const auto& v : reg.violations()) log << "regime violated: " << v << "\n";
    return kConfigError;
  }
  const AdmissiblePair pair = admissible_pair(s.params.n, s.params.alpha, s.params.sigma);
  OutputDir out(cfg.text("output_dir"), "strichartz", cfg);
  RunOptions opts = s.options;
  if (opts.snapshots.kind == SnapshotSchedule::Kind::none) opts.snapshots.kind = SnapshotSchedule::Kind::uniform;
  opts.snapshots.count = std::max(opts.snapshots.count, 7);
  opts.record_log = false;
  Trajectory tr;
  try {
    tr = run_path(s.u0, s.t0, s.t1, s.dt, s.params, *s.cache, s.cov, s.scheme, s.seed, 0, opts);
    out.path_status(0, "completed");
  } catch (const BlowupDetected& e) {
    out.path_status(0, "blowup", e.stopping_time());
    return out.finish(kBlowup);
  }
  const double norm = strichartz_norm(tr, pair.r, pair.p);
  const double ratio = norm / l2_norm(s.u0);

  // Free linear flow over a small profile corpus.
  std::string csv = "profile,width,ratio\n";
  double worst = 0.0;
  for (const char* prof : {"gaussian", "sech"}) {
    for (double w : {1.0, 2.0, 4.0}) {
      RunConfig c = cfg;
      c.set("initial.profile", prof);
      c.set("initial.width", format_real(w));
      c.set("initial.mass", "-1");
      const SpectralField g = initial_profile(s.grid, c);
      std::vector<Snapshot> snaps;
      for (const Snapshot& sn : tr.snapshots)
        snaps.push_back({sn.t, free_propagator(g, sn.t - s.t0, *s.cache)});
      const double r = strichartz_norm(snaps, pair.r, pair.p) / l2_norm(g);
      worst = std::max(worst, r);
      csv += std::string(prof) + "," + csv_number(w) + "," + csv_number(r) + "\n";
    }
  }
  out.write_text("strichartz_corpus.csv", csv);
  out.report({{"type", "strichartz"},
              {"r", pair.r_is_infinite() ? json("inf") : json(pair.r)},
              {"p", pair.p},
              {"norm", norm},
              {"ratio_to_initial_l2", ratio},
              {"snapshots", tr.snapshots.size()},
              {"free_flow_max_ratio", worst}});
  log << "r=" << (pair.r_is_infinite() ? std::string("inf") : format_real(pair.r))
      << " p=" << format_real(pair.p) << "  ||u||_{L^r L^p} = " << norm
      << "  ratio to ||u0|| = " << ratio << "  free-flow corpus max ratio = " << worst << "\n";
  return out.finish(kOk);
}

int run_cli(int argc, char** argv) {
  CLI::App cli{"Pseudospectral simulator for damped stochastic fractional NLS"};
  cli.require_subcommand(1);
  Overrides ov;
  std::uint64_t seed = 0;
  long long paths = 0;
  std::string out_dir;
  double dt = 0.0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", ov.config_path, "configuration file (key = value)");
    sub->add_option("--seed", seed, "global seed (u64)");
    sub->add_option("--paths", paths, "number of paths");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--dt", dt, "time step override");
  };
  auto* sim = cli.add_subcommand("simulate", "single path with snapshots and mass ledger");
  auto* ens = cli.add_subcommand("ensemble", "parallel paths, mean-mass law and moment bounds");
  auto* adm = cli.add_subcommand("admissible", "Strichartz pair and regime for (n, alpha, sigma)");
  auto* ver = cli.add_subcommand("verify-mass", "coupled dt refinement of the mass ledger");
  auto* abs = cli.add_subcommand("absorb-probe", "pullback absorption probe");
  auto* str = cli.add_subcommand("strichartz", "mixed space-time norm of a trajectory");
  for (auto* sub : {sim, ens, adm, ver, abs, str}) add_common(sub);
  std::optional<int> n_opt;
  std::optional<double> alpha_opt, sigma_opt;
  adm->add_option("--n", n_opt, "dimension");
  adm->add_option("--alpha", alpha_opt, "fractional order");
  adm->add_option("--sigma", sigma_opt, "nonlinearity exponent");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? kOk : kConfigError;
  }
  auto* sub = cli.get_subcommands().front();
  if (sub->count("--seed")) ov.seed = seed;
  if (sub->count("--paths")) ov.paths = paths;
  if (sub->count("--out")) ov.out = out_dir;
  if (sub->count("--dt")) ov.dt = dt;

  try {
    const RunConfig cfg = resolve_config(ov);
    if (sub == sim) return cmd_simulate(cfg, std::cout);
    if (sub == ens) return cmd_ensemble(cfg, std::cout);
    if (sub == ver) return cmd_verify_mass(cfg, std::cout);
    if (sub == abs) return cmd_absorb_probe(cfg, std::cout);
    if (sub == str) return cmd_strichartz(cfg, std::cout);
    const int n = n_opt ? *n_opt : static_cast<int>(cfg.integer("model.n"));
    const double alpha = alpha_opt ? *alpha_opt : cfg.real("model.alpha");
    const double sigma = sigma_opt ? *sigma_opt : cfg.real("model.sigma");
    return cmd_admissible(n, alpha, sigma, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const RegimeError& e) {
    std::cerr << "regime error (" << e.constraint() << "): " << e.what() << "\n";
    return kConfigError;
  }
}

}  // namespace fnls::app
