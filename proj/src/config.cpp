#include "fnls/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fnls {

const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> keys{
      {"seed", KeyType::integer, "0", "-", "global seed (u64)"},
      {"paths", KeyType::integer, "100", "-", "number of ensemble paths"},
      {"output_dir", KeyType::text, "out", "-", "directory for all outputs"},
      {"model.n", KeyType::integer, "2", "-", "spatial dimension (1..3)"},
      {"model.N", KeyType::integer, "64", "-", "grid points per axis (power of two)"},
      {"model.L", KeyType::real, "20", "length", "box side length"},
      {"model.alpha", KeyType::real, "0.75", "-", "fractional order, 0 < alpha < 1"},
      {"model.sigma", KeyType::real, "1", "-", "nonlinearity exponent, >= 0"},
      {"model.gamma", KeyType::real, "1", "1/time", "damping rate, >= 0"},
      {"forcing.family", KeyType::text, "zero", "-",
       "zero | linear_phase | additive | combined"},
      {"forcing.beta", KeyType::real, "0", "1/time", "growth constant beta of the family"},
      {"forcing.c", KeyType::real, "-1", "1/time",
       "phase coefficient c (negative: beta for linear_phase, beta/2 for combined)"},
      {"forcing.g_amplitude", KeyType::real, "0", "-", "peak of the Gaussian profile g0"},
      {"forcing.g_width", KeyType::real, "1", "length", "width of g0"},
      {"forcing.envelope", KeyType::text, "constant", "-",
       "constant | exponential | window"},
      {"forcing.envelope_rate", KeyType::real, "0", "1/time", "lambda of e^{lambda t}"},
      {"forcing.window_start", KeyType::real, "0", "time", "window envelope start"},
      {"forcing.window_end", KeyType::real, "0", "time", "window envelope end"},
      {"noise.scale", KeyType::real, "0.25", "-", "a in phi_k = a (1+|xi_k|^2)^{-s/2}"},
      {"noise.decay", KeyType::real, "3", "-", "s in phi_k"},
      {"noise.cutoff", KeyType::integer, "8", "modes", "max |m_j| of noise modes (<= N/3)"},
      {"initial.profile", KeyType::text, "gaussian", "-",
       "gaussian | sech | plane_wave | zero"},
      {"initial.amplitude", KeyType::real, "1", "-", "peak amplitude"},
      {"initial.width", KeyType::real, "2", "length", "width of gaussian/sech"},
      {"initial.mode", KeyType::integer, "1", "-", "plane wave index along axis 0"},
      {"initial.mass", KeyType::real, "-1", "-", "rescale to this mass when > 0"},
      {"run.scheme", KeyType::text, "strang", "-", "strang | exp_euler"},
      {"run.t0", KeyType::real, "0", "time", "start time"},
      {"run.t1", KeyType::real, "1", "time", "end time"},
      {"run.dt", KeyType::real, "0", "time", "step size (0: largest divisor of t1 - t0 not above pi / (4 max symbol))"},
      {"run.snapshots", KeyType::text, "uniform:10", "-",
       "none | uniform:K | geometric:K"},
      {"run.noise_substeps", KeyType::integer, "1", "-",
       "fine Brownian draws summed per step"},
      {"run.output_every", KeyType::integer, "1", "steps", "CSV row stride"},
      {"guard.mass_threshold", KeyType::real, "-1", "mass",
       "blow-up threshold (negative: 1e6 max(M0, 1))"},
      {"guard.growth_limit", KeyType::integer, "0", "steps",
       "flag after this many consecutive mass increases (0: off)"},
      {"moment.orders", KeyType::real_list, "1,2,3", "-", "orders m checked by ensemble"},
      {"probe.rho", KeyType::real, "2", "-", "moment order rho >= 2"},
      {"probe.varrho", KeyType::real_list, "0", "time", "observation times"},
      {"probe.t_max", KeyType::real, "5", "time", "largest pullback horizon"},
      {"probe.t_step", KeyType::real, "0.1", "time", "horizon grid spacing"},
      {"probe.families", KeyType::text, "fixed", "-", "comma list of fixed | tempered"},
      {"probe.level_factor", KeyType::real, "100", "-",
       "initial mass as a multiple of the linear plateau"},
      {"probe.tempered_rate", KeyType::real, "-1", "1/time",
       "growth of the tempered family bound (negative: (gamma-beta)/2)"},
      {"probe.reference_moment", KeyType::real, "0", "-", "E||u0||^rho term of R"},
      {"verify.dts", KeyType::real_list, "0.004,0.002,0.001", "time",
       "coupled step sizes, each a multiple of the smallest"},
      {"verify.m", KeyType::integer, "1", "-", "ledger order m"},
  };
  return keys;
}

namespace {

const ConfigKey& find_key(const std::string& key) {
  for (const auto& k : config_schema())
    if (key == k.name) return k;
  throw ConfigError("unknown configuration key '" + key + "'");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  const char* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end || !std::isfinite(out))
    throw ConfigError("key '" + key + "' expects a real number, got '" + v + "'");
  return out;
}

long long parse_integer(const std::string& key, const std::string& v) {
  long long out = 0;
  const char* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end)
    throw ConfigError("key '" + key + "' expects an integer, got '" + v + "'");
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

std::string canonical(const ConfigKey& k, const std::string& value) {
  const std::string v = trim(value);
  switch (k.type) {
    case KeyType::integer: {
      if (std::string(k.name) == "seed") {
        std::uint64_t u = 0;
        auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), u);
        if (ec != std::errc() || p != v.data() + v.size())
          throw ConfigError("key 'seed' expects an unsigned 64-bit integer, got '" + v + "'");
        return std::to_string(u);
      }
      return std::to_string(parse_integer(k.name, v));
    }
    case KeyType::real: return format_real(parse_real(k.name, v));
    case KeyType::text:
      if (v.empty()) throw ConfigError("key '" + std::string(k.name) + "' is empty");
      return v;
    case KeyType::real_list: {
      std::string out;
      for (const auto& item : split(v, ',')) {
        if (!out.empty()) out += ',';
        out += format_real(parse_real(k.name, item));
      }
      if (out.empty()) throw ConfigError("key '" + std::string(k.name) + "' is empty");
      return out;
    }
  }
  return v;
}

}  // namespace

std::string format_real(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

RunConfig::RunConfig() {
  for (const auto& k : config_schema()) values_[k.name] = canonical(k, k.default_value);
}

void RunConfig::set(const std::string& key, const std::string& value) {
  values_[key] = canonical(find_key(key), value);
}

const std::string& RunConfig::raw(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown configuration key '" + key + "'");
  return it->second;
}

bool RunConfig::is_default(const std::string& key) const {
  const ConfigKey& k = find_key(key);
  return raw(key) == canonical(k, k.default_value);
}

long long RunConfig::integer(const std::string& key) const {
  return parse_integer(key, raw(key));
}

std::uint64_t RunConfig::unsigned_integer(const std::string& key) const {
  std::uint64_t u = 0;
  const std::string& v = raw(key);
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), u);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("key '" + key + "' expects an unsigned integer");
  return u;
}

double RunConfig::real(const std::string& key) const { return parse_real(key, raw(key)); }

std::vector<double> RunConfig::real_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split(raw(key), ',')) out.push_back(parse_real(key, item));
  return out;
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    try {
      cfg.set(trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read configuration file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string RunConfig::serialize() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

std::string RunConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : serialize()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::vector<Complex> gaussian_values(const Grid& g, double amp, double width) {
  std::vector<Complex> v(g.size());
  const double c = 0.5 * g.length();
  for (std::size_t i = 0; i < g.size(); ++i) {
    double r2 = 0.0;
    for (int d = 0; d < g.dim(); ++d) {
      const double x = g.coordinate(i, d) - c;
      r2 += x * x;
    }
    v[i] = amp * std::exp(-0.5 * r2 / (width * width));
  }
  return v;
}

}  // namespace

SpectralField initial_profile(const Grid& g, const RunConfig& cfg) {
  const std::string profile = cfg.text("initial.profile");
  const double amp = cfg.real("initial.amplitude");
  const double width = cfg.real("initial.width");
  if (!(width > 0.0)) throw ConfigError("initial.width must be > 0");
  SpectralField u(g, Space::physical);
  const double c = 0.5 * g.length();
  if (profile == "gaussian") {
    const auto v = gaussian_values(g, amp, width);
    std::copy(v.begin(), v.end(), u.values().begin());
  } else if (profile == "sech") {
    for (std::size_t i = 0; i < g.size(); ++i) {
      double r2 = 0.0;
      for (int d = 0; d < g.dim(); ++d) {
        const double x = g.coordinate(i, d) - c;
        r2 += x * x;
      }
      u[i] = amp / std::cosh(std::sqrt(r2) / width);
    }
  } else if (profile == "plane_wave") {
    const double xi = g.frequency_step() * static_cast<double>(cfg.integer("initial.mode"));
    for (std::size_t i = 0; i < g.size(); ++i) u[i] = std::polar(amp, xi * g.coordinate(i, 0));
  } else if (profile != "zero") {
    throw ConfigError("initial.profile must be gaussian, sech, plane_wave or zero");
  }
  const double target = cfg.real("initial.mass");
  if (target > 0.0) {
    const double m = mass(u);
    if (!(m > 0.0)) throw ConfigError("initial.mass set for a zero profile");
    u *= std::sqrt(target / m);
  }
  return u;
}

Setup build_setup(const RunConfig& cfg) {
  try {
    Setup s;
    const long long n = cfg.integer("model.n");
    const long long N = cfg.integer("model.N");
    if (n < 1 || n > 3) throw ConfigError("model.n must be 1, 2 or 3");
    if (N < 2) throw ConfigError("model.N must be a power of two >= 2");
    s.grid = make_grid(static_cast<int>(n), static_cast<int>(N), cfg.real("model.L"));

    ModelParams& p = s.params;
    p.n = static_cast<int>(n);
    p.alpha = cfg.real("model.alpha");
    p.sigma = cfg.real("model.sigma");
    p.gamma = cfg.real("model.gamma");

    const ForcingFamily fam = parse_forcing_family(cfg.text("forcing.family"));
    const double beta = cfg.real("forcing.beta");
    double c = cfg.real("forcing.c");
    TemporalEnvelope env;
    const std::string env_kind = cfg.text("forcing.envelope");
    if (env_kind == "exponential")
      env = TemporalEnvelope::exponential(cfg.real("forcing.envelope_rate"));
    else if (env_kind == "window")
      env = TemporalEnvelope::window(cfg.real("forcing.window_start"),
                                     cfg.real("forcing.window_end"));
    else if (env_kind != "constant")
      throw ConfigError("forcing.envelope must be constant, exponential or window");
    const auto g0 = gaussian_values(s.grid, cfg.real("forcing.g_amplitude"),
                                    cfg.real("forcing.g_width"));
    switch (fam) {
      case ForcingFamily::zero: p.forcing = ForcingSpec::zero(s.grid, beta); break;
      case ForcingFamily::linear_phase:
        if (c < 0.0) c = beta;
        p.forcing = ForcingSpec::linear_phase(s.grid, beta, std::vector<double>(s.grid.size(), c));
        break;
      case ForcingFamily::additive: p.forcing = ForcingSpec::additive(s.grid, beta, g0, env); break;
      case ForcingFamily::combined:
        if (c < 0.0) c = 0.5 * beta;
        p.forcing = ForcingSpec::combined(s.grid, beta, std::vector<double>(s.grid.size(), c),
                                          g0, env);
        break;
    }
    p.validate();

    s.cache = std::make_shared<const MultiplierCache>(s.grid, p.alpha);
    s.cov = std::make_shared<const CovarianceSpec>(CovarianceSpec::power_law(
        s.grid, cfg.real("noise.scale"), cfg.real("noise.decay"),
        static_cast<int>(cfg.integer("noise.cutoff"))));
    s.u0 = initial_profile(s.grid, cfg);
    s.scheme = parse_scheme(cfg.text("run.scheme"));
    s.t0 = cfg.real("run.t0");
    s.t1 = cfg.real("run.t1");
    s.dt = cfg.real("run.dt");
    if (s.dt == 0.0) {
      const double span = s.t1 - s.t0;
      s.dt = default_time_step(*s.cache);
      if (span > 0.0) s.dt = span / std::ceil(span / s.dt);
    }
    if (!(s.dt > 0.0)) throw ConfigError("run.dt must be > 0 (or 0 for the default)");
    step_count(s.t0, s.t1, s.dt);

    s.options.snapshots = SnapshotSchedule::parse(cfg.text("run.snapshots"));
    s.options.noise_substeps = static_cast<int>(cfg.integer("run.noise_substeps"));
    if (s.options.noise_substeps < 1) throw ConfigError("run.noise_substeps must be >= 1");
    if (cfg.integer("run.output_every") < 1) throw ConfigError("run.output_every must be >= 1");
    s.options.guard.mass_threshold = cfg.real("guard.mass_threshold");
    s.options.guard.consecutive_growth_limit =
        static_cast<int>(cfg.integer("guard.growth_limit"));
    s.seed = cfg.unsigned_integer("seed");
    const long long paths = cfg.integer("paths");
    if (paths < 1) throw ConfigError("paths must be >= 1");
    s.paths = static_cast<std::size_t>(paths);
    return s;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace fnls
