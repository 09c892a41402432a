#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "app.hpp"
#include "fnls/config.hpp"

using namespace fnls;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fnls_test_" + name);
  fs::remove_all(p);
  return p;
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "fnls");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return app::run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json manifest(const fs::path& dir) {
  return nlohmann::json::parse(slurp(dir / "manifest.json"));
}

std::vector<nlohmann::json> reports(const fs::path& dir) {
  std::vector<nlohmann::json> out;
  std::istringstream in(slurp(dir / "report.jsonl"));
  for (std::string line; std::getline(in, line);) out.push_back(nlohmann::json::parse(line));
  return out;
}

fs::path write_config(const std::string& name, const std::string& body) {
  const fs::path p = fs::temp_directory_path() / ("fnls_test_" + name + ".cfg");
  std::ofstream(p) << body;
  return p;
}

// Small, fast linear setup.
const char* kLinear =
    "model.N = 16\nmodel.L = 8\nmodel.sigma = 0\nnoise.cutoff = 3\nrun.t1 = 0.5\n"
    "run.dt = 0.01\nrun.output_every = 5\n";

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

TEST(Config, DefaultsAndRoundTrip) {
  RunConfig cfg;
  EXPECT_EQ(cfg.real("model.alpha"), 0.75);
  cfg.set("model.gamma", "0.30000000000000004");
  cfg.set("verify.dts", "0.004, 0.002,0.001");
  const RunConfig back = RunConfig::parse(cfg.serialize());
  EXPECT_EQ(back, cfg);
  EXPECT_EQ(back.hash(), cfg.hash());
  EXPECT_EQ(back.real("model.gamma"), 0.30000000000000004);
  EXPECT_EQ(back.real_list("verify.dts"), (std::vector<double>{0.004, 0.002, 0.001}));
}

TEST(Config, CanonicalFormsHashEqually) {
  const auto a = RunConfig::parse("model.alpha = 0.750\n# comment\nseed=3\n");
  const auto b = RunConfig::parse("seed = 3\nmodel.alpha=7.5e-1");
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_NE(a.hash(), RunConfig().hash());
}

TEST(Config, HashIsFnv1aOfSerialization) {
  const RunConfig cfg;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(cfg.serialize())));
  EXPECT_EQ(cfg.hash(), buf);
}

TEST(Config, Errors) {
  EXPECT_THROW(RunConfig::parse("model.bogus = 1"), ConfigError);
  EXPECT_THROW(RunConfig::parse("model.N = abc"), ConfigError);
  EXPECT_THROW(RunConfig::parse("just text"), ConfigError);
  RunConfig cfg;
  cfg.set("noise.cutoff", "30");
  EXPECT_THROW(build_setup(cfg), ConfigError);
  cfg = RunConfig();
  cfg.set("run.dt", "0.3");
  EXPECT_THROW(build_setup(cfg), ConfigError);
}

TEST(Config, InitialMassRescale) {
  RunConfig cfg;
  cfg.set("initial.mass", "7");
  const fnls::Setup s = build_setup(cfg);
  EXPECT_NEAR(mass(s.u0), 7.0, 1e-12);
}

TEST(Config, SchemaListsEveryKey) {
  const RunConfig cfg;
  for (const auto& k : config_schema()) EXPECT_NO_THROW(cfg.raw(k.name)) << k.name;
}

TEST(Cli, SimulateWritesManifestAndIsDeterministic) {
  const auto cfg = write_config("sim", kLinear);
  const auto a = scratch("sim_a"), b = scratch("sim_b");
  ASSERT_EQ(cli({"simulate", "--config", cfg.string(), "--out", a.string(), "--seed", "4"}), 0);
  ASSERT_EQ(cli({"simulate", "--config", cfg.string(), "--out", b.string(), "--seed", "4"}), 0);
  const auto m = manifest(a);
  std::vector<std::string> files = m["files"];
  EXPECT_NE(std::find(files.begin(), files.end(), "mass.csv"), files.end());
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), a).string();
    EXPECT_NE(std::find(files.begin(), files.end(), rel), files.end()) << rel;
  }
  EXPECT_EQ(m["exit_code"], 0);
  EXPECT_EQ(m["seed"], 4);
  EXPECT_EQ(slurp(a / "mass.csv"), slurp(b / "mass.csv"));
  EXPECT_EQ(slurp(a / "ledger.csv"), slurp(b / "ledger.csv"));
  // Rerunning into an existing output directory replaces it.
  ASSERT_EQ(cli({"simulate", "--config", cfg.string(), "--out", a.string(), "--seed", "5"}), 0);
  EXPECT_NE(slurp(a / "mass.csv"), slurp(b / "mass.csv"));
}

TEST(Cli, ZeroThresholdExitsWithBlowup) {
  const auto cfg = write_config("guard", std::string(kLinear) + "guard.mass_threshold = 0\n");
  const auto out = scratch("guard");
  EXPECT_EQ(cli({"simulate", "--config", cfg.string(), "--out", out.string()}), 3);
  const auto m = manifest(out);
  EXPECT_EQ(m["exit_code"], 3);
  EXPECT_EQ(m["paths"][0]["status"], "blowup");
  EXPECT_EQ(m["paths"][0]["stopping_time"], 0.0);
}

TEST(Cli, RefusesForeignDirectory) {
  const auto out = scratch("foreign");
  fs::create_directories(out);
  std::ofstream(out / "keep.txt") << "x";
  EXPECT_EQ(cli({"simulate", "--out", out.string()}), 2);
  EXPECT_TRUE(fs::exists(out / "keep.txt"));
}

TEST(Cli, ConfigErrorsExitTwo) {
  const auto cfg = write_config("bad", "model.nope = 1\n");
  EXPECT_EQ(cli({"simulate", "--config", cfg.string(), "--out", scratch("bad").string()}), 2);
  EXPECT_EQ(cli({"frobnicate"}), 2);
  EXPECT_EQ(cli({"simulate", "--config", "/nonexistent/file.cfg"}), 2);
}

TEST(Cli, Admissible) {
  std::ostringstream a, b, c;
  EXPECT_EQ(app::cmd_admissible(2, 0.75, 1.0, a), 0);
  EXPECT_EQ(a.str(), "r=3 p=4 identity=OK regime=OK\n");
  EXPECT_EQ(app::cmd_admissible(2, 0.4, 1.0, b), 2);
  EXPECT_NE(b.str().find("alpha >= n/(2n-1)"), std::string::npos);
  EXPECT_NE(b.str().find("0.666667"), std::string::npos);
  EXPECT_EQ(app::cmd_admissible(2, 0.75, 0.0, c), 0);
  EXPECT_EQ(c.str().rfind("r=inf p=2", 0), 0u);
}

TEST(Cli, EnsembleHundredPathsLinear) {
  const auto cfg = write_config("ens", kLinear);
  const auto out = scratch("ens");
  EXPECT_EQ(cli({"ensemble", "--config", cfg.string(), "--out", out.string(), "--paths", "100"}), 0);
  bool found = false;
  for (const auto& r : reports(out))
    if (r["type"] == "expected_mass") {
      found = true;
      EXPECT_TRUE(r["closed_form"].get<bool>());
      EXPECT_TRUE(r["pass"].get<bool>());
    }
  EXPECT_TRUE(found);
}

TEST(Cli, EnsembleSinglePathHasDisabledBands) {
  const auto cfg = write_config("ens1", kLinear);
  const auto out = scratch("ens1");
  EXPECT_EQ(cli({"ensemble", "--config", cfg.string(), "--out", out.string(), "--paths", "1"}), 0);
  const auto reps = reports(out);
  EXPECT_FALSE(reps.front()["bands_enabled"].get<bool>());
  EXPECT_EQ(reps[1]["status"], "skipped");
  std::istringstream csv(slurp(out / "mass_mean.csv"));
  std::string header, row;
  std::getline(csv, header);
  std::getline(csv, row);
  std::vector<std::string> cols;
  std::stringstream rs(row);
  for (std::string c; std::getline(rs, c, ',');) cols.push_back(c);
  ASSERT_EQ(cols.size(), 5u);
  EXPECT_EQ(cols[3], cols[4]);
}

TEST(Cli, EnsembleDisablesMomentsWithoutDamping) {
  const auto cfg = write_config(
      "ensgb", std::string(kLinear) + "model.gamma = 0.1\nforcing.family = linear_phase\nforcing.beta = 0.1\n");
  const auto out = scratch("ensgb");
  EXPECT_EQ(cli({"ensemble", "--config", cfg.string(), "--out", out.string(), "--paths", "2"}), 0);
  int disabled = 0;
  for (const auto& r : reports(out))
    if ((r["type"] == "moment_bound" || r["type"] == "absorption") && r["status"] == "disabled")
      ++disabled;
  EXPECT_EQ(disabled, 2);
  const auto probe = scratch("probegb");
  EXPECT_EQ(cli({"absorb-probe", "--config", cfg.string(), "--out", probe.string()}), 0);
  EXPECT_EQ(reports(probe).front()["status"], "disabled");
}

TEST(Cli, VerifyMassAndStrichartz) {
  const auto cfg = write_config(
      "ver", "model.N = 16\nmodel.L = 10\nmodel.gamma = 0.5\nforcing.family = linear_phase\n"
             "forcing.beta = 0.2\nnoise.scale = 0.1\nnoise.cutoff = 3\nrun.t1 = 0.4\ninitial.width = 1.5\n"
             "seed = 11\n");
  const auto out = scratch("ver");
  EXPECT_EQ(cli({"verify-mass", "--config", cfg.string(), "--out", out.string()}), 0);
  const auto r = reports(out).front();
  EXPECT_TRUE(r["pass"].get<bool>());
  const auto st = scratch("str");
  EXPECT_EQ(cli({"strichartz", "--config", cfg.string(), "--out", st.string(), "--dt", "0.01"}), 0);
  const auto s = reports(st).front();
  EXPECT_EQ(s["r"], 3.0);
  EXPECT_GT(s["norm"].get<double>(), 0.0);
}

TEST(Cli, AbsorbProbeAnalyticEntry) {
  const auto cfg = write_config(
      "probe", "model.N = 16\nmodel.L = 8\nmodel.sigma = 0\nnoise.cutoff = 3\nprobe.t_max = 4\n"
               "probe.t_step = 0.1\nrun.dt = 0.01\npaths = 100\n");
  const auto out = scratch("probe");
  EXPECT_EQ(cli({"absorb-probe", "--config", cfg.string(), "--out", out.string()}), 0);
  const auto r = reports(out).front();
  EXPECT_TRUE(r.contains("analytic_entry_time"));
  EXPECT_NEAR(r["analytic_entry_time"].get<double>(), std::log(99.0) / 2.0, 1e-12);
  EXPECT_TRUE(r["entry_within_two_cells"].get<bool>());
}
