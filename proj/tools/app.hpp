#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fnls/config.hpp"
#include "json.hpp"

namespace fnls::app {

inline constexpr const char* kArtifactVersion = "1.0.0";

enum ExitCode : int { kOk = 0, kConfigError = 2, kBlowup = 3, kDiagnosticFailure = 4 };

/// Command-line overrides applied on top of the configuration file.
struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<long long> paths;
  std::optional<std::string> out;
  std::optional<double> dt;
};

RunConfig resolve_config(const Overrides& o);

/// Output directory that records every file it writes and finishes with a
/// manifest (written to a temporary name, then renamed).
class OutputDir {
 public:
  OutputDir(const std::filesystem::path& root, std::string command, const RunConfig& cfg);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path path(const std::string& rel) const { return root_ / rel; }

  void write_text(const std::string& rel, const std::string& content);
  void write_bytes(const std::string& rel, const std::vector<unsigned char>& bytes);
  /// Appends one JSON object (with config_hash added) to report.jsonl.
  void report(nlohmann::json obj);

  void path_status(std::uint64_t path, const std::string& status,
                   std::optional<double> stopping_time = std::nullopt);
  void warn(const std::string& message);
  void set(const std::string& key, nlohmann::json value) { extra_[key] = std::move(value); }

  /// Writes manifest.json last; returns exit_code for convenience.
  int finish(int exit_code);

 private:
  void track(const std::string& rel);

  std::filesystem::path root_;
  std::string command_;
  std::string config_hash_;
  std::uint64_t seed_ = 0;
  std::vector<std::string> files_;
  std::string report_buffer_;
  nlohmann::json path_status_ = nlohmann::json::array();
  nlohmann::json warnings_ = nlohmann::json::array();
  nlohmann::json extra_ = nlohmann::json::object();
  std::chrono::steady_clock::time_point started_;
};

/// Fixed-format numbers for CSV output (17 significant digits).
std::string csv_number(double v);

int cmd_simulate(const RunConfig& cfg, std::ostream& log);
int cmd_ensemble(const RunConfig& cfg, std::ostream& log);
int cmd_admissible(int n, double alpha, double sigma, std::ostream& log);
int cmd_verify_mass(const RunConfig& cfg, std::ostream& log);
int cmd_absorb_probe(const RunConfig& cfg, std::ostream& log);
int cmd_strichartz(const RunConfig& cfg, std::ostream& log);

/// Parses argv and dispatches; returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace fnls::app
