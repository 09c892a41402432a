#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "fnls/diagnostics.hpp"
#include "fnls/dynamics.hpp"
#include "fnls/integrators.hpp"
#include "fnls/noise.hpp"
#include "fnls/operators.hpp"

namespace fnls {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class KeyType { integer, real, text, real_list };

struct ConfigKey {
  const char* name;
  KeyType type;
  const char* default_value;
  const char* unit;
  const char* help;
};

/// Every recognised key with its default, in documentation order.
const std::vector<ConfigKey>& config_schema();

/// Flat dotted key=value configuration. Unset keys take schema defaults;
/// unknown keys and malformed values raise ConfigError.
class RunConfig {
 public:
  RunConfig();

  /// Lines of "key = value"; '#' starts a comment.
  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::string& path);

  /// Validates and stores a value in canonical form.
  void set(const std::string& key, const std::string& value);
  const std::string& raw(const std::string& key) const;
  bool is_default(const std::string& key) const;

  long long integer(const std::string& key) const;
  std::uint64_t unsigned_integer(const std::string& key) const;
  double real(const std::string& key) const;
  const std::string& text(const std::string& key) const { return raw(key); }
  std::vector<double> real_list(const std::string& key) const;

  /// All keys sorted, one "key=value" per line. parse(serialize()) == *this.
  std::string serialize() const;
  /// FNV-1a 64 of serialize(), as 16 hex digits.
  std::string hash() const;

  bool operator==(const RunConfig& other) const { return values_ == other.values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Shortest round-trip decimal form of a double.
std::string format_real(double v);

/// Objects assembled from a configuration.
struct Setup {
  Grid grid;
  ModelParams params;
  std::shared_ptr<const MultiplierCache> cache;
  std::shared_ptr<const CovarianceSpec> cov;
  SpectralField u0;  // physical
  SchemeId scheme = SchemeId::strang;
  double t0 = 0.0;
  double t1 = 1.0;
  double dt = 0.0;
  RunOptions options;
  std::uint64_t seed = 0;
  std::size_t paths = 1;
};

/// Throws ConfigError for any inconsistent setting.
Setup build_setup(const RunConfig& cfg);

/// Lattice profile named by initial.profile, scaled per initial.* keys.
SpectralField initial_profile(const Grid& grid, const RunConfig& cfg);

}  // namespace fnls
