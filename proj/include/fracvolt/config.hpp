#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

#include "fracvolt/spatial.hpp"
#include "fracvolt/types.hpp"
#include "fracvolt/volterra.hpp"

namespace fracvolt {

/// Bad configuration text or value. key() is the dotted key path, or empty
/// for syntax errors that are not tied to a key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message);
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// One value of the key-value file: a quoted string or a bare token.
struct ConfigValue {
  std::string text;
  bool quoted = false;
  int line = 0;
};

/// Parse the TOML subset used by run configs: comments, [section] headers,
/// and `key = value` lines where the value is a basic string, a number, or
/// a boolean. Returns dotted key paths.
std::map<std::string, ConfigValue> parse_key_values(const std::string& text);

struct RunConfig {
  Scalar alpha = 0.5;
  Scalar T = 1.0;
  Index N = 256;
  /// 0 selects the default grading 2 / alpha clamped to [1, 8].
  Scalar grading = 0.0;
  BasisKind basis = BasisKind::Sine;
  Index dim = 1;

  std::string kappa = "1";
  std::string F = "0";
  std::string G = "0";
  std::string a = "0";
  std::string b = "0";
  std::string u0 = "0";
  std::string g = "0";
  Scalar eta = 1.0;
  Scalar M_bound = 0.0;

  Scheme scheme = Scheme::BForm;
  int picard_depth = 8;
  PicardMode picard_mode = PicardMode::General;
  Scalar tolerance = 1e-9;
  int inner_order = 8;
  int points_per_cell = 0;

  std::string out_dir = ".";
  std::string trace_file = "trace.csv";
  std::string summary_file = "summary.json";
  std::uint64_t seed = 0;

  /// Throws ConfigError naming the offending key.
  void validate() const;
  Scalar effective_grading() const;
  Problem problem() const;
  SolverOptions solver_options() const;
  /// Config text that parses back to an equal RunConfig.
  std::string dump() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parse and validate. Unknown keys are errors.
RunConfig parse_run_config(const std::string& text);
/// Read a file; I/O failures throw IoError.
RunConfig load_run_config(const std::string& path);

std::string to_string(PicardMode mode);
PicardMode picard_mode_from_string(const std::string& name);

}  // namespace fracvolt
