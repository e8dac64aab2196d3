#include "fracvolt/config.hpp"

#include <cctype>
#include <charconv>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "fracvolt/expr.hpp"
#include "fracvolt/fracops.hpp"

namespace fracvolt {

ConfigError::ConfigError(std::string key, const std::string& message)
    : std::runtime_error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string line_prefix(int line) { return "line " + std::to_string(line) + ": "; }

bool is_bare_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  }
  return true;
}

// Parse a basic string starting at the opening quote; returns the decoded
// text and sets pos past the closing quote.
std::string parse_string(const std::string& s, std::size_t& pos, int line) {
  std::string out;
  ++pos;
  while (pos < s.size()) {
    const char c = s[pos++];
    if (c == '"') return out;
    if (c != '\\') {
      out += c;
      continue;
    }
    if (pos >= s.size()) break;
    const char e = s[pos++];
    switch (e) {
      case '"': out += '"'; break;
      case '\\': out += '\\'; break;
      case 'n': out += '\n'; break;
      case 't': out += '\t'; break;
      default:
        throw ConfigError("", line_prefix(line) + "unsupported escape \\" + std::string(1, e));
    }
  }
  throw ConfigError("", line_prefix(line) + "unterminated string");
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

std::string number(Scalar v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

Scalar to_real(const std::string& key, const ConfigValue& v) {
  if (v.quoted) throw ConfigError(key, "expected a number, got a string");
  errno = 0;
  char* end = nullptr;
  std::string text;
  for (char c : v.text) {
    if (c != '_') text += c;
  }
  const Scalar out = std::strtod(text.c_str(), &end);
  if (text.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(out)) {
    throw ConfigError(key, "expected a finite number, got '" + v.text + "'");
  }
  return out;
}

long long to_integer(const std::string& key, const ConfigValue& v) {
  const Scalar r = to_real(key, v);
  if (r != std::floor(r) || std::abs(r) > 9.0e15) {
    throw ConfigError(key, "expected an integer, got '" + v.text + "'");
  }
  return static_cast<long long>(r);
}

const std::string& to_text(const std::string& key, const ConfigValue& v) {
  if (!v.quoted) throw ConfigError(key, "expected a quoted string, got '" + v.text + "'");
  return v.text;
}

void check_expression(const std::string& key, const std::string& src) {
  try {
    (void)parse_coeff_expr(src);
  } catch (const std::exception& e) {
    throw ConfigError(key, std::string("invalid expression '") + src + "': " + e.what());
  }
}

}  // namespace

std::map<std::string, ConfigValue> parse_key_values(const std::string& text) {
  std::map<std::string, ConfigValue> out;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  std::set<std::string> sections;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = trim(raw);
    if (s.empty() || s[0] == '#') continue;
    if (s[0] == '[') {
      const auto close = s.find(']');
      if (close == std::string::npos) throw ConfigError("", line_prefix(line) + "missing ']'");
      const std::string rest = trim(s.substr(close + 1));
      if (!rest.empty() && rest[0] != '#') {
        throw ConfigError("", line_prefix(line) + "unexpected text after section header");
      }
      section = trim(s.substr(1, close - 1));
      if (!is_bare_key(section)) {
        throw ConfigError("", line_prefix(line) + "invalid section name '" + section + "'");
      }
      if (!sections.insert(section).second) {
        throw ConfigError(section, line_prefix(line) + "duplicate section");
      }
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("", line_prefix(line) + "expected key = value");
    const std::string key = trim(s.substr(0, eq));
    if (!is_bare_key(key)) throw ConfigError("", line_prefix(line) + "invalid key '" + key + "'");
    const std::string path = section.empty() ? key : section + "." + key;

    std::string rhs = trim(s.substr(eq + 1));
    ConfigValue value;
    value.line = line;
    if (!rhs.empty() && rhs[0] == '"') {
      std::size_t pos = 0;
      value.text = parse_string(rhs, pos, line);
      value.quoted = true;
      const std::string tail = trim(rhs.substr(pos));
      if (!tail.empty() && tail[0] != '#') {
        throw ConfigError(path, line_prefix(line) + "unexpected text after string");
      }
    } else {
      const auto hash = rhs.find('#');
      value.text = trim(hash == std::string::npos ? rhs : rhs.substr(0, hash));
      if (value.text.empty()) throw ConfigError(path, line_prefix(line) + "missing value");
    }
    if (!out.emplace(path, value).second) {
      throw ConfigError(path, line_prefix(line) + "duplicate key");
    }
  }
  return out;
}

std::string to_string(PicardMode mode) {
  return mode == PicardMode::Semigroup ? "semigroup" : "general";
}

PicardMode picard_mode_from_string(const std::string& name) {
  if (name == "general") return PicardMode::General;
  if (name == "semigroup") return PicardMode::Semigroup;
  throw ValidationError("unknown picard mode '" + name + "' (expected general or semigroup)");
}

void RunConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw ConfigError("alpha", "alpha = " + number(alpha) + " is outside the valid range (0, 1]");
  }
  if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("T", "T must be positive and finite");
  if (N < 2 || N > (Index{1} << 20)) {
    throw ConfigError("N", "N = " + std::to_string(N) + " is outside the valid range [2, 2^20]");
  }
  if (!(grading == 0.0 || grading >= 1.0)) {
    throw ConfigError("grading", "grading must be >= 1 (or 0 for the default)");
  }
  if (dim < 1 || dim > 256) {
    throw ConfigError("basis.dim",
                      "dim = " + std::to_string(dim) + " is outside the valid range [1, 256]");
  }
  check_expression("coefficients.kappa", kappa);
  check_expression("coefficients.F", F);
  check_expression("coefficients.G", G);
  check_expression("coefficients.a", a);
  check_expression("coefficients.b", b);
  check_expression("source.u0", u0);
  check_expression("source.g", g);
  if (parse_coeff_expr(kappa).depends_on_t()) {
    throw ConfigError("coefficients.kappa", "kappa must not depend on t");
  }
  if (!(sampled_kappa_min(parse_coeff_expr(kappa)) > 0.0)) {
    throw ConfigError("coefficients.kappa", "kappa must be positive on [0, 1]");
  }
  if (!(eta > 0.0)) throw ConfigError("source.eta", "eta must be positive");
  if (!(M_bound >= 0.0)) throw ConfigError("source.M_bound", "M_bound must be >= 0");
  if (picard_depth < 1) throw ConfigError("solver.picard_depth", "picard_depth must be >= 1");
  if (!(tolerance > 0.0)) throw ConfigError("solver.tolerance", "tolerance must be positive");
  if (inner_order < 1 || inner_order > 64) {
    throw ConfigError("solver.inner_order", "inner_order must be in [1, 64]");
  }
  if (points_per_cell < 0 || points_per_cell > 64) {
    throw ConfigError("solver.points_per_cell", "points_per_cell must be in [0, 64]");
  }
  if (trace_file.empty()) throw ConfigError("output.trace", "file name must not be empty");
  if (summary_file.empty()) throw ConfigError("output.summary", "file name must not be empty");
}

Scalar RunConfig::effective_grading() const {
  return grading == 0.0 ? default_grading(alpha) : grading;
}

Problem RunConfig::problem() const {
  Problem p;
  p.alpha = alpha;
  p.horizon = T;
  p.basis = BasisSpec{basis, dim};
  p.coeffs = CoefficientSet(parse_coeff_expr(kappa), parse_coeff_expr(F), parse_coeff_expr(G),
                            parse_coeff_expr(a), parse_coeff_expr(b));
  p.source.u0 = parse_coeff_expr(u0);
  p.source.g = parse_coeff_expr(g);
  p.source.eta = eta;
  p.source.M_bound = M_bound;
  return p;
}

SolverOptions RunConfig::solver_options() const {
  SolverOptions o;
  o.scheme = scheme;
  o.picard_depth = picard_depth;
  o.picard_mode = picard_mode;
  o.tolerance = tolerance;
  o.inner_order = inner_order;
  o.points_per_cell = points_per_cell;
  return o;
}

std::string RunConfig::dump() const {
  std::ostringstream os;
  os << "alpha = " << number(alpha) << "\n"
     << "T = " << number(T) << "\n"
     << "N = " << N << "\n"
     << "grading = " << number(grading) << "\n"
     << "scheme = " << quote(to_string(scheme)) << "\n"
     << "seed = " << seed << "\n\n"
     << "[basis]\n"
     << "kind = " << quote(to_string(basis)) << "\n"
     << "dim = " << dim << "\n\n"
     << "[coefficients]\n"
     << "kappa = " << quote(kappa) << "\n"
     << "F = " << quote(F) << "\n"
     << "G = " << quote(G) << "\n"
     << "a = " << quote(a) << "\n"
     << "b = " << quote(b) << "\n\n"
     << "[source]\n"
     << "u0 = " << quote(u0) << "\n"
     << "g = " << quote(g) << "\n"
     << "eta = " << number(eta) << "\n"
     << "M_bound = " << number(M_bound) << "\n\n"
     << "[solver]\n"
     << "picard_depth = " << picard_depth << "\n"
     << "picard_mode = " << quote(to_string(picard_mode)) << "\n"
     << "tolerance = " << number(tolerance) << "\n"
     << "inner_order = " << inner_order << "\n"
     << "points_per_cell = " << points_per_cell << "\n\n"
     << "[output]\n"
     << "dir = " << quote(out_dir) << "\n"
     << "trace = " << quote(trace_file) << "\n"
     << "summary = " << quote(summary_file) << "\n";
  return os.str();
}

RunConfig parse_run_config(const std::string& text) {
  const auto kv = parse_key_values(text);
  RunConfig c;
  using Setter = std::function<void(const std::string&, const ConfigValue&)>;
  const auto real = [](Scalar& dst) -> Setter {
    return [&dst](const std::string& k, const ConfigValue& v) { dst = to_real(k, v); };
  };
  const auto text_of = [](std::string& dst) -> Setter {
    return [&dst](const std::string& k, const ConfigValue& v) { dst = to_text(k, v); };
  };
  const auto integer = [](auto& dst) -> Setter {
    return [&dst](const std::string& k, const ConfigValue& v) {
      dst = static_cast<std::remove_reference_t<decltype(dst)>>(to_integer(k, v));
    };
  };
  const std::map<std::string, Setter> setters = {
      {"alpha", real(c.alpha)},
      {"T", real(c.T)},
      {"N", integer(c.N)},
      {"grading", real(c.grading)},
      {"scheme",
       [&c](const std::string& k, const ConfigValue& v) {
         try {
           c.scheme = scheme_from_string(to_text(k, v));
         } catch (const ValidationError& e) {
           throw ConfigError(k, e.what());
         }
       }},
      {"seed",
       [&c](const std::string& k, const ConfigValue& v) {
         if (v.quoted) throw ConfigError(k, "expected an integer, got a string");
         const std::string& text = v.text;
         std::uint64_t s = 0;
         const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), s);
         if (ec != std::errc() || end != text.data() + text.size()) {
           throw ConfigError(k, "seed must be an integer in [0, 2^64), got '" + text + "'");
         }
         c.seed = s;
       }},
      {"basis.kind",
       [&c](const std::string& k, const ConfigValue& v) {
         try {
           c.basis = basis_kind_from_string(to_text(k, v));
         } catch (const ValidationError& e) {
           throw ConfigError(k, e.what());
         }
       }},
      {"basis.dim", integer(c.dim)},
      {"coefficients.kappa", text_of(c.kappa)},
      {"coefficients.F", text_of(c.F)},
      {"coefficients.G", text_of(c.G)},
      {"coefficients.a", text_of(c.a)},
      {"coefficients.b", text_of(c.b)},
      {"source.u0", text_of(c.u0)},
      {"source.g", text_of(c.g)},
      {"source.eta", real(c.eta)},
      {"source.M_bound", real(c.M_bound)},
      {"solver.picard_depth", integer(c.picard_depth)},
      {"solver.picard_mode",
       [&c](const std::string& k, const ConfigValue& v) {
         try {
           c.picard_mode = picard_mode_from_string(to_text(k, v));
         } catch (const ValidationError& e) {
           throw ConfigError(k, e.what());
         }
       }},
      {"solver.tolerance", real(c.tolerance)},
      {"solver.inner_order", integer(c.inner_order)},
      {"solver.points_per_cell", integer(c.points_per_cell)},
      {"output.dir", text_of(c.out_dir)},
      {"output.trace", text_of(c.trace_file)},
      {"output.summary", text_of(c.summary_file)},
  };
  for (const auto& [key, value] : kv) {
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw ConfigError(key, "line " + std::to_string(value.line) + ": unknown key");
    }
    it->second(key, value);
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

}  // namespace fracvolt
