#include "fracvolt/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

namespace fracvolt {

namespace {

std::string fmt17(Scalar v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void write_trace_csv(std::ostream& os, const GridFunction& u) {
  const Index m = u.dim();
  os << "t";
  for (Index i = 1; i <= m; ++i) os << ",u_" << i;
  os << "\n";
  const TimeMesh& mesh = u.mesh();
  for (Index n = 0; n < u.node_count(); ++n) {
    os << fmt17(mesh[n]);
    for (Index i = 0; i < m; ++i) os << ',' << fmt17(u.values()(i, n));
    os << "\n";
  }
}

void write_trace_csv(const std::string& path, const GridFunction& u) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_trace_csv(out, u);
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

TraceTable read_trace_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ValidationError("trace CSV: missing header");
  const auto header = split_csv(line);
  if (header.empty() || header[0] != "t") throw ValidationError("trace CSV: header must start with t");
  const Index m = static_cast<Index>(header.size()) - 1;
  for (Index i = 1; i <= m; ++i) {
    if (header[static_cast<std::size_t>(i)] != "u_" + std::to_string(i)) {
      throw ValidationError("trace CSV: unexpected column '" + header[static_cast<std::size_t>(i)] +
                            "'");
    }
  }
  TraceTable table;
  std::vector<std::vector<Scalar>> cols;
  int row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (static_cast<Index>(cells.size()) != m + 1) {
      throw ValidationError("trace CSV: row " + std::to_string(row) + " has " +
                            std::to_string(cells.size()) + " fields");
    }
    std::vector<Scalar> vals;
    for (const auto& c : cells) {
      char* end = nullptr;
      const Scalar v = std::strtod(c.c_str(), &end);
      if (c.empty() || *end != '\0') {
        throw ValidationError("trace CSV: row " + std::to_string(row) + ": bad number '" + c + "'");
      }
      vals.push_back(v);
    }
    table.times.push_back(vals[0]);
    cols.emplace_back(vals.begin() + 1, vals.end());
  }
  table.values.resize(m, static_cast<Index>(cols.size()));
  for (std::size_t n = 0; n < cols.size(); ++n) {
    for (Index i = 0; i < m; ++i) table.values(i, static_cast<Index>(n)) = cols[n][static_cast<std::size_t>(i)];
  }
  return table;
}

TraceTable read_trace_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_trace_csv(in);
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json json_number(Scalar v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json to_json(const InequalityRecord& r) {
  Json j;
  j["name"] = r.name;
  j["lhs"] = json_number(r.lhs);
  j["rhs"] = json_number(r.rhs);
  j["margin"] = json_number(r.margin);
  j["pass"] = r.pass;
  Json params = Json::object();
  for (const auto& [k, v] : r.params) params[k] = json_number(v);
  j["params"] = params;
  return j;
}

Json to_json(const AprioriDiagnostics& d) {
  const auto ratio = [](const Ratio& r) {
    return r.applicable ? json_number(r.value) : Json(nullptr);
  };
  Json j;
  j["q1_ratio"] = ratio(d.q1_ratio);
  j["q0_ratio"] = ratio(d.q0_ratio);
  j["pointwise_ratio"] = ratio(d.pointwise_ratio);
  j["decay_excess"] = json_number(d.decay_excess);
  j["holder_delta"] = json_number(d.holder_delta);
  Json table = Json::array();
  for (const auto& h : d.holder) {
    table.push_back({{"t1", json_number(h.t1)}, {"t2", json_number(h.t2)},
                     {"modulus", json_number(h.modulus)}});
  }
  j["holder"] = table;
  return j;
}

Json to_json(const RunConfig& c) {
  Json j;
  j["alpha"] = c.alpha;
  j["T"] = c.T;
  j["N"] = c.N;
  j["grading"] = c.effective_grading();
  j["scheme"] = to_string(c.scheme);
  j["seed"] = c.seed;
  j["basis"] = {{"kind", to_string(c.basis)}, {"dim", c.dim}};
  j["coefficients"] = {{"kappa", c.kappa}, {"F", c.F}, {"G", c.G}, {"a", c.a}, {"b", c.b}};
  j["source"] = {{"u0", c.u0}, {"g", c.g}, {"eta", c.eta}, {"M_bound", c.M_bound}};
  return j;
}

Json run_summary(const RunConfig& config, const SolutionTrace& trace, Scalar rescale_factor,
                 const AprioriDiagnostics* diagnostics, const std::vector<std::string>& notes) {
  Json j;
  j["generated_at"] = utc_timestamp();
  j["config"] = to_json(config);
  j["scheme"] = to_string(trace.scheme);
  j["nodes"] = trace.u.node_count();
  j["residual_max"] = json_number(trace.residual.size() ? trace.residual.maxCoeff() : 0.0);
  j["wall_seconds"] = trace.wall_seconds;
  j["flops"] = trace.flops;
  j["time_rescale_factor"] = rescale_factor;
  j["final_l2_norm"] = json_number(trace.l2_norm(trace.u.node_count() - 1));
  if (!trace.picard_term_norms.empty()) {
    Json terms = Json::array();
    for (Scalar v : trace.picard_term_norms) terms.push_back(json_number(v));
    j["picard_term_norms"] = terms;
  }
  j["diagnostics"] = diagnostics ? to_json(*diagnostics) : Json(nullptr);
  Json warnings = Json::array();
  for (const auto& w : trace.warnings) warnings.push_back(w);
  for (const auto& w : notes) warnings.push_back(w);
  j["warnings"] = warnings;
  return j;
}

void write_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << j.dump(2) << "\n";
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace fracvolt
