#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracvolt/config.hpp"
#include "fracvolt/energy.hpp"
#include "fracvolt/volterra.hpp"

namespace fracvolt {

using Json = nlohmann::ordered_json;

/// Nodal times and coefficient columns as read back from a trace CSV.
struct TraceTable {
  std::vector<Scalar> times;
  /// m x (N + 1), column n at times[n].
  Matrix values;
};

/// Header `t,u_1,...,u_m`, one row per node, 17 significant digits.
void write_trace_csv(std::ostream& os, const GridFunction& u);
/// Throws IoError on I/O errors.
void write_trace_csv(const std::string& path, const GridFunction& u);

/// Inverse of write_trace_csv. Throws ValidationError on malformed input.
TraceTable read_trace_csv(std::istream& is);
TraceTable read_trace_csv_file(const std::string& path);

/// Current UTC time, ISO 8601.
std::string utc_timestamp();

/// Finite doubles as numbers, NaN and infinities as null.
Json json_number(Scalar v);

Json to_json(const InequalityRecord& r);
Json to_json(const AprioriDiagnostics& d);
Json to_json(const RunConfig& c);

/// Run summary: residual max, wall time, flop estimate, diagnostics,
/// warnings. The timestamp sits in the single field "generated_at".
Json run_summary(const RunConfig& config, const SolutionTrace& trace, Scalar rescale_factor,
                 const AprioriDiagnostics* diagnostics, const std::vector<std::string>& notes);

/// Pretty-printed JSON with a trailing newline. Throws IoError.
void write_json(const std::string& path, const Json& j);

}  // namespace fracvolt
