#pragma once

#include <string>

#include <json.hpp>

#include "fracmeas/solver.hpp"

namespace fracmeas {

// Ordered JSON keeps object keys in insertion order, which is what makes
// report files byte-identical across runs.
using json = nlohmann::ordered_json;

// Reals in config files may be JSON numbers, rational strings "p/q", or
// decimal strings. A rational evaluates as the double quotient p/q, so "2/3"
// parses to exactly the double the engine computes for 2.0/3.0 and probe
// points land on atom positions bit for bit.
double parse_real(const json& j);

// Shortest decimal that round-trips back to the same double; used for CSV.
std::string format_double(double x);

json measure_to_json(const VectorMeasure& mu);
VectorMeasure measure_from_json(const json& j);
// Columns: kind ("atom" or "cell"), location (position or cell index),
// v_1..v_n. Zero cells are omitted; the dump is an export, not a round-trip
// format.
std::string measure_to_csv(const VectorMeasure& mu);

json mat_to_json(const Mat& R);
Mat mat_from_json(const json& j);

json borel_to_json(const BorelSet& B);
// Accepts {"intervals": [{"lo","hi","lo_closed","hi_closed"}...],
// "points": [...]}, the string "full", a bare number (single point), or
// [lo, hi] (closed interval). Endpoint flags default to closed.
BorelSet borel_from_json(const json& j);

json operator_to_json(const MarkovOperator& op);
// {"terms":[{"map":{"a":..,"b":..},"R":[[..]..]}..], "model":"H"|"H1"|"H2",
// "mu0": <measure, H2 only>, "v": [..] (H1 only)}.
MarkovOperator operator_from_json(const json& j);

const char* metric_name(Metric m);
json solve_report_to_json(const SolveReport& rep);
// Columns: iteration, variation_distance_to_prev, atom_count, pruning_budget.
std::string trace_to_csv(const std::vector<TraceRow>& trace);

std::string read_file(const std::string& path);
// Writes to a temp file in the target directory and renames it into place,
// so an interrupted run never leaves a partial file behind.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace fracmeas
