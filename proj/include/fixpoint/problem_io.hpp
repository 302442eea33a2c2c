#pragma once

#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "fixpoint/solver.hpp"

namespace fixpoint {

using json = nlohmann::json;

/// Thrown on malformed problem files; the message carries the offending
/// field path (or the parser's line/byte diagnostic for bad JSON).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A fully described problem instance as read from a JSON problem file.
struct Problem {
  Index dimension;
  std::vector<NonexpansiveOp> family;
  Contraction f;
  MonotoneOperator a;
  double mu;
  double gamma;
  Schedule schedule;
  std::optional<Vector> x0;
  StoppingRule stopping;
  VIOracleParams oracle;

  SchemeParams scheme_params() const;
  Vector start_point() const;  // x0, or the zero vector when omitted
};

Problem parse_problem(const json& j);
Problem load_problem(const std::string& path);
json problem_to_json(const Problem& p);

json vector_to_json(const Vector& v);
Vector vector_from_json(const json& j, const std::string& path);

json operator_to_json(const NonexpansiveOp& op);
NonexpansiveOp operator_from_json(const json& j, std::optional<Index> ambient_dim = {},
                                  const std::string& path = "operator");

json contraction_to_json(const Contraction& f);
Contraction contraction_from_json(const json& j, const std::string& path = "f");

json monotone_to_json(const MonotoneOperator& a);
MonotoneOperator monotone_from_json(const json& j, const std::string& path = "A");

json schedule_to_json(const Schedule& s);
Schedule schedule_from_json(const json& j, const std::string& path = "schedule");

json report_to_json(const ConvergenceReport& rep);
json schedule_report_to_json(const ScheduleReport& rep);

/// One row per iteration; locale-independent shortest-round-trip number
/// formatting, so identical runs produce identical bytes. The timestamp
/// header line is opt-out for byte-for-byte reproducibility.
void write_trace_csv(std::ostream& os, const IterationTrace& trace, bool with_timestamp,
                     bool with_iterates);

/// Shortest representation that round-trips through double; "nan"/"inf" for
/// non-finite values.
std::string format_double(double v);

}  // namespace fixpoint
