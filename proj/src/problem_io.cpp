#include "fixpoint/problem_io.hpp"

#include <charconv>
#include <cmath>
#include <ctime>
#include <fstream>

namespace fixpoint {

namespace {

const json& require_key(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) throw ParseError(path + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(path + ": missing required key \"" + key + "\"");
  return *it;
}

double require_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ParseError(path + ": expected a number");
  return j.get<double>();
}

std::int64_t require_integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ParseError(path + ": expected an integer");
  return j.get<std::int64_t>();
}

std::string require_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ParseError(path + ": expected a string");
  return j.get<std::string>();
}

Matrix matrix_from_json(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ParseError(path + ": expected a nonempty array of rows");
  const auto rows = static_cast<Index>(j.size());
  Index cols = -1;
  Matrix m;
  for (Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array()) throw ParseError(path + ": row " + std::to_string(r) + " is not an array");
    if (cols < 0) {
      cols = static_cast<Index>(row.size());
      if (cols < 1) throw ParseError(path + ": empty row");
      m.resize(rows, cols);
    } else if (static_cast<Index>(row.size()) != cols) {
      throw ParseError(path + ": ragged rows");
    }
    for (Index c = 0; c < cols; ++c) {
      m(r, c) = require_number(row[static_cast<std::size_t>(c)],
                               path + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
    }
  }
  return m;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename Fn>
auto rewrap(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const ValidationError& e) {
    throw ParseError(path + ": " + e.what());
  } catch (const DimensionError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace

json vector_to_json(const Vector& v) {
  json arr = json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Vector vector_from_json(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ParseError(path + ": expected a nonempty array of numbers");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Index>(i)) = require_number(j[i], path + "[" + std::to_string(i) + "]");
    if (!std::isfinite(v(static_cast<Index>(i)))) {
      throw ParseError(path + "[" + std::to_string(i) + "]: entries must be finite");
    }
  }
  return v;
}

json operator_to_json(const NonexpansiveOp& op) {
  json j;
  j["kind"] = op.kind_name();
  std::visit(
      [&j](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, HalfspaceProjection> ||
                      std::is_same_v<T, HyperplaneProjection>) {
          j["a"] = vector_to_json(p.a);
          j["b"] = p.b;
        } else if constexpr (std::is_same_v<T, BallProjection>) {
          j["center"] = vector_to_json(p.center);
          j["radius"] = p.radius;
        } else if constexpr (std::is_same_v<T, BoxProjection>) {
          j["lo"] = vector_to_json(p.lo);
          j["hi"] = vector_to_json(p.hi);
        } else if constexpr (std::is_same_v<T, AffineProjection>) {
          json basis = json::array();
          for (const auto& v : p.basis) basis.push_back(vector_to_json(v));
          j["basis"] = std::move(basis);
          j["offset"] = vector_to_json(p.offset);
        } else if constexpr (std::is_same_v<T, Composition>) {
          json ops = json::array();
          for (const auto& s : p.stages) ops.push_back(operator_to_json(s));
          j["ops"] = std::move(ops);
        } else if constexpr (std::is_same_v<T, Average>) {
          j["theta"] = p.theta;
          j["inner"] = operator_to_json(*p.inner);
        } else {
          j["dim"] = p.dim;
        }
      },
      op.payload());
  return j;
}

NonexpansiveOp operator_from_json(const json& j, std::optional<Index> ambient_dim,
                                  const std::string& path) {
  const std::string kind = require_string(require_key(j, "kind", path), path + ".kind");
  return rewrap(path, [&]() -> NonexpansiveOp {
    if (kind == "halfspace") {
      return NonexpansiveOp::halfspace(vector_from_json(require_key(j, "a", path), path + ".a"),
                                       require_number(require_key(j, "b", path), path + ".b"));
    }
    if (kind == "hyperplane") {
      return NonexpansiveOp::hyperplane(vector_from_json(require_key(j, "a", path), path + ".a"),
                                        require_number(require_key(j, "b", path), path + ".b"));
    }
    if (kind == "ball") {
      return NonexpansiveOp::ball(
          vector_from_json(require_key(j, "center", path), path + ".center"),
          require_number(require_key(j, "radius", path), path + ".radius"));
    }
    if (kind == "box") {
      return NonexpansiveOp::box(vector_from_json(require_key(j, "lo", path), path + ".lo"),
                                 vector_from_json(require_key(j, "hi", path), path + ".hi"));
    }
    if (kind == "affine") {
      const json& basis_j = require_key(j, "basis", path);
      if (!basis_j.is_array()) throw ParseError(path + ".basis: expected an array");
      std::vector<Vector> basis;
      for (std::size_t i = 0; i < basis_j.size(); ++i) {
        basis.push_back(
            vector_from_json(basis_j[i], path + ".basis[" + std::to_string(i) + "]"));
      }
      return NonexpansiveOp::affine_subspace(
          std::move(basis), vector_from_json(require_key(j, "offset", path), path + ".offset"));
    }
    if (kind == "composition") {
      const json& ops_j = require_key(j, "ops", path);
      if (!ops_j.is_array()) throw ParseError(path + ".ops: expected an array");
      std::vector<NonexpansiveOp> ops;
      for (std::size_t i = 0; i < ops_j.size(); ++i) {
        ops.push_back(operator_from_json(ops_j[i], ambient_dim,
                                         path + ".ops[" + std::to_string(i) + "]"));
      }
      return compose(std::move(ops));
    }
    if (kind == "average") {
      return NonexpansiveOp::average(
          require_number(require_key(j, "theta", path), path + ".theta"),
          operator_from_json(require_key(j, "inner", path), ambient_dim, path + ".inner"));
    }
    if (kind == "identity") {
      if (j.contains("dim")) {
        return NonexpansiveOp::identity(require_integer(j["dim"], path + ".dim"));
      }
      if (ambient_dim) return NonexpansiveOp::identity(*ambient_dim);
      throw ParseError(path + ": identity needs \"dim\" outside a problem file");
    }
    throw ParseError(path + ".kind: unknown operator kind \"" + kind + "\"");
  });
}

json contraction_to_json(const Contraction& f) {
  json j;
  j["kind"] = f.kind_name();
  std::visit(
      [&j](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ConstantMap>) {
          j["u"] = vector_to_json(p.u);
        } else if constexpr (std::is_same_v<T, AffineShrink>) {
          j["c"] = p.c;
          j["anchor"] = vector_to_json(p.anchor);
        } else {
          j["matrix"] = matrix_to_json(p.m);
        }
      },
      f.payload());
  return j;
}

Contraction contraction_from_json(const json& j, const std::string& path) {
  const std::string kind = require_string(require_key(j, "kind", path), path + ".kind");
  return rewrap(path, [&]() -> Contraction {
    if (kind == "constant") {
      return Contraction::constant(vector_from_json(require_key(j, "u", path), path + ".u"));
    }
    if (kind == "affine-shrink") {
      return Contraction::affine_shrink(
          require_number(require_key(j, "c", path), path + ".c"),
          vector_from_json(require_key(j, "anchor", path), path + ".anchor"));
    }
    if (kind == "linear") {
      return Contraction::linear(matrix_from_json(require_key(j, "matrix", path), path + ".matrix"));
    }
    throw ParseError(path + ".kind: unknown contraction kind \"" + kind + "\"");
  });
}

json monotone_to_json(const MonotoneOperator& a) {
  json j;
  j["kind"] = a.kind_name();
  std::visit(
      [&j](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, IdentityMinus>) {
          j["b"] = vector_to_json(p.b);
        } else if constexpr (std::is_same_v<T, SpdMatrix>) {
          j["matrix"] = matrix_to_json(p.m);
        } else {
          j["d"] = vector_to_json(p.d);
        }
      },
      a.payload());
  j["k"] = a.lipschitz();
  j["eta"] = a.strong_monotonicity();
  return j;
}

MonotoneOperator monotone_from_json(const json& j, const std::string& path) {
  const std::string kind = require_string(require_key(j, "kind", path), path + ".kind");
  std::optional<double> k, eta;
  if (j.contains("k")) k = require_number(j["k"], path + ".k");
  if (j.contains("eta")) eta = require_number(j["eta"], path + ".eta");
  return rewrap(path, [&]() -> MonotoneOperator {
    if (kind == "identity-minus") {
      Vector b = vector_from_json(require_key(j, "b", path), path + ".b");
      if (k || eta) {
        return MonotoneOperator::identity_minus_declared(std::move(b), k.value_or(1.0),
                                                         eta.value_or(1.0));
      }
      return MonotoneOperator::identity_minus(std::move(b));
    }
    if (kind == "spd") {
      return MonotoneOperator::spd(matrix_from_json(require_key(j, "matrix", path), path + ".matrix"),
                                   k, eta);
    }
    if (kind == "diagonal") {
      return MonotoneOperator::diagonal(vector_from_json(require_key(j, "d", path), path + ".d"),
                                        k, eta);
    }
    throw ParseError(path + ".kind: unknown monotone operator kind \"" + kind + "\"");
  });
}

json schedule_to_json(const Schedule& s) {
  json j;
  j["kind"] = s.kind_name();
  if (const auto* pw = std::get_if<Schedule::Power>(&s.payload())) {
    j["c"] = pw->c;
    j["p"] = pw->p;
  } else {
    j["values"] = std::get<Schedule::Explicit>(s.payload()).values;
  }
  return j;
}

Schedule schedule_from_json(const json& j, const std::string& path) {
  const std::string kind = require_string(require_key(j, "kind", path), path + ".kind");
  return rewrap(path, [&]() -> Schedule {
    if (kind == "power") {
      return Schedule::power(require_number(require_key(j, "c", path), path + ".c"),
                             require_number(require_key(j, "p", path), path + ".p"));
    }
    if (kind == "explicit") {
      const json& vals = require_key(j, "values", path);
      if (!vals.is_array()) throw ParseError(path + ".values: expected an array");
      std::vector<double> values;
      values.reserve(vals.size());
      for (std::size_t i = 0; i < vals.size(); ++i) {
        values.push_back(require_number(vals[i], path + ".values[" + std::to_string(i) + "]"));
      }
      return Schedule::explicit_values(std::move(values));
    }
    throw ParseError(path + ".kind: unknown schedule kind \"" + kind + "\"");
  });
}

SchemeParams Problem::scheme_params() const {
  return SchemeParams{family, f, a, mu, gamma, schedule};
}

Vector Problem::start_point() const { return x0 ? *x0 : Vector::Zero(dimension); }

Problem parse_problem(const json& j) {
  const std::string root = "problem";
  const auto dimension =
      static_cast<Index>(require_integer(require_key(j, "dimension", root), root + ".dimension"));
  if (dimension < 1) throw ParseError(root + ".dimension: must be >= 1");

  const json& family_j = require_key(j, "family", root);
  if (!family_j.is_array() || family_j.empty()) {
    throw ParseError(root + ".family: expected a nonempty array of operator descriptors");
  }
  std::vector<NonexpansiveOp> family;
  for (std::size_t i = 0; i < family_j.size(); ++i) {
    family.push_back(operator_from_json(family_j[i], dimension,
                                        root + ".family[" + std::to_string(i) + "]"));
    if (family.back().dim() != dimension) {
      throw ParseError(root + ".family[" + std::to_string(i) +
                       "]: operator dimension does not match problem dimension");
    }
  }

  Contraction f = contraction_from_json(require_key(j, "f", root), root + ".f");
  if (f.dim() != dimension) throw ParseError(root + ".f: dimension does not match the problem");
  MonotoneOperator a = monotone_from_json(require_key(j, "A", root), root + ".A");
  if (a.dim() != dimension) throw ParseError(root + ".A: dimension does not match the problem");

  const double mu = require_number(require_key(j, "mu", root), root + ".mu");
  const double gamma = require_number(require_key(j, "gamma", root), root + ".gamma");
  Schedule schedule = schedule_from_json(require_key(j, "schedule", root), root + ".schedule");

  std::optional<Vector> x0;
  if (j.contains("x0") && !j["x0"].is_null()) {
    x0 = vector_from_json(j["x0"], root + ".x0");
    if (x0->size() != dimension) throw ParseError(root + ".x0: dimension does not match");
  }

  StoppingRule stopping;
  if (j.contains("stopping")) {
    const json& sj = j["stopping"];
    if (!sj.is_object()) throw ParseError(root + ".stopping: expected an object");
    if (sj.contains("eps_fix")) stopping.eps_fix = require_number(sj["eps_fix"], root + ".stopping.eps_fix");
    if (sj.contains("eps_vi")) stopping.eps_vi = require_number(sj["eps_vi"], root + ".stopping.eps_vi");
    if (sj.contains("max_iter")) stopping.max_iter = require_integer(sj["max_iter"], root + ".stopping.max_iter");
    if (sj.contains("check_every")) stopping.check_every = require_integer(sj["check_every"], root + ".stopping.check_every");
  }

  VIOracleParams oracle;
  if (j.contains("oracle")) {
    const json& oj = j["oracle"];
    if (!oj.is_object()) throw ParseError(root + ".oracle: expected an object");
    if (oj.contains("s")) oracle.step = require_number(oj["s"], root + ".oracle.s");
    if (oj.contains("tol")) oracle.tol = require_number(oj["tol"], root + ".oracle.tol");
    if (oj.contains("max_iter")) oracle.max_iter = require_integer(oj["max_iter"], root + ".oracle.max_iter");
  }

  return Problem{dimension, std::move(family), std::move(f),      std::move(a), mu,
                 gamma,     std::move(schedule), std::move(x0),   stopping,     oracle};
}

Problem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open problem file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON in ") + path + ": " + e.what());
  }
  return parse_problem(j);
}

json problem_to_json(const Problem& p) {
  json j;
  j["dimension"] = p.dimension;
  json family = json::array();
  for (const auto& t : p.family) family.push_back(operator_to_json(t));
  j["family"] = std::move(family);
  j["f"] = contraction_to_json(p.f);
  j["A"] = monotone_to_json(p.a);
  j["mu"] = p.mu;
  j["gamma"] = p.gamma;
  j["schedule"] = schedule_to_json(p.schedule);
  if (p.x0) j["x0"] = vector_to_json(*p.x0);
  j["stopping"] = {{"eps_fix", p.stopping.eps_fix},
                   {"eps_vi", p.stopping.eps_vi},
                   {"max_iter", p.stopping.max_iter},
                   {"check_every", p.stopping.check_every}};
  json oracle;
  if (p.oracle.step) oracle["s"] = *p.oracle.step;
  oracle["tol"] = p.oracle.tol;
  oracle["max_iter"] = p.oracle.max_iter;
  j["oracle"] = std::move(oracle);
  return j;
}

json schedule_report_to_json(const ScheduleReport& rep) {
  json j;
  j["limit_zero"] = to_string(rep.limit_zero);
  j["divergent_sum"] = to_string(rep.divergent_sum);
  j["cyclic_ratio"] = to_string(rep.cyclic_ratio);
  j["alpha_at_horizon"] = rep.alpha_at_horizon;
  j["ratio_at_horizon"] = rep.ratio_at_horizon;
  j["horizon"] = rep.horizon_used;
  if (!rep.detail.empty()) j["detail"] = rep.detail;
  return j;
}

json report_to_json(const ConvergenceReport& rep) {
  json j;
  j["final_point"] = vector_to_json(rep.final_point);
  j["iterations"] = rep.iterations;
  j["stop_reason"] = to_string(rep.reason);
  j["residuals"] = {{"step", rep.step_residual},
                    {"window", rep.window_residual},
                    {"composite", rep.composite_residual},
                    {"vi", rep.vi_residual}};
  j["hypothesis_flags"] = {
      {"schedule", schedule_report_to_json(rep.schedule)},
      {"family_fixed_point_equality",
       rep.family_firmly_nonexpansive ? "guaranteed" : "assumed"},
      {"vi_oracle", rep.vi_oracle_available ? "available" : "unsupported"}};
  return j;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_trace_csv(std::ostream& os, const IterationTrace& trace, bool with_timestamp,
                     bool with_iterates) {
  if (with_timestamp) {
    std::time_t now = std::time(nullptr);
    char stamp[64];
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    os << "# fixpoint-vi trace " << stamp << "\n";
  }
  const bool emit_x = with_iterates && trace.has_iterates;
  os << "n,alpha_n,step_residual,window_residual,composite_residual,vi_residual";
  if (emit_x && !trace.records.empty()) {
    for (Index i = 0; i < trace.records.front().x.size(); ++i) os << ",x" << i;
  }
  os << "\n";
  for (const auto& r : trace.records) {
    os << r.n << ',' << format_double(r.alpha) << ',' << format_double(r.step_residual) << ','
       << format_double(r.window_residual) << ',' << format_double(r.composite_residual) << ','
       << format_double(r.vi_residual);
    if (emit_x) {
      for (Index i = 0; i < r.x.size(); ++i) os << ',' << format_double(r.x(i));
    }
    os << "\n";
  }
}

}  // namespace fixpoint
