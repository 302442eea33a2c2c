#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "fixpoint/hilbert.hpp"

namespace fixpoint {

/// Step-size sequence {alpha_n} in (0,1), n >= 1.
///
/// The power family alpha_n = min(c / (n+1)^p, 0.999) is the schedule this
/// library recommends: for p in (0,1] it satisfies all three convergence
/// conditions below with a closed-form cyclic ratio. Construction admits any
/// p > 0 so that out-of-range exponents can be fed to the validator and
/// rejected there rather than silently.
class Schedule {
 public:
  struct Power {
    double c;
    double p;
  };
  struct Explicit {
    std::vector<double> values;
  };
  using Payload = std::variant<Power, Explicit>;

  static Schedule power(double c, double p);
  static Schedule explicit_values(std::vector<double> values);

  /// alpha_n for n >= 1. Explicit schedules throw std::out_of_range past
  /// their last entry.
  double alpha(std::int64_t n) const;

  /// Largest n for which alpha(n) is defined (INT64_MAX for power).
  std::int64_t horizon_limit() const;

  std::string kind_name() const;
  const Payload& payload() const { return payload_; }

 private:
  explicit Schedule(Payload p) : payload_(std::move(p)) {}
  Payload payload_;
};

enum class Verdict { pass, fail, unverifiable };

std::string to_string(Verdict v);

/// Verdicts for the three step-size conditions required by the convergence
/// theorem: (i) alpha_n -> 0, (ii) sum alpha_n = inf, (iii) the cyclic ratio
/// alpha_n / alpha_{n+N} -> 1.
struct ScheduleReport {
  Verdict limit_zero;      // (i)
  Verdict divergent_sum;   // (ii)
  Verdict cyclic_ratio;    // (iii)
  double alpha_at_horizon;
  double ratio_at_horizon;
  std::int64_t horizon_used;  // may be clamped for finite explicit schedules
  std::string detail;

  bool all_pass() const {
    return limit_zero == Verdict::pass && divergent_sum == Verdict::pass &&
           cyclic_ratio == Verdict::pass;
  }
};

/// Checks the three conditions over a finite horizon. (i) and (iii) are
/// numeric: value below threshold at the horizon plus monotone behavior over
/// the last decade of indices. (ii) is decided symbolically for the power
/// family (divergent iff p <= 1) and reported unverifiable for explicit
/// sequences; a limit property cannot be claimed from a finite prefix.
ScheduleReport validate(const Schedule& s, int family_size, std::int64_t horizon);

}  // namespace fixpoint
