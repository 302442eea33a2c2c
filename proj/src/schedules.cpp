#include "fixpoint/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fixpoint {

namespace {

constexpr double kAlphaCap = 0.999;        // keeps power schedules inside (0,1)
constexpr double kLimitThreshold = 0.01;   // condition (i): alpha at horizon
constexpr double kRatioThreshold = 0.01;   // condition (iii): |ratio - 1| at horizon
constexpr double kMonotoneSlack = 1e-12;

}  // namespace

Schedule Schedule::power(double c, double p) {
  if (!(c > 0.0)) throw ValidationError("schedule power: c must be > 0");
  if (!(p > 0.0)) throw ValidationError("schedule power: p must be > 0");
  return Schedule(Power{c, p});
}

Schedule Schedule::explicit_values(std::vector<double> values) {
  if (values.empty()) throw ValidationError("schedule explicit: empty value list");
  for (double v : values) {
    if (!(v > 0.0) || !(v < 1.0)) {
      throw ValidationError("schedule explicit: all values must lie in (0,1)");
    }
  }
  return Schedule(Explicit{std::move(values)});
}

double Schedule::alpha(std::int64_t n) const {
  if (n < 1) throw std::out_of_range("schedule: index must be >= 1");
  if (const auto* pw = std::get_if<Power>(&payload_)) {
    return std::min(pw->c / std::pow(static_cast<double>(n) + 1.0, pw->p), kAlphaCap);
  }
  const auto& values = std::get<Explicit>(payload_).values;
  if (n > static_cast<std::int64_t>(values.size())) {
    throw std::out_of_range("schedule explicit: index " + std::to_string(n) +
                            " beyond provided " + std::to_string(values.size()) + " values");
  }
  return values[static_cast<std::size_t>(n - 1)];
}

std::int64_t Schedule::horizon_limit() const {
  if (std::holds_alternative<Power>(payload_)) return std::numeric_limits<std::int64_t>::max();
  return static_cast<std::int64_t>(std::get<Explicit>(payload_).values.size());
}

std::string Schedule::kind_name() const {
  return std::holds_alternative<Power>(payload_) ? "power" : "explicit";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    default: return "unverifiable";
  }
}

ScheduleReport validate(const Schedule& s, int family_size, std::int64_t horizon) {
  if (family_size < 1) throw ValidationError("validate schedule: family size must be >= 1");
  const std::int64_t n_max = s.horizon_limit();
  std::int64_t h = horizon;
  if (n_max != std::numeric_limits<std::int64_t>::max()) {
    h = std::min(h, n_max - family_size);  // ratio at n needs alpha_{n+N}
  }
  if (h < 10 * family_size) {
    throw ValidationError("validate schedule: horizon must allow at least 10*N indices");
  }

  ScheduleReport rep{};
  rep.horizon_used = h;
  std::string detail;

  // sample the last decade of indices on a geometric ladder
  const std::int64_t decade_start = std::max<std::int64_t>(1, h / 10);
  std::vector<std::int64_t> samples;
  for (int j = 0; j <= 16; ++j) {
    const double t = static_cast<double>(j) / 16.0;
    const auto n = static_cast<std::int64_t>(
        std::llround(static_cast<double>(decade_start) *
                     std::pow(static_cast<double>(h) / static_cast<double>(decade_start), t)));
    if (samples.empty() || n > samples.back()) samples.push_back(n);
  }

  // (i) alpha_n -> 0
  rep.alpha_at_horizon = s.alpha(h);
  bool tail_monotone = true;
  for (std::size_t j = 1; j < samples.size(); ++j) {
    if (s.alpha(samples[j]) > s.alpha(samples[j - 1]) + kMonotoneSlack) tail_monotone = false;
  }
  rep.limit_zero =
      (rep.alpha_at_horizon < kLimitThreshold && tail_monotone) ? Verdict::pass : Verdict::fail;
  if (rep.limit_zero == Verdict::fail) {
    detail += "(i) alpha at horizon = " + std::to_string(rep.alpha_at_horizon) +
              (tail_monotone ? "" : ", tail not monotonically decreasing") + "; ";
  }

  // (ii) sum alpha_n = inf: symbolic for the power family only
  if (const auto* pw = std::get_if<Schedule::Power>(&s.payload())) {
    rep.divergent_sum = (pw->p <= 1.0) ? Verdict::pass : Verdict::fail;
    if (rep.divergent_sum == Verdict::fail) {
      detail += "(ii) p = " + std::to_string(pw->p) + " > 1 gives a convergent series; ";
    }
  } else {
    rep.divergent_sum = Verdict::unverifiable;
    detail += "(ii) divergence of the series cannot be decided from a finite list; ";
  }

  // (iii) alpha_n / alpha_{n+N} -> 1
  const auto ratio_at = [&](std::int64_t n) { return s.alpha(n) / s.alpha(n + family_size); };
  rep.ratio_at_horizon = ratio_at(h);
  const double dev_h = std::abs(rep.ratio_at_horizon - 1.0);
  bool dev_decreasing = true;
  for (std::size_t j = 1; j < samples.size(); ++j) {
    const double prev = std::abs(ratio_at(samples[j - 1]) - 1.0);
    const double cur = std::abs(ratio_at(samples[j]) - 1.0);
    if (cur > prev + kMonotoneSlack) dev_decreasing = false;
  }
  rep.cyclic_ratio = (dev_h < kRatioThreshold && dev_decreasing) ? Verdict::pass : Verdict::fail;
  if (rep.cyclic_ratio == Verdict::fail) {
    detail += "(iii) ratio alpha_n/alpha_{n+N} at horizon = " +
              std::to_string(rep.ratio_at_horizon) +
              (dev_decreasing ? "" : ", deviation from 1 not shrinking") + "; ";
  }

  rep.detail = detail;
  return rep;
}

}  // namespace fixpoint
