#include "lasertune/aging_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "lasertune/errors.hpp"

namespace lasertune {

void AgingSeries::validate() const {
  if (samples.empty()) throw DomainError("aging series '" + junction_id + "' has no samples");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!(samples[i].resistance_ohm > 0.0)) {
      throw DomainError("aging series '" + junction_id + "' has a non-positive resistance");
    }
    if (i > 0 && samples[i].day < samples[i - 1].day) {
      throw DomainError("aging series '" + junction_id + "' days are not sorted");
    }
  }
}

double AgingSeries::reference_resistance() const {
  return r0_ohm > 0.0 ? r0_ohm : samples.front().resistance_ohm;
}

double aging_shift(double day, const AgingParams& p) {
  if (!(day >= 0.0)) throw DomainError("aging day must be non-negative");
  return p.final_shift_a - p.depth_b * std::exp(-day / p.tau_days);
}

double combined_shift(double day, const AgingParams& aging, double anneal_shift) {
  return aging_shift(day, aging) + anneal_shift;
}

bool AgingFit::tau_identified() const {
  return fit.error("tau_days") <= std::abs(params.tau_days);
}

AgingFit fit_aging_points(std::span<const double> days, std::span<const double> shifts) {
  if (days.size() != shifts.size()) throw DomainError("days and shifts differ in length");
  std::map<double, std::pair<double, int>> by_day;
  for (std::size_t i = 0; i < days.size(); ++i) {
    auto& [sum, count] = by_day[days[i]];
    sum += shifts[i];
    ++count;
  }
  if (by_day.size() < 4) throw DomainError("aging fit needs at least 4 distinct days");

  const auto& [first_day, first] = *by_day.begin();
  const auto& [last_day, last] = *by_day.rbegin();
  const double a0 = last.first / last.second;
  const double initial = first.first / first.second;
  const double tau0 = (last_day - first_day) / 3.0;

  ModelSpec model;
  model.name = "aging";
  model.parameter_names = {"final_shift_a", "depth_b", "tau_days"};
  model.evaluate = [](std::span<const double> p, std::span<const double> x) {
    return p[0] - p[1] * std::exp(-x[0] / p[2]);
  };
  model.gradient = [](std::span<const double> p, std::span<const double> x, std::span<double> g) {
    const double e = std::exp(-x[0] / p[2]);
    g[0] = 1.0;
    g[1] = -e;
    g[2] = -p[1] * e * x[0] / (p[2] * p[2]);
  };
  model.bounds = {std::nullopt, std::nullopt, ParameterBounds{1e-6, 1e6}};
  const std::vector<double> init = {a0, a0 - initial, std::max(tau0, 1e-3)};

  AgingFit out;
  out.fit = fit_curve(model, Dataset::from_xy(days, shifts), init);
  out.params = {out.fit.params[0], out.fit.params[1], out.fit.params[2]};
  return out;
}

AgingFit fit_aging(std::span<const AgingSeries> cohort) {
  std::vector<double> days;
  std::vector<double> shifts;
  for (const auto& s : cohort) {
    s.validate();
    const double r0 = s.reference_resistance();
    for (const auto& sample : s.samples) {
      days.push_back(sample.day);
      shifts.push_back(sample.resistance_ohm / r0 - 1.0);
    }
  }
  return fit_aging_points(days, shifts);
}

AgingFit fit_aging(const AgingSeries& series) {
  return fit_aging(std::span<const AgingSeries>(&series, 1));
}

OffsetReport offset_preservation(const AgingParams& annealed, const AgingParams& unannealed,
                                 double horizon_days) {
  if (!(horizon_days > 0.0)) throw DomainError("horizon must be positive");
  auto gap = [&](double t) { return aging_shift(t, annealed) - aging_shift(t, unannealed); };
  OffsetReport r;
  r.initial_gap = gap(0.0);
  r.final_gap = gap(horizon_days);
  constexpr int kSteps = 10000;
  for (int i = 0; i <= kSteps; ++i) {
    const double t = horizon_days * i / kSteps;
    r.max_drift = std::max(r.max_drift, std::abs(gap(t) - r.initial_gap));
  }
  return r;
}

}  // namespace lasertune
