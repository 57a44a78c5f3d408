#include "lasertune/tuner.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <sstream>

#include "lasertune/errors.hpp"

namespace lasertune {

double required_shift(Hertz f_now, Hertz f_target, const MaterialParams& mat) {
  if (!(f_target.value() > 0.0)) throw DomainError("target frequency must be positive");
  if (f_target > f_now) {
    throw InfeasibleError("target " + std::to_string(to_ghz(f_target)) + " GHz is above current " +
                          std::to_string(to_ghz(f_now)) +
                          " GHz; annealing only lowers the frequency");
  }
  const JunctionPhysics phys(mat);
  return phys.resistance_for_frequency(f_target).value() /
             phys.resistance_for_frequency(f_now).value() -
         1.0;
}

double power_for_shift(double target, const DoseModel& model, double exposure_s) {
  const double x = exposure_factor(exposure_s, 1, model.response);
  const auto& r = model.response;
  const double need = target / x;
  if (!(need < r.plateau_m)) throw DomainError("shift is at or above the dose plateau");
  // m - b exp(-T/T0) = need
  const double t = -r.char_temperature_c * std::log((r.plateau_m - need) / r.depth_b);
  return std::max(0.0, (t - model.heating.ambient_c) / model.heating.slope_c_per_mw);
}

double max_single_shift(const DoseModel& model, const PlanOptions& opts) {
  return mean_shift(LasingRecipe{opts.max_power_mw, opts.exposure_s, 1, 0.0}, model);
}

ShotPlan recipe_for_shift(double target_shift, const DoseModel& model, const PlanOptions& opts) {
  if (!(target_shift >= 0.0)) throw DomainError("target shift must be non-negative");
  if (!(opts.max_power_mw < kMaxPowerMw)) {
    throw DomainError("plan power cap must stay below the accelerated-growth threshold");
  }
  ShotPlan plan;
  plan.target_shift = target_shift;
  if (target_shift == 0.0) return plan;

  const double s_max = max_single_shift(model, opts);
  const LasingRecipe base{opts.default_power_mw, opts.exposure_s, 1, 0.0};
  const double g = 1.0 + mean_shift(base, model);

  int k = 0;
  double rest = target_shift;
  while (rest > s_max && g > 1.0 && k < opts.max_shots) {
    ++k;
    rest = (1.0 + target_shift) / std::pow(g, k) - 1.0;
  }
  const int total = k + (rest > 0.0 ? 1 : 0);
  if (rest > s_max || total > opts.max_shots) {
    const double bound = std::pow(g, opts.max_shots - 1) * (1.0 + s_max) - 1.0;
    std::ostringstream msg;
    msg << "shift " << target_shift << " needs " << total << " shots; at most "
        << opts.max_shots << " allowed, reaching " << bound;
    throw InfeasibleError(msg.str());
  }
  plan.shots.assign(static_cast<std::size_t>(k), base);
  double product = std::pow(g, k);
  if (rest > 0.0) {
    LasingRecipe last = base;
    last.power_mw = power_for_shift(rest, model, opts.exposure_s);
    plan.shots.push_back(last);
    product *= 1.0 + mean_shift(last, model);
  }
  plan.planned_shift = product - 1.0;
  return plan;
}

void TunePolicy::validate() const {
  if (!(step_fraction > 0.0 && step_fraction <= 1.0)) {
    throw DomainError("step fraction must lie in (0, 1]");
  }
  if (!(tolerance > 0.0)) throw DomainError("tolerance must be positive");
  if (max_iterations < 0) throw DomainError("max iterations must be non-negative");
  if (!(measurement_noise_sigma >= 0.0)) throw DomainError("measurement noise must be non-negative");
}

const char* to_string(TuneOutcome o) {
  switch (o) {
    case TuneOutcome::converged: return "converged";
    case TuneOutcome::overshoot: return "overshoot";
    case TuneOutcome::exhausted: return "exhausted";
  }
  return "exhausted";
}

int TuneTrace::iterations() const {
  return static_cast<int>(std::count_if(steps.begin(), steps.end(),
                                        [](const TuneStep& s) { return !s.shots.empty(); }));
}

double TuneTrace::final_true_r_ohm() const {
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
    if (!it->shots.empty()) return it->true_r_after_ohm;
  }
  return initial_r_ohm;
}

TuneTrace iterative_tune(const std::string& junction_id, double resistance_ohm, Hertz f_target,
                         const TunePolicy& policy, const DoseModel& model, RngStream& rng,
                         const PlanOptions& opts, const MaterialParams& mat) {
  policy.validate();
  const JunctionPhysics phys(mat);
  const Hertz f_start = phys.qubit_frequency(Ohms(resistance_ohm));
  if ((f_target.value() - f_start.value()) / f_target.value() > policy.tolerance) {
    (void)required_shift(f_start, f_target, mat);
  }
  const double r_target = phys.resistance_for_frequency(f_target).value();

  TuneTrace trace;
  trace.junction_id = junction_id;
  trace.target_f_hz = f_target.value();
  trace.initial_r_ohm = resistance_ohm;

  JunctionState state;
  state.resistance_ohm = resistance_ohm;
  for (int round = 0;; ++round) {
    TuneStep step;
    step.measured_r_ohm =
        state.resistance_ohm * (1.0 + policy.measurement_noise_sigma * rng.normal());
    step.inferred_f_hz = phys.qubit_frequency(Ohms(step.measured_r_ohm)).value();
    step.relative_error = (step.inferred_f_hz - f_target.value()) / f_target.value();
    step.true_r_after_ohm = state.resistance_ohm;

    if (std::abs(step.relative_error) <= policy.tolerance) {
      trace.outcome = TuneOutcome::converged;
    } else if (step.relative_error < -policy.tolerance) {
      trace.outcome = TuneOutcome::overshoot;
    } else if (round >= policy.max_iterations) {
      trace.outcome = TuneOutcome::exhausted;
    } else {
      const double remaining = r_target / step.measured_r_ohm - 1.0;
      const ShotPlan plan = recipe_for_shift(policy.step_fraction * remaining, model, opts);
      const double r_before = state.resistance_ohm;
      for (const auto& shot : plan.shots) state = apply_anneal(state, shot, model, rng);
      step.shots = plan.shots;
      step.planned_shift = plan.planned_shift;
      step.sampled_shift = state.resistance_ohm / r_before - 1.0;
      step.true_r_after_ohm = state.resistance_ohm;
      trace.steps.push_back(std::move(step));
      continue;
    }
    trace.steps.push_back(std::move(step));
    return trace;
  }
}

std::vector<TuneTrace> tune_population(std::span<const TuneJob> jobs, const TunePolicy& policy,
                                       const DoseModel& model, std::uint64_t master_seed,
                                       Execution exec, const PlanOptions& opts,
                                       const MaterialParams& mat) {
  policy.validate();
  std::vector<TuneTrace> out(jobs.size());
  auto run = [&](std::size_t i) {
    RngStream rng(derive_seed(master_seed, jobs[i].junction_id));
    out[i] = iterative_tune(jobs[i].junction_id, jobs[i].resistance_ohm, Hertz(jobs[i].target_f_hz),
                            policy, model, rng, opts, mat);
  };
  if (exec == Execution::parallel) {
    // Exceptions may not leave an OpenMP region; capture the first by index.
    std::vector<std::exception_ptr> errors(jobs.size());
    const auto total = static_cast<std::int64_t>(jobs.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t i = 0; i < total; ++i) {
      try {
        run(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  } else {
    for (std::size_t i = 0; i < jobs.size(); ++i) run(i);
  }
  return out;
}

TuneSummary summarize(std::span<const TuneTrace> traces) {
  TuneSummary s;
  s.count = traces.size();
  double iters = 0.0;
  for (const auto& t : traces) {
    const int n = t.iterations();
    iters += n;
    switch (t.outcome) {
      case TuneOutcome::converged:
        ++s.converged;
        if (n <= 5) ++s.converged_within_5;
        if (s.iteration_histogram.size() <= static_cast<std::size_t>(n)) {
          s.iteration_histogram.resize(static_cast<std::size_t>(n) + 1, 0);
        }
        ++s.iteration_histogram[static_cast<std::size_t>(n)];
        break;
      case TuneOutcome::overshoot: ++s.overshoot; break;
      case TuneOutcome::exhausted: ++s.exhausted; break;
    }
  }
  if (s.count > 0) s.mean_iterations = iters / static_cast<double>(s.count);
  return s;
}

std::vector<double> allocate_targets(std::span<const double> frequencies_hz,
                                     double min_spacing_hz) {
  if (!(min_spacing_hz >= 0.0)) throw DomainError("minimum spacing must be non-negative");
  for (double f : frequencies_hz) {
    if (!(f > 0.0)) throw DomainError("frequencies must be positive");
  }
  std::vector<std::size_t> order(frequencies_hz.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return frequencies_hz[a] > frequencies_hz[b];
  });
  std::vector<double> out(frequencies_hz.size());
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t i = order[k];
    const double t = std::min(frequencies_hz[i], prev - min_spacing_hz);
    if (!(t > 0.0)) {
      std::ostringstream msg;
      msg << "frequency allocation infeasible; chain of indices";
      for (std::size_t m = 0; m <= k; ++m) msg << ' ' << order[m];
      msg << " would push index " << i << " to " << t << " Hz";
      throw InfeasibleError(msg.str());
    }
    out[i] = t;
    prev = t;
  }
  return out;
}

}  // namespace lasertune
