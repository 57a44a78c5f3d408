#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lasertune/core_physics.hpp"
#include "lasertune/dose_model.hpp"
#include "lasertune/execution.hpp"

namespace lasertune {

/// Fractional resistance increase R(f_target)/R(f_now) - 1 from the exact
/// frequency law. Throws InfeasibleError when f_target > f_now.
[[nodiscard]] double required_shift(Hertz f_now, Hertz f_target, const MaterialParams& mat = {});

struct PlanOptions {
  double default_power_mw = 40.0;
  double max_power_mw = 49.0;  ///< cap on a single planned shot
  double exposure_s = 60.0;
  int max_shots = 20;
};

/// Shots whose compounded mean change prod(1 + mu_i) - 1 equals the target.
struct ShotPlan {
  double target_shift = 0.0;
  std::vector<LasingRecipe> shots;
  double planned_shift = 0.0;
};

/// Centered-beam power whose mean shift equals `target`. Throws DomainError
/// when the target is not below the plateau.
[[nodiscard]] double power_for_shift(double target, const DoseModel& model, double exposure_s);

/// Largest mean shift one planned shot can give.
[[nodiscard]] double max_single_shift(const DoseModel& model, const PlanOptions& opts = {});

/// Inverts the dose model. Targets a single shot can reach yield one recipe
/// with analytically inverted power; larger targets use default-power shots
/// followed by one trimmed shot. Throws InfeasibleError when more than
/// max_shots would be needed, quoting the achievable bound.
[[nodiscard]] ShotPlan recipe_for_shift(double target_shift, const DoseModel& model,
                                        const PlanOptions& opts = {});

struct TunePolicy {
  double step_fraction = 0.7;
  double tolerance = 0.0025;  ///< relative frequency
  int max_iterations = 8;     ///< anneal rounds
  double measurement_noise_sigma = 0.002;

  void validate() const;
};

enum class TuneOutcome { converged, overshoot, exhausted };

[[nodiscard]] const char* to_string(TuneOutcome o);

struct TuneStep {
  double measured_r_ohm = 0.0;
  double inferred_f_hz = 0.0;
  double relative_error = 0.0;  ///< (f_inferred - f_target) / f_target
  std::vector<LasingRecipe> shots;  ///< empty on the final measurement
  double planned_shift = 0.0;
  double sampled_shift = 0.0;   ///< realized compounded change of this round
  double true_r_after_ohm = 0.0;
};

struct TuneTrace {
  std::string junction_id;
  double target_f_hz = 0.0;
  double initial_r_ohm = 0.0;
  std::vector<TuneStep> steps;
  TuneOutcome outcome = TuneOutcome::exhausted;

  /// Number of anneal rounds performed.
  [[nodiscard]] int iterations() const;
  [[nodiscard]] double final_true_r_ohm() const;
};

/// Measure, infer, stop or anneal toward step_fraction of the remaining
/// shift, repeated. Overshoot is terminal. Throws InfeasibleError when the
/// target lies above the current frequency by more than the tolerance.
[[nodiscard]] TuneTrace iterative_tune(const std::string& junction_id, double resistance_ohm,
                                       Hertz f_target, const TunePolicy& policy,
                                       const DoseModel& model, RngStream& rng,
                                       const PlanOptions& opts = {},
                                       const MaterialParams& mat = {});

struct TuneJob {
  std::string junction_id;
  double resistance_ohm = 0.0;
  double target_f_hz = 0.0;
};

struct TuneSummary {
  std::size_t count = 0;
  std::size_t converged = 0;
  std::size_t overshoot = 0;
  std::size_t exhausted = 0;
  std::size_t converged_within_5 = 0;
  double mean_iterations = 0.0;
  std::vector<std::size_t> iteration_histogram;  ///< index = anneal rounds, converged only
};

/// Runs independent loops, each with a stream derived from (master_seed, id).
[[nodiscard]] std::vector<TuneTrace> tune_population(std::span<const TuneJob> jobs,
                                                     const TunePolicy& policy,
                                                     const DoseModel& model,
                                                     std::uint64_t master_seed,
                                                     Execution exec = Execution::parallel,
                                                     const PlanOptions& opts = {},
                                                     const MaterialParams& mat = {});

[[nodiscard]] TuneSummary summarize(std::span<const TuneTrace> traces);

/// Downshift-only frequency targets with pairwise spacing >= min_spacing.
/// Sweeps from the highest frequency down, lowering each one the minimal
/// amount. Output is in input order. Throws InfeasibleError when a target
/// would reach zero.
[[nodiscard]] std::vector<double> allocate_targets(std::span<const double> frequencies_hz,
                                                   double min_spacing_hz);

}  // namespace lasertune
