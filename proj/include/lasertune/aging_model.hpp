#pragma once

#include <span>
#include <string>
#include <vector>

#include "lasertune/fitkit.hpp"

namespace lasertune {

/// Exponential plateau dR/R0 = A - B exp(-t / tau), t in days since annealing.
struct AgingParams {
  double final_shift_a = 0.0;
  double depth_b = 0.0;
  double tau_days = 1.0;

  [[nodiscard]] double initial_shift() const { return final_shift_a - depth_b; }
};

/// Fitted cohorts from the 30-day atmosphere storage study: a freshly
/// fabricated wafer and a 130-day aged wafer, each with annealed and
/// unannealed junctions.
namespace aging_presets {
inline constexpr AgingParams new_wafer_annealed{0.21, 0.12, 10.40};
inline constexpr AgingParams new_wafer_unannealed{0.16, 0.13, 8.72};
inline constexpr AgingParams aged_wafer_annealed{0.11, 0.08, 41.15};
inline constexpr AgingParams aged_wafer_unannealed{0.07, 0.07, 27.95};
}  // namespace aging_presets

enum class Cohort { annealed, unannealed };

struct AgingSample {
  double day;
  double resistance_ohm;
};

struct AgingSeries {
  std::string junction_id;
  Cohort cohort = Cohort::unannealed;
  std::string wafer_label;
  double r0_ohm = 0.0;  ///< reference resistance; first sample when zero
  std::vector<AgingSample> samples;

  void validate() const;
  [[nodiscard]] double reference_resistance() const;
};

[[nodiscard]] double aging_shift(double day, const AgingParams& p);

/// Total fractional change of an annealed junction `day` days after the
/// anneal. Aging and the anneal shift add.
[[nodiscard]] double combined_shift(double day, const AgingParams& aging, double anneal_shift);

struct AgingFit {
  AgingParams params;
  FitResult fit;

  /// tau is unidentifiable when its standard error exceeds its value.
  [[nodiscard]] bool tau_identified() const;
};

/// Fits one junction or a pooled cohort. Needs at least 4 distinct days.
/// Initialization: A from the last-day mean, A - B from the first-day mean,
/// tau from a third of the day span.
[[nodiscard]] AgingFit fit_aging(std::span<const AgingSeries> cohort);
[[nodiscard]] AgingFit fit_aging(const AgingSeries& series);

/// Same fit on already-normalized (day, dR/R0) points.
[[nodiscard]] AgingFit fit_aging_points(std::span<const double> days,
                                        std::span<const double> shifts);

struct OffsetReport {
  double initial_gap = 0.0;
  double final_gap = 0.0;
  double max_drift = 0.0;  ///< max |gap(t) - gap(0)| on [0, horizon]
};

[[nodiscard]] OffsetReport offset_preservation(const AgingParams& annealed,
                                               const AgingParams& unannealed, double horizon_days);

}  // namespace lasertune
