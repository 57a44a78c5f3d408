#pragma once

#include <span>
#include <string>
#include <vector>

#include "lasertune/fitkit.hpp"
#include "lasertune/rng.hpp"

namespace lasertune {

/// Lasing powers at or above this are refused: junction temperatures exceed
/// ~150 C there and resistance growth accelerates beyond the model.
inline constexpr double kMaxPowerMw = 50.0;

/// Junction temperature T(P) = slope * P + ambient.
struct HeatingParams {
  double slope_c_per_mw = 2.47;
  double ambient_c = 20.0;
};

/// Shift vs temperature m - b exp(-T/T0), plus the exposure saturation scale.
struct DoseResponseParams {
  double plateau_m = 0.018;
  double depth_b = 0.037;
  double char_temperature_c = 35.0;
  double char_exposure_s = 10.0;  ///< u0 in 1 - exp(-exposure*reps/u0)
};

struct BeamGeometry {
  double wavelength_nm = 532.0;
  double waist_um = 0.81;  ///< 1/e^2 intensity radius
  double si_reflectance = 0.374;
  double al_reflectance = 0.64;
  double electrode_extent_um = 4.0;
};

/// Heat transfer H(D) = A exp(-D/D0) + B and the scale of the displacement fit.
struct DisplacementParams {
  double transfer_amp_a = 1.0;
  double transfer_offset_b = -0.005;
  double decay_d0_um = 9.5;
  double response_scale = 0.046;
};

struct StochasticParams {
  /// Per-shot spread of the shift, relative to the mean shift.
  double relative_sigma = 0.01;
  /// Lowest fractional change a shot can produce.
  double shift_floor = -0.005;
};

struct LasingRecipe {
  double power_mw = 40.0;
  double exposure_s = 60.0;
  int repetitions = 1;
  double displacement_um = 0.0;

  /// Throws DomainError on an invalid recipe; power >= kMaxPowerMw is an
  /// InfeasibleError.
  void validate() const;

  bool operator==(const LasingRecipe&) const = default;
};

/// All dose-model parameters; `defaults()` mirrors data/dose_defaults.json.
struct DoseModel {
  std::string version = "1";
  HeatingParams heating;
  DoseResponseParams response;
  BeamGeometry beam;
  DisplacementParams displacement;
  StochasticParams stochastic;
  double neighbor_temperature_c = 22.9;  ///< junction 1.2 mm from the beam at 40 mW

  static DoseModel defaults() { return {}; }
  void validate() const;
};

struct AnnealEvent {
  LasingRecipe recipe;
  double mean_shift = 0.0;
  double draw = 0.0;      ///< standard normal used for this shot
  double realized_shift = 0.0;
  double r_before_ohm = 0.0;
  double r_after_ohm = 0.0;
};

/// A single junction as the anneal and aging models see it.
struct JunctionState {
  double resistance_ohm = 0.0;
  double area_um2 = 0.1;
  double age_days = 0.0;
  std::vector<AnnealEvent> history;
};

[[nodiscard]] double junction_temperature(double power_mw, const HeatingParams& h = {});

/// m - b exp(-T/T0). Not clamped: near ambient it may be slightly negative.
[[nodiscard]] double mean_shift_vs_temperature(double temperature_c,
                                               const DoseResponseParams& p,
                                               const HeatingParams& h = {});

/// Fraction of beam power absorbed when the beam center sits `displacement_um`
/// from the junction. The aluminum electrode is a half-plane ending at
/// electrode_extent; the Gaussian weight over it is a closed-form erfc.
[[nodiscard]] double absorption_fraction(double displacement_um, const BeamGeometry& g);

/// Fraction of the circular Gaussian beam that falls on the aluminum half-plane.
[[nodiscard]] double aluminum_weight(double displacement_um, const BeamGeometry& g);

[[nodiscard]] double heat_transfer_factor(double displacement_um, const DisplacementParams& d);

/// scale * absorption_fraction * heat_transfer_factor.
[[nodiscard]] double displacement_response(double displacement_um, const BeamGeometry& g,
                                           const DisplacementParams& d);

/// Absorbed-and-transferred power at a displacement relative to a centered beam.
[[nodiscard]] double relative_heating(double displacement_um, const BeamGeometry& g,
                                      const DisplacementParams& d);

/// 1 - exp(-(exposure * repetitions) / u0), in (0, 1].
[[nodiscard]] double exposure_factor(double exposure_s, int repetitions,
                                     const DoseResponseParams& p);

/// Expected fractional resistance change of one recipe.
///
/// The beam displacement scales the effective power before the temperature
/// map, the temperature response is clamped at zero below its onset, and the
/// exposure saturation multiplies the result:
///   max(0, m - b exp(-T(P * rel(D)) / T0)) * (1 - exp(-E n / u0)).
[[nodiscard]] double mean_shift(const LasingRecipe& recipe, const DoseModel& model);

/// Applies one shot: R <- R (1 + mu (1 + sigma * eps)), floored at
/// R (1 + shift_floor). Always consumes exactly one normal draw.
[[nodiscard]] JunctionState apply_anneal(const JunctionState& state, const LasingRecipe& recipe,
                                         const DoseModel& model, RngStream& rng);

struct DosePoint {
  double power_mw = 0.0;
  double shift = 0.0;
  double exposure_s = 60.0;
  int repetitions = 1;
};

/// Fits plateau_m, depth_b and char_temperature_c of m - b exp(-T(P)/T0)
/// with the heating map held fixed. With `include_exposure` each point is
/// scaled by its exposure factor, so the fitted plateau is the saturated one;
/// otherwise the plateau absorbs the exposure factor of the series.
[[nodiscard]] FitResult fit_dose_response(std::span<const DosePoint> points,
                                          const DoseModel& model, bool include_exposure = true);

struct DisplacementPoint {
  double displacement_um = 0.0;
  double shift = 0.0;
};

/// Fits scale_a, scale_b and decay_d0_um of
/// absorption(D) * (scale_a exp(-D/D0) + scale_b) with the beam geometry fixed.
/// scale_a = response_scale * A and scale_b = response_scale * B.
[[nodiscard]] FitResult fit_displacement(std::span<const DisplacementPoint> points,
                                         const DoseModel& model);

}  // namespace lasertune
