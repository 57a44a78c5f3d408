#include "lasertune/dose_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "lasertune/errors.hpp"

namespace lasertune {

void LasingRecipe::validate() const {
  if (!(power_mw >= 0.0)) throw DomainError("power must be non-negative");
  if (!(exposure_s > 0.0)) throw DomainError("exposure must be positive");
  if (repetitions < 1) throw DomainError("repetitions must be at least 1");
  if (!(displacement_um >= 0.0)) throw DomainError("displacement must be non-negative");
  if (power_mw >= kMaxPowerMw) {
    throw InfeasibleError("power " + std::to_string(power_mw) +
                          " mW is in the accelerated-growth regime (>= 50 mW, junction above "
                          "~150 C); the dose model is not valid there");
  }
}

void DoseModel::validate() const {
  if (!(heating.slope_c_per_mw > 0.0)) throw DomainError("heating slope must be positive");
  if (!(response.plateau_m > 0.0)) throw DomainError("plateau must be positive");
  if (!(response.char_temperature_c > 0.0) || !(response.char_exposure_s > 0.0)) {
    throw DomainError("characteristic scales must be positive");
  }
  if (!(beam.waist_um > 0.0)) throw DomainError("beam waist must be positive");
  for (double r : {beam.si_reflectance, beam.al_reflectance}) {
    if (!(r >= 0.0 && r < 1.0)) throw DomainError("reflectance must lie in [0, 1)");
  }
  if (!(displacement.decay_d0_um > 0.0)) throw DomainError("decay length must be positive");
  for (double d = 0.0; d <= 50.0; d += 0.5) {
    if (!(heat_transfer_factor(d, displacement) > 0.0)) {
      throw DomainError("heat transfer factor must stay positive on [0, 50] um");
    }
  }
  if (!(stochastic.relative_sigma >= 0.0)) throw DomainError("shot sigma must be non-negative");
}

double junction_temperature(double power_mw, const HeatingParams& h) {
  if (!(power_mw >= 0.0)) throw DomainError("power must be non-negative");
  return h.slope_c_per_mw * power_mw + h.ambient_c;
}

double mean_shift_vs_temperature(double temperature_c, const DoseResponseParams& p,
                                 const HeatingParams& h) {
  if (temperature_c < h.ambient_c) throw DomainError("temperature below ambient");
  return p.plateau_m - p.depth_b * std::exp(-temperature_c / p.char_temperature_c);
}

double aluminum_weight(double displacement_um, const BeamGeometry& g) {
  // Intensity exp(-2 r^2 / w^2) has per-axis sigma w/2; integrate over x < extent.
  const double s = std::numbers::sqrt2 * (displacement_um - g.electrode_extent_um) / g.waist_um;
  return 0.5 * std::erfc(s);
}

double absorption_fraction(double displacement_um, const BeamGeometry& g) {
  const double w = aluminum_weight(displacement_um, g);
  return (1.0 - g.al_reflectance) * w + (1.0 - g.si_reflectance) * (1.0 - w);
}

double heat_transfer_factor(double displacement_um, const DisplacementParams& d) {
  return d.transfer_amp_a * std::exp(-displacement_um / d.decay_d0_um) + d.transfer_offset_b;
}

double displacement_response(double displacement_um, const BeamGeometry& g,
                             const DisplacementParams& d) {
  return d.response_scale * absorption_fraction(displacement_um, g) *
         heat_transfer_factor(displacement_um, d);
}

double relative_heating(double displacement_um, const BeamGeometry& g,
                        const DisplacementParams& d) {
  return (absorption_fraction(displacement_um, g) * heat_transfer_factor(displacement_um, d)) /
         (absorption_fraction(0.0, g) * heat_transfer_factor(0.0, d));
}

double exposure_factor(double exposure_s, int repetitions, const DoseResponseParams& p) {
  if (!(exposure_s > 0.0) || repetitions < 1) {
    throw DomainError("exposure must be positive with at least one repetition");
  }
  return -std::expm1(-(exposure_s * repetitions) / p.char_exposure_s);
}

double mean_shift(const LasingRecipe& recipe, const DoseModel& model) {
  recipe.validate();
  const double effective_power =
      recipe.power_mw * relative_heating(recipe.displacement_um, model.beam, model.displacement);
  const double t = junction_temperature(std::max(effective_power, 0.0), model.heating);
  const double s = std::max(0.0, mean_shift_vs_temperature(t, model.response, model.heating));
  return s * exposure_factor(recipe.exposure_s, recipe.repetitions, model.response);
}

JunctionState apply_anneal(const JunctionState& state, const LasingRecipe& recipe,
                           const DoseModel& model, RngStream& rng) {
  const double mu = mean_shift(recipe, model);
  const double eps = rng.normal();
  const double shift = std::max(mu * (1.0 + model.stochastic.relative_sigma * eps),
                                model.stochastic.shift_floor);
  JunctionState next = state;
  next.resistance_ohm = state.resistance_ohm * (1.0 + shift);
  next.history.push_back({recipe, mu, eps, shift, state.resistance_ohm, next.resistance_ohm});
  return next;
}

FitResult fit_dose_response(std::span<const DosePoint> points, const DoseModel& model,
                            bool include_exposure) {
  if (points.size() < 3) throw DomainError("dose fit needs at least 3 points");
  std::vector<double> x;
  std::vector<double> y;
  double top = -1.0;
  double low_t = 0.0;
  double low = 1.0;
  for (const auto& p : points) {
    const double t = junction_temperature(p.power_mw, model.heating);
    const double f =
        include_exposure ? exposure_factor(p.exposure_s, p.repetitions, model.response) : 1.0;
    x.push_back(t);
    x.push_back(f);
    y.push_back(p.shift);
    top = std::max(top, p.shift / f);
    if (p.shift / f < low) {
      low = p.shift / f;
      low_t = t;
    }
  }
  ModelSpec spec;
  spec.name = "dose";
  spec.parameter_names = {"plateau_m", "depth_b", "char_temperature_c"};
  spec.evaluate = [](std::span<const double> p, std::span<const double> in) {
    return (p[0] - p[1] * std::exp(-in[0] / p[2])) * in[1];
  };
  spec.gradient = [](std::span<const double> p, std::span<const double> in, std::span<double> g) {
    const double e = std::exp(-in[0] / p[2]);
    g[0] = in[1];
    g[1] = -e * in[1];
    g[2] = -p[1] * e * in[0] / (p[2] * p[2]) * in[1];
  };
  spec.bounds = {std::nullopt, std::nullopt, ParameterBounds{1e-3, 1e4}};
  const double t0 = model.response.char_temperature_c;
  const double m0 = top * 1.05;
  const double b0 = std::max((m0 - low) * std::exp(low_t / t0), 1e-6);
  const std::vector<double> init = {m0, b0, t0};
  return fit_curve(spec, Dataset(2, std::move(x), std::move(y)), init);
}

FitResult fit_displacement(std::span<const DisplacementPoint> points, const DoseModel& model) {
  if (points.size() < 3) throw DomainError("displacement fit needs at least 3 points");
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& p : points) {
    if (!(p.displacement_um >= 0.0)) throw DomainError("displacement must be non-negative");
    x.push_back(p.displacement_um);
    y.push_back(p.shift);
  }
  const BeamGeometry beam = model.beam;
  ModelSpec spec;
  spec.name = "displacement";
  spec.parameter_names = {"scale_a", "scale_b", "decay_d0_um"};
  spec.evaluate = [beam](std::span<const double> p, std::span<const double> in) {
    return absorption_fraction(in[0], beam) * (p[0] * std::exp(-in[0] / p[2]) + p[1]);
  };
  spec.gradient = [beam](std::span<const double> p, std::span<const double> in,
                         std::span<double> g) {
    const double a = absorption_fraction(in[0], beam);
    const double e = std::exp(-in[0] / p[2]);
    g[0] = a * e;
    g[1] = a;
    g[2] = a * p[0] * e * in[0] / (p[2] * p[2]);
  };
  spec.bounds = {std::nullopt, std::nullopt, ParameterBounds{1e-3, 1e4}};
  const auto& d = model.displacement;
  const std::vector<double> init = {d.response_scale * d.transfer_amp_a,
                                    d.response_scale * d.transfer_offset_b, d.decay_d0_um};
  return fit_curve(spec, Dataset::from_xy(x, y), init);
}

}  // namespace lasertune
