#include "lasertune/core_physics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "lasertune/errors.hpp"

namespace lasertune {

namespace {

constexpr double kE = PhysicalConstants::electron_charge;

std::string ohms_str(double r) {
  std::ostringstream os;
  os.precision(10);
  os << r << " ohm";
  return os.str();
}

}  // namespace

void MaterialParams::validate() const {
  if (!(gap_ev > 0.0)) throw DomainError("superconducting gap must be positive");
  if (!(charging_energy_hz > 0.0)) throw DomainError("charging energy must be positive");
  if (!(critical_current_density > 0.0)) {
    throw DomainError("critical current density must be positive");
  }
}

JunctionPhysics::JunctionPhysics(MaterialParams params) : params_(params) {
  params_.validate();
  // h Delta E_C / (e^2 R h^2) with Delta = gap_ev * e and E_C = h * ec_hz.
  plasma_numerator_ = params_.gap_ev * params_.charging_energy_hz / kE;
  root_ = Ohms(plasma_numerator_ / (params_.charging_energy_hz * params_.charging_energy_hz));
}

Amperes JunctionPhysics::critical_current(Ohms r_n) const {
  if (!(r_n.value() > 0.0)) {
    throw DomainError("critical current needs positive resistance, got " + ohms_str(r_n.value()));
  }
  // pi * (gap_ev * e) / (2 e R) = pi * gap_ev / (2 R)
  return Amperes(std::numbers::pi * params_.gap_ev / (2.0 * r_n.value()));
}

Hertz JunctionPhysics::qubit_frequency(Ohms r_n) const {
  if (!(r_n.value() > 0.0) || !(r_n < root_)) {
    throw DomainError("resistance " + ohms_str(r_n.value()) +
                      " outside (0, " + ohms_str(root_.value()) +
                      "); the transmon frequency is non-positive beyond the root");
  }
  return Hertz(std::sqrt(plasma_numerator_ / r_n.value()) - params_.charging_energy_hz);
}

Ohms JunctionPhysics::resistance_for_frequency(Hertz f_q) const {
  if (!(f_q.value() > 0.0)) {
    throw DomainError("frequency must be positive (resistance root is " +
                      ohms_str(root_.value()) + ")");
  }
  const double plasma = f_q.value() + params_.charging_energy_hz;
  return Ohms(plasma_numerator_ / (plasma * plasma));
}

double JunctionPhysics::normalized_slope(Ohms r_n) const {
  const double f = qubit_frequency(r_n).value();
  return -0.5 * (1.0 + params_.charging_energy_hz / f);
}

double JunctionPhysics::nominal_area_um2(Ohms r_n) const {
  const double area_m2 = critical_current(r_n).value() / params_.critical_current_density;
  return area_m2 * 1e12;
}

Amperes critical_current(Ohms r_n, const MaterialParams& mat) {
  return JunctionPhysics(mat).critical_current(r_n);
}

Hertz qubit_frequency(Ohms r_n, const MaterialParams& mat) {
  return JunctionPhysics(mat).qubit_frequency(r_n);
}

Ohms resistance_for_frequency(Hertz f_q, const MaterialParams& mat) {
  return JunctionPhysics(mat).resistance_for_frequency(f_q);
}

double linearized_shift(double delta_r_rel) {
  if (!(std::abs(delta_r_rel) < 1.0)) {
    throw DomainError("linearized shift requires |dR/R| < 1");
  }
  return -delta_r_rel / 1.9;
}

// -- barrier ----------------------------------------------------------------

void BarrierModelParams::validate() const {
  if (!(tau_nm > 0.0)) throw DomainError("barrier tau must be positive");
  if (!(prefactor_ohm_um2 > 0.0)) throw DomainError("barrier prefactor must be positive");
}

double barrier_resistance(double thickness_nm, double area_um2, const BarrierModelParams& p) {
  p.validate();
  if (!(area_um2 > 0.0)) throw DomainError("junction area must be positive");
  if (!(thickness_nm >= 0.0)) throw DomainError("barrier thickness must be non-negative");
  return p.prefactor_ohm_um2 * std::exp(thickness_nm / p.tau_nm) / area_um2;
}

double BarrierFit::resistance_factor(double delta_thickness_nm) const {
  return std::exp(delta_thickness_nm / params.tau_nm);
}

BarrierFit fit_barrier(std::span<const BarrierSample> rows) {
  if (rows.size() < 3) throw DomainError("barrier fit needs at least 3 rows");
  std::vector<double> t;
  std::vector<double> ra;
  for (const auto& row : rows) {
    if (!(row.resistance_ohm > 0.0) || !(row.area_um2 > 0.0)) {
      throw DomainError("barrier rows need positive resistance and area");
    }
    t.push_back(row.thickness_nm);
    ra.push_back(row.resistance_ohm * row.area_um2);
  }

  // ln(RA) = ln P + t / tau by ordinary least squares for the starting point.
  const auto n = static_cast<double>(t.size());
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double y = std::log(ra[i]);
    st += t[i];
    sy += y;
    stt += t[i] * t[i];
    sty += t[i] * y;
  }
  const double denom = n * stt - st * st;
  if (!(std::abs(denom) > 0.0)) throw DomainError("barrier thicknesses are all equal");
  const double slope = (n * sty - st * sy) / denom;
  if (!(slope > 0.0)) throw DomainError("area-normalized resistance does not grow with thickness");
  const double intercept = (sy - slope * st) / n;

  // Parameterized by ln P so the prefactor stays positive.
  ModelSpec model;
  model.name = "barrier";
  model.parameter_names = {"log_prefactor", "tau_nm"};
  model.evaluate = [](std::span<const double> p, std::span<const double> x) {
    return std::exp(p[0] + x[0] / p[1]);
  };
  model.bounds = {std::nullopt, ParameterBounds{1e-6, 1e3}};
  const std::vector<double> init = {intercept, 1.0 / slope};
  FitResult fit = fit_curve(model, Dataset::from_xy(t, ra), init);

  BarrierFit out;
  out.params.prefactor_ohm_um2 = std::exp(fit.params[0]);
  out.params.tau_nm = fit.params[1];
  out.fit = std::move(fit);
  return out;
}

std::vector<BarrierSample> reference_barrier_samples() {
  return {
      {7781.0, 0.0997, 2.43},
      {5249.0, 0.1679, 2.32},
      {5979.0, 0.1125, 2.44},
      {13735.0, 0.1967, 2.44},
      {13867.0, 0.1835, 2.64},
  };
}

}  // namespace lasertune
