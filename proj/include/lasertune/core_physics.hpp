#pragma once

#include <span>
#include <vector>

#include "lasertune/fitkit.hpp"
#include "lasertune/units.hpp"

namespace lasertune {

/// Exact SI values (2019 redefinition).
struct PhysicalConstants {
  static constexpr double planck_h = 6.62607015e-34;         // J s
  static constexpr double electron_charge = 1.602176634e-19;  // C
};

struct MaterialParams {
  double gap_ev = 170e-6;                       ///< Al superconducting gap, eV.
  double charging_energy_hz = 275e6;            ///< E_C / h.
  double critical_current_density = 5e5;        ///< A/m^2 (500 nA/um^2).

  void validate() const;
};

/// Transmon/junction conversions for one set of material parameters.
///
/// The frequency law is hf = sqrt(h*Delta*E_C / (e^2 R_N)) - E_C, evaluated
/// exactly. The resistance at which it reaches zero is cached on construction
/// and quoted in domain errors.
class JunctionPhysics {
 public:
  explicit JunctionPhysics(MaterialParams params = {});

  [[nodiscard]] const MaterialParams& params() const { return params_; }

  /// Ambegaokar-Baratoff: I_C = pi Delta / (2 e R_N).
  [[nodiscard]] Amperes critical_current(Ohms r_n) const;

  [[nodiscard]] Hertz qubit_frequency(Ohms r_n) const;

  /// Exact inverse of qubit_frequency.
  [[nodiscard]] Ohms resistance_for_frequency(Hertz f_q) const;

  /// d ln f / d ln R at r_n, i.e. -(1/2)(1 + E_C/hf).
  [[nodiscard]] double normalized_slope(Ohms r_n) const;

  /// Resistance where the predicted frequency reaches zero: h Delta / (e^2 E_C).
  [[nodiscard]] Ohms frequency_root() const { return root_; }

  /// Junction area that gives r_n at the nominal critical current density, um^2.
  [[nodiscard]] double nominal_area_um2(Ohms r_n) const;

 private:
  MaterialParams params_;
  double plasma_numerator_;  // Delta[eV] * (E_C/h) / e, in Hz^2 * Ohm
  Ohms root_;
};

[[nodiscard]] Amperes critical_current(Ohms r_n, const MaterialParams& mat = {});
[[nodiscard]] Hertz qubit_frequency(Ohms r_n, const MaterialParams& mat = {});
[[nodiscard]] Ohms resistance_for_frequency(Hertz f_q, const MaterialParams& mat = {});

/// Small-shift prediction df/f0 = -(1/1.9) dR/R0.
[[nodiscard]] double linearized_shift(double delta_r_rel);

// -- barrier thickness ------------------------------------------------------

struct BarrierModelParams {
  double tau_nm = 0.39;          ///< characteristic thickness
  double prefactor_ohm_um2 = 0;  ///< R_N * area at zero thickness

  void validate() const;
};

/// R_N = prefactor * exp(t / tau) / area.
[[nodiscard]] double barrier_resistance(double thickness_nm, double area_um2,
                                        const BarrierModelParams& p);

struct BarrierSample {
  double resistance_ohm;
  double area_um2;
  double thickness_nm;
};

struct BarrierFit {
  BarrierModelParams params;
  FitResult fit;

  /// Multiplicative resistance change for a thickness increase.
  [[nodiscard]] double resistance_factor(double delta_thickness_nm) const;
};

/// Fits area-normalized resistance R*A = P exp(t / tau) by nonlinear least
/// squares. Initialized from the log-linear regression of ln(R*A) on t.
[[nodiscard]] BarrierFit fit_barrier(std::span<const BarrierSample> rows);

/// Measured (resistance, area, thickness) rows of the two unannealed, one
/// laser-annealed and two 400 C thermally annealed junctions.
[[nodiscard]] std::vector<BarrierSample> reference_barrier_samples();

}  // namespace lasertune
