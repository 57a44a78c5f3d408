#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "lasertune/execution.hpp"
#include "lasertune/fitkit.hpp"
#include "lasertune/rng.hpp"

namespace lasertune {

// -- defects ----------------------------------------------------------------

struct StaticDynamics {};

/// Gaussian random walk of the defect frequency.
struct DriftingDynamics {
  double sigma_hz = 0.0;         ///< step size per interval
  double step_interval_s = 3600;
};

/// Two-state Markov switching between f_a and f_b.
struct TelegraphicDynamics {
  double f_a_hz = 0.0;
  double f_b_hz = 0.0;
  double switch_rate_per_s = 0.0;
};

using TlsDynamics = std::variant<StaticDynamics, DriftingDynamics, TelegraphicDynamics>;

struct TlsDefect {
  double f_offset_hz = 0.0;      ///< TLS frequency relative to the idle qubit
  double coupling_g_hz = 0.0;
  double gamma_total_hz = 1e6;   ///< summed TLS and qubit decay/dephasing rates
  TlsDynamics dynamics = StaticDynamics{};

  void validate() const;
};

struct QubitNoiseModel {
  double gamma_1q = 1.0 / 46.5e-6;  ///< frequency-independent relaxation, 1/s
  std::vector<TlsDefect> defects;
  double readout_noise_sigma = 0.0;
  double dropout_probability = 0.0;  ///< chance a whole row reads P = 1

  void validate() const;
};

/// Lorentzian TLS contribution 2 Gamma g^2 / (Gamma^2 + Delta^2), 1/s.
[[nodiscard]] double excess_rate(double detuning_hz, const TlsDefect& defect);

/// Gamma_1 = excess_rate + gamma_1q, with Delta = f_Q - f_TLS.
[[nodiscard]] double relaxation_rate(double detuning_hz, const TlsDefect& defect,
                                     double gamma_1q);

/// Relaxation rate of a qubit shifted by `qubit_offset_hz` from idle; defect
/// rates add.
[[nodiscard]] double total_rate(double qubit_offset_hz, const QubitNoiseModel& model);

/// exp(-rate * wait) plus Gaussian readout noise, clipped to [0, 1].
[[nodiscard]] double excited_population(double wait_s, double rate, RngStream& rng,
                                        double noise_sigma);

// -- AC Stark calibration ---------------------------------------------------

/// Sign of the tone detuning. `below` (Delta = -|Delta|) is the branch with
/// negative frequency shifts, `above` the positive branch.
enum class ToneSide { below, above };

struct StarkCalibration {
  double conv_a_neg_hz = 432e6;  ///< conversion for the tone below the qubit
  double conv_a_pos_hz = 416e6;  ///< conversion for the tone above the qubit
  double tone_detuning_hz = 80e6;
  double reliable_range_hz = 33e6;

  /// Conversions measured after annealing.
  static StarkCalibration post_anneal() { return {459e6, 416e6, 80e6, 33e6}; }

  [[nodiscard]] double conversion(ToneSide side) const {
    return side == ToneSide::below ? conv_a_neg_hz : conv_a_pos_hz;
  }
  void validate() const;
};

/// +-(sqrt((A a)^2 + Delta^2) - |Delta|), negative for ToneSide::below.
[[nodiscard]] double stark_shift(double amplitude, const StarkCalibration& cal, ToneSide side);

/// Inverse of stark_shift. Throws DomainError when |target| exceeds the
/// reliable range or its sign does not match the tone side.
[[nodiscard]] double amplitude_for_shift(double target_hz, const StarkCalibration& cal,
                                         ToneSide side);

struct StarkPoint {
  double amplitude;
  double shift_hz;
};

/// Fits the conversion A for one tone side (parameter "conversion_hz").
[[nodiscard]] FitResult fit_stark(std::span<const StarkPoint> points, double tone_detuning_hz,
                                  ToneSide side);

// -- spectro-temporal maps ---------------------------------------------------

struct MapGrid {
  std::vector<double> offsets_hz;
  double duration_h = 160.0;
  double step_s = 600.0;
  double wait_s = 40e-6;

  [[nodiscard]] std::size_t time_count() const;
  static MapGrid uniform(double min_hz, double max_hz, double step_hz, double duration_h,
                         double step_s, double wait_s);
};

struct SpectroMap {
  std::vector<double> offsets_hz;
  std::vector<double> times_h;
  std::vector<double> population;  ///< row-major: times x offsets
  double wait_s = 0.0;

  [[nodiscard]] double at(std::size_t time_index, std::size_t offset_index) const {
    return population[time_index * offsets_hz.size() + offset_index];
  }
};

/// Steps every defect's dynamics through time, then evaluates the excited
/// population at each (time, offset) cell with independent readout noise.
/// Defect dynamics run sequentially; cells are evaluated in parallel under
/// Execution::parallel with identical results.
[[nodiscard]] SpectroMap simulate_map(const QubitNoiseModel& model, const MapGrid& grid,
                                      std::uint64_t seed,
                                      Execution exec = Execution::parallel);

/// Per-offset mean over time.
[[nodiscard]] std::vector<double> time_average(const SpectroMap& map);

/// Offset of the deepest population dip in each row.
[[nodiscard]] std::vector<double> dip_positions(const SpectroMap& map);

struct TlsExtraction {
  bool found = false;
  double f_offset_hz = 0.0;
  double coupling_g_hz = 0.0;
  double gamma_hz = 0.0;
  double gamma_1q = 0.0;
  double peak_excess = 0.0;        ///< 2 g^2 / Gamma
  double peak_excess_error = 0.0;
  FitResult fit;                   ///< params: f_offset_hz, peak_excess, gamma_hz, gamma_1q
};

/// Converts a time-averaged profile to relaxation rates (-ln P / wait) and
/// fits one Lorentzian plus a constant. A dip whose fitted excess is below
/// two standard errors is reported as "no persistent defect" (found = false).
[[nodiscard]] TlsExtraction extract_tls(std::span<const double> profile,
                                        std::span<const double> offsets_hz, double wait_s,
                                        double gamma_1q_guess);

/// Repeated single-defect extraction with subtraction of each found
/// Lorentzian, followed by a joint refit of everything found. A repeated
/// search sees many noise bumps, so each component must reach
/// `min_significance` standard errors; the weakest is dropped and the rest
/// refit until all do.
[[nodiscard]] std::vector<TlsExtraction> extract_defects(std::span<const double> profile,
                                                         std::span<const double> offsets_hz,
                                                         double wait_s, double gamma_1q_guess,
                                                         int max_defects = 4,
                                                         double min_significance = 5.0);

// -- coherence statistics ----------------------------------------------------

struct CoherenceSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double stddev = 0.0;  ///< sample (n - 1) standard deviation
  double cap_low = 0.0;   ///< median - 3 stddev
  double cap_high = 0.0;  ///< median + 3 stddev
  std::vector<double> outliers;
};

/// Box statistics with linearly interpolated quartiles. Needs >= 4 samples.
[[nodiscard]] CoherenceSummary summarize_coherence(std::span<const double> samples);

/// True when after.median lies outside before's caps.
[[nodiscard]] bool significant_change(const CoherenceSummary& before,
                                      const CoherenceSummary& after);

}  // namespace lasertune
