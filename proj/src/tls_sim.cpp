#include "lasertune/tls_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lasertune/errors.hpp"

namespace lasertune {

// -- defects ----------------------------------------------------------------

void TlsDefect::validate() const {
  if (!(coupling_g_hz >= 0.0)) throw DomainError("TLS coupling must be non-negative");
  if (!(gamma_total_hz > 0.0)) throw DomainError("TLS linewidth must be positive");
  if (const auto* d = std::get_if<DriftingDynamics>(&dynamics)) {
    if (!(d->sigma_hz >= 0.0) || !(d->step_interval_s > 0.0)) {
      throw DomainError("drifting TLS needs sigma >= 0 and a positive interval");
    }
  }
  if (const auto* t = std::get_if<TelegraphicDynamics>(&dynamics)) {
    if (t->f_a_hz == t->f_b_hz) throw DomainError("telegraphic TLS needs f_a != f_b");
    if (!(t->switch_rate_per_s >= 0.0)) throw DomainError("switch rate must be non-negative");
  }
}

void QubitNoiseModel::validate() const {
  if (!(gamma_1q > 0.0)) throw DomainError("qubit relaxation rate must be positive");
  if (!(readout_noise_sigma >= 0.0)) throw DomainError("readout noise must be non-negative");
  if (!(dropout_probability >= 0.0 && dropout_probability <= 1.0)) {
    throw DomainError("dropout probability must lie in [0, 1]");
  }
  for (const auto& d : defects) d.validate();
}

double excess_rate(double detuning_hz, const TlsDefect& defect) {
  const double gamma = defect.gamma_total_hz;
  const double g = defect.coupling_g_hz;
  return 2.0 * gamma * g * g / (gamma * gamma + detuning_hz * detuning_hz);
}

double relaxation_rate(double detuning_hz, const TlsDefect& defect, double gamma_1q) {
  return excess_rate(detuning_hz, defect) + gamma_1q;
}

double total_rate(double qubit_offset_hz, const QubitNoiseModel& model) {
  double rate = model.gamma_1q;
  for (const auto& d : model.defects) rate += excess_rate(qubit_offset_hz - d.f_offset_hz, d);
  return rate;
}

double excited_population(double wait_s, double rate, RngStream& rng, double noise_sigma) {
  if (!(wait_s > 0.0)) throw DomainError("wait time must be positive");
  const double p = std::exp(-rate * wait_s) + noise_sigma * rng.normal();
  return std::clamp(p, 0.0, 1.0);
}

// -- Stark ------------------------------------------------------------------

void StarkCalibration::validate() const {
  if (!(conv_a_neg_hz > 0.0) || !(conv_a_pos_hz > 0.0)) {
    throw DomainError("Stark conversions must be positive");
  }
  if (!(tone_detuning_hz != 0.0)) throw DomainError("Stark tone detuning must be nonzero");
}

namespace {

double stark_magnitude(double amplitude, double conversion, double detuning) {
  const double d = std::abs(detuning);
  const double x = conversion * amplitude;
  // sqrt(x^2 + d^2) - d without cancellation at small x.
  return x * x / (std::sqrt(x * x + d * d) + d);
}

double side_sign(ToneSide side) { return side == ToneSide::below ? -1.0 : 1.0; }

}  // namespace

double stark_shift(double amplitude, const StarkCalibration& cal, ToneSide side) {
  if (!(amplitude >= 0.0)) throw DomainError("Stark amplitude must be non-negative");
  return side_sign(side) * stark_magnitude(amplitude, cal.conversion(side), cal.tone_detuning_hz);
}

double amplitude_for_shift(double target_hz, const StarkCalibration& cal, ToneSide side) {
  cal.validate();
  if (std::abs(target_hz) > cal.reliable_range_hz) {
    throw DomainError("Stark target outside the reliable range of +-" +
                      std::to_string(cal.reliable_range_hz * 1e-6) + " MHz");
  }
  if (target_hz != 0.0 && (target_hz > 0.0) != (side == ToneSide::above)) {
    throw DomainError("Stark target sign does not match the tone side");
  }
  const double s = std::abs(target_hz);
  const double d = std::abs(cal.tone_detuning_hz);
  // (A a)^2 = (s + d)^2 - d^2 = s (s + 2 d)
  return std::sqrt(s * (s + 2.0 * d)) / cal.conversion(side);
}

FitResult fit_stark(std::span<const StarkPoint> points, double tone_detuning_hz, ToneSide side) {
  if (points.size() < 3) throw DomainError("Stark fit needs at least 3 points");
  std::vector<double> x;
  std::vector<double> y;
  double init = 0.0;
  double best = 0.0;
  for (const auto& p : points) {
    x.push_back(p.amplitude);
    y.push_back(p.shift_hz);
    if (p.amplitude > best && std::abs(p.shift_hz) > 0.0) {
      best = p.amplitude;
      const double s = std::abs(p.shift_hz);
      const double d = std::abs(tone_detuning_hz);
      init = std::sqrt(s * (s + 2.0 * d)) / p.amplitude;
    }
  }
  if (!(init > 0.0)) throw DomainError("Stark fit needs a nonzero shift at nonzero amplitude");
  const double sign = side_sign(side);
  ModelSpec model;
  model.name = "stark";
  model.parameter_names = {"conversion_hz"};
  model.evaluate = [sign, tone_detuning_hz](std::span<const double> p, std::span<const double> a) {
    return sign * stark_magnitude(a[0], p[0], tone_detuning_hz);
  };
  const std::vector<double> start = {init};
  return fit_curve(model, Dataset::from_xy(x, y), start);
}

// -- maps -------------------------------------------------------------------

std::size_t MapGrid::time_count() const {
  if (!(step_s > 0.0) || !(duration_h > 0.0)) return 0;
  const double n = std::floor(duration_h * 3600.0 / step_s + 1e-9);
  return std::max<std::size_t>(1, static_cast<std::size_t>(n));
}

MapGrid MapGrid::uniform(double min_hz, double max_hz, double step_hz, double duration_h,
                         double step_s, double wait_s) {
  if (!(step_hz > 0.0) || !(max_hz >= min_hz)) throw DomainError("invalid offset grid");
  MapGrid g;
  const auto n = static_cast<std::size_t>(std::floor((max_hz - min_hz) / step_hz + 1e-9)) + 1;
  g.offsets_hz.reserve(n);
  for (std::size_t i = 0; i < n; ++i) g.offsets_hz.push_back(min_hz + step_hz * static_cast<double>(i));
  g.duration_h = duration_h;
  g.step_s = step_s;
  g.wait_s = wait_s;
  return g;
}

namespace {

// Defect frequencies at every time step, row-major (times x defects).
std::vector<double> defect_trajectories(const QubitNoiseModel& model, std::size_t steps,
                                        double step_s, RngStream& rng) {
  const std::size_t nd = model.defects.size();
  std::vector<double> freq(steps * nd);
  std::vector<double> current(nd);
  std::vector<int> state(nd, 0);
  for (std::size_t j = 0; j < nd; ++j) {
    const auto& d = model.defects[j];
    if (const auto* t = std::get_if<TelegraphicDynamics>(&d.dynamics)) {
      state[j] = rng.bernoulli(0.5) ? 1 : 0;
      current[j] = state[j] ? t->f_b_hz : t->f_a_hz;
    } else {
      current[j] = d.f_offset_hz;
    }
  }
  for (std::size_t k = 0; k < steps; ++k) {
    if (k > 0) {
      for (std::size_t j = 0; j < nd; ++j) {
        const auto& dyn = model.defects[j].dynamics;
        if (const auto* dr = std::get_if<DriftingDynamics>(&dyn)) {
          current[j] += dr->sigma_hz * std::sqrt(step_s / dr->step_interval_s) * rng.normal();
        } else if (const auto* t = std::get_if<TelegraphicDynamics>(&dyn)) {
          if (rng.bernoulli(-std::expm1(-t->switch_rate_per_s * step_s))) {
            state[j] ^= 1;
            current[j] = state[j] ? t->f_b_hz : t->f_a_hz;
          }
        }
      }
    }
    std::copy(current.begin(), current.end(), freq.begin() + static_cast<std::ptrdiff_t>(k * nd));
  }
  return freq;
}

double cell_population(const QubitNoiseModel& model, const double* defect_freqs, double offset,
                       double wait_s, double noise) {
  double rate = model.gamma_1q;
  for (std::size_t j = 0; j < model.defects.size(); ++j) {
    rate += excess_rate(offset - defect_freqs[j], model.defects[j]);
  }
  return std::clamp(std::exp(-rate * wait_s) + model.readout_noise_sigma * noise, 0.0, 1.0);
}

}  // namespace

SpectroMap simulate_map(const QubitNoiseModel& model, const MapGrid& grid, std::uint64_t seed,
                        Execution exec) {
  model.validate();
  if (grid.offsets_hz.empty()) throw DomainError("offset grid is empty");
  if (!(grid.wait_s > 0.0)) throw DomainError("wait time must be positive");
  const std::size_t steps = grid.time_count();
  if (steps == 0) throw DomainError("time grid is empty");

  SpectroMap map;
  map.offsets_hz = grid.offsets_hz;
  map.wait_s = grid.wait_s;
  map.times_h.resize(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    map.times_h[k] = static_cast<double>(k) * grid.step_s / 3600.0;
  }

  RngStream dynamics(derive_seed(seed, "tls-dynamics"));
  const std::vector<double> freqs = defect_trajectories(model, steps, grid.step_s, dynamics);

  std::vector<char> dropped(steps, 0);
  if (model.dropout_probability > 0.0) {
    RngStream dropout(derive_seed(seed, "tls-dropout"));
    for (auto& d : dropped) d = dropout.bernoulli(model.dropout_probability) ? 1 : 0;
  }

  const std::uint64_t noise_key = derive_seed(seed, "tls-readout");
  const std::size_t nd = model.defects.size();
  const std::size_t no = grid.offsets_hz.size();
  map.population.assign(steps * no, 0.0);

  auto fill = [&](std::size_t k, std::size_t i) {
    if (dropped[k]) {
      map.population[k * no + i] = 1.0;
      return;
    }
    const double noise = model.readout_noise_sigma > 0.0 ? counter_normal(noise_key, k, i) : 0.0;
    map.population[k * no + i] =
        cell_population(model, freqs.data() + k * nd, grid.offsets_hz[i], grid.wait_s, noise);
  };

  if (exec == Execution::parallel) {
    const auto total = static_cast<std::int64_t>(steps * no);
#pragma omp parallel for schedule(static)
    for (std::int64_t c = 0; c < total; ++c) {
      fill(static_cast<std::size_t>(c) / no, static_cast<std::size_t>(c) % no);
    }
  } else {
    for (std::size_t k = 0; k < steps; ++k) {
      for (std::size_t i = 0; i < no; ++i) fill(k, i);
    }
  }
  return map;
}

std::vector<double> time_average(const SpectroMap& map) {
  const std::size_t no = map.offsets_hz.size();
  const std::size_t nt = map.times_h.size();
  if (no == 0 || nt == 0) throw DomainError("map is empty");
  std::vector<double> avg(no, 0.0);
  for (std::size_t k = 0; k < nt; ++k) {
    for (std::size_t i = 0; i < no; ++i) avg[i] += map.population[k * no + i];
  }
  for (auto& v : avg) v /= static_cast<double>(nt);
  return avg;
}

std::vector<double> dip_positions(const SpectroMap& map) {
  const std::size_t no = map.offsets_hz.size();
  std::vector<double> out;
  out.reserve(map.times_h.size());
  for (std::size_t k = 0; k < map.times_h.size(); ++k) {
    const auto row = map.population.begin() + static_cast<std::ptrdiff_t>(k * no);
    const auto it = std::min_element(row, row + static_cast<std::ptrdiff_t>(no));
    out.push_back(map.offsets_hz[static_cast<std::size_t>(it - row)]);
  }
  return out;
}

// -- extraction ---------------------------------------------------------------

namespace {

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<double> profile_rates(std::span<const double> profile, double wait_s) {
  std::vector<double> rates;
  rates.reserve(profile.size());
  for (double p : profile) {
    if (!(p > 0.0)) throw DomainError("profile populations must be positive");
    rates.push_back(-std::log(p) / wait_s);
  }
  return rates;
}

struct LorentzianGuess {
  double f0;
  double peak;
  double width;
};

LorentzianGuess guess_peak(std::span<const double> offsets, std::span<const double> rates,
                           double floor) {
  const auto imax = static_cast<std::size_t>(
      std::max_element(rates.begin(), rates.end()) - rates.begin());
  const double peak = rates[imax] - floor;
  std::size_t lo = imax;
  std::size_t hi = imax;
  while (lo > 0 && rates[lo - 1] - floor >= 0.5 * peak) --lo;
  while (hi + 1 < rates.size() && rates[hi + 1] - floor >= 0.5 * peak) ++hi;
  const double step = offsets.size() > 1 ? std::abs(offsets[1] - offsets[0]) : 1.0;
  const double width = std::max(0.5 * (offsets[hi] - offsets[lo]), 0.5 * step);
  return {offsets[imax], std::max(peak, 0.0), width};
}

// Sum of `k` Lorentzians plus a constant; params [f0, a, gamma] * k, then c.
ModelSpec lorentzian_model(std::size_t k, double span_lo, double span_hi, double min_width) {
  ModelSpec model;
  model.name = k == 1 ? "tls_lorentzian" : "tls_lorentzian_multi";
  const double span = span_hi - span_lo;
  for (std::size_t j = 0; j < k; ++j) {
    const std::string suffix = k == 1 ? "" : "_" + std::to_string(j);
    model.parameter_names.push_back("f_offset_hz" + suffix);
    model.parameter_names.push_back("peak_excess" + suffix);
    model.parameter_names.push_back("gamma_hz" + suffix);
    model.bounds.emplace_back(ParameterBounds{span_lo, span_hi});
    model.bounds.emplace_back(ParameterBounds{0.0, 1e15});
    model.bounds.emplace_back(ParameterBounds{min_width, 2.0 * span});
  }
  model.parameter_names.push_back("gamma_1q");
  model.bounds.emplace_back(std::nullopt);
  model.evaluate = [k](std::span<const double> p, std::span<const double> x) {
    double v = p[3 * k];
    for (std::size_t j = 0; j < k; ++j) {
      const double d = x[0] - p[3 * j];
      const double g2 = p[3 * j + 2] * p[3 * j + 2];
      v += p[3 * j + 1] * g2 / (g2 + d * d);
    }
    return v;
  };
  model.gradient = [k](std::span<const double> p, std::span<const double> x, std::span<double> g) {
    for (std::size_t j = 0; j < k; ++j) {
      const double d = x[0] - p[3 * j];
      const double a = p[3 * j + 1];
      const double w = p[3 * j + 2];
      const double den = w * w + d * d;
      g[3 * j] = a * w * w * 2.0 * d / (den * den);
      g[3 * j + 1] = w * w / den;
      g[3 * j + 2] = a * 2.0 * w * d * d / (den * den);
    }
    g[3 * k] = 1.0;
  };
  return model;
}

TlsExtraction to_extraction(const FitResult& fit, std::size_t j, std::size_t k) {
  TlsExtraction e;
  e.f_offset_hz = fit.params[3 * j];
  e.peak_excess = fit.params[3 * j + 1];
  e.peak_excess_error = fit.std_errors[3 * j + 1];
  e.gamma_hz = fit.params[3 * j + 2];
  e.gamma_1q = fit.params[3 * k];
  // peak excess = 2 g^2 / Gamma
  e.coupling_g_hz = std::sqrt(std::max(e.peak_excess, 0.0) * e.gamma_hz / 2.0);
  e.found = fit.converged && e.peak_excess > 0.0 && e.peak_excess > 2.0 * e.peak_excess_error;
  e.fit = fit;
  return e;
}

void check_profile(std::span<const double> profile, std::span<const double> offsets,
                   double wait_s) {
  if (profile.size() != offsets.size()) throw DomainError("profile and offsets differ in length");
  if (profile.size() < 5) throw DomainError("profile needs at least 5 points");
  if (!(wait_s > 0.0)) throw DomainError("wait time must be positive");
}

TlsExtraction fit_single(std::span<const double> offsets, std::span<const double> rates,
                         double gamma_1q_guess) {
  const double floor = gamma_1q_guess > 0.0 ? gamma_1q_guess
                                            : median_of({rates.begin(), rates.end()});
  const auto guess = guess_peak(offsets, rates, floor);
  const double step = std::abs(offsets[1] - offsets[0]);
  const auto model = lorentzian_model(1, offsets.front(), offsets.back(), 0.1 * step);
  const std::vector<double> init = {guess.f0, guess.peak, std::max(guess.width, 0.1 * step), floor};
  try {
    const FitResult fit = fit_curve(model, Dataset::from_xy(offsets, rates), init);
    return to_extraction(fit, 0, 1);
  } catch (const DomainError&) {
    TlsExtraction none;
    none.gamma_1q = floor;
    return none;
  }
}

}  // namespace

TlsExtraction extract_tls(std::span<const double> profile, std::span<const double> offsets_hz,
                          double wait_s, double gamma_1q_guess) {
  check_profile(profile, offsets_hz, wait_s);
  const auto rates = profile_rates(profile, wait_s);
  return fit_single(offsets_hz, rates, gamma_1q_guess);
}

std::vector<TlsExtraction> extract_defects(std::span<const double> profile,
                                           std::span<const double> offsets_hz, double wait_s,
                                           double gamma_1q_guess, int max_defects,
                                           double min_significance) {
  check_profile(profile, offsets_hz, wait_s);
  auto significance = [](const TlsExtraction& e) {
    return e.peak_excess_error > 0.0 ? e.peak_excess / e.peak_excess_error : 0.0;
  };
  std::vector<double> residual = profile_rates(profile, wait_s);
  std::vector<TlsExtraction> found;
  for (int n = 0; n < max_defects; ++n) {
    const auto e = fit_single(offsets_hz, residual, gamma_1q_guess);
    if (!e.found || significance(e) < min_significance) break;
    found.push_back(e);
    for (std::size_t i = 0; i < residual.size(); ++i) {
      const double d = offsets_hz[i] - e.f_offset_hz;
      const double g2 = e.gamma_hz * e.gamma_hz;
      residual[i] -= e.peak_excess * g2 / (g2 + d * d);
    }
  }

  // Joint refit; the weakest component is dropped until all are significant.
  const double step = std::abs(offsets_hz[1] - offsets_hz[0]);
  const auto rates = profile_rates(profile, wait_s);
  std::vector<TlsExtraction> out;
  while (!found.empty()) {
    const std::size_t k = found.size();
    const auto model = lorentzian_model(k, offsets_hz.front(), offsets_hz.back(), 0.1 * step);
    std::vector<double> init;
    for (const auto& e : found) {
      init.push_back(e.f_offset_hz);
      init.push_back(e.peak_excess);
      init.push_back(e.gamma_hz);
    }
    init.push_back(found.back().gamma_1q);
    const FitResult joint = fit_curve(model, Dataset::from_xy(offsets_hz, rates), init);
    out.clear();
    for (std::size_t j = 0; j < k; ++j) out.push_back(to_extraction(joint, j, k));
    const auto weakest = std::min_element(out.begin(), out.end(), [&](const auto& a, const auto& b) {
      return significance(a) < significance(b);
    });
    if (weakest->found && significance(*weakest) >= min_significance) break;
    found.erase(found.begin() + (weakest - out.begin()));
    out.clear();
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.f_offset_hz < b.f_offset_hz; });
  return out;
}

// -- coherence ------------------------------------------------------------------

namespace {

double quantile_sorted(const std::vector<double>& x, double q) {
  const double h = (static_cast<double>(x.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

}  // namespace

CoherenceSummary summarize_coherence(std::span<const double> samples) {
  if (samples.size() < 4) throw DomainError("coherence summary needs at least 4 samples");
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  CoherenceSummary s;
  s.count = x.size();
  const double n = static_cast<double>(x.size());
  s.mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(ss / (n - 1.0));
  s.median = quantile_sorted(x, 0.5);
  s.q1 = quantile_sorted(x, 0.25);
  s.q3 = quantile_sorted(x, 0.75);
  s.cap_low = s.median - 3.0 * s.stddev;
  s.cap_high = s.median + 3.0 * s.stddev;
  for (double v : samples) {
    if (v < s.cap_low || v > s.cap_high) s.outliers.push_back(v);
  }
  return s;
}

bool significant_change(const CoherenceSummary& before, const CoherenceSummary& after) {
  return after.median < before.cap_low || after.median > before.cap_high;
}

}  // namespace lasertune
