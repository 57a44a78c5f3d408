#include "lasertune/cli.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <set>

#include <CLI11.hpp>

#include "lasertune/aging_model.hpp"
#include "lasertune/core_physics.hpp"
#include "lasertune/errors.hpp"
#include "lasertune/io.hpp"
#include "lasertune/tls_sim.hpp"
#include "lasertune/tuner.hpp"
#include "lasertune/wafer_ops.hpp"

namespace lasertune {

namespace {

namespace fs = std::filesystem;
using io::json;

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::string output;
  std::string format = "json";
};

// Thrown after a partial fit report has been written.
struct NonConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t require_seed(const GlobalOptions& g, const char* command) {
  if (!g.seed) {
    throw InputError(std::string(command) + ": --seed is required for a stochastic run");
  }
  return *g.seed;
}

// Writes to --output or stdout.
void emit(const GlobalOptions& g, const std::string& content, std::ostream& out) {
  if (g.output.empty() || g.output == "-") {
    out << content;
  } else {
    io::write_atomic(g.output, content);
  }
}

fs::path output_dir(const GlobalOptions& g) { return g.output.empty() ? fs::path(".") : fs::path(g.output); }

DoseModel load_dose(const std::string& path) {
  if (path.empty()) return DoseModel::defaults();
  return io::dose_model_from_json(io::read_json(path));
}

io::CsvTable load_csv(const std::string& path) {
  return io::parse_csv(io::read_text(path), path);
}

// -- simulate-wafer -------------------------------------------------------------

struct SimulateOptions {
  std::string wafer;
  std::string recipe;
  std::string dose;
  double sigma_center_um = AlignmentNoise{}.sigma_center_um;
  double sigma_focus_um = AlignmentNoise{}.sigma_focus_um;
  double qc_threshold = 0.97;
  bool zero_noise = false;
};

int cmd_simulate_wafer(const GlobalOptions& g, const SimulateOptions& o, std::ostream& out) {
  const WaferLayout wafer = io::wafer_from_json(io::read_json(o.wafer));
  const LasingRecipe recipe = io::recipe_from_json(io::read_json(o.recipe));
  BatchConfig config;
  config.dose = load_dose(o.dose);
  config.alignment = {o.sigma_center_um, o.sigma_focus_um};
  config.qc_threshold = o.qc_threshold;
  if (!(o.sigma_center_um >= 0.0) || !(o.sigma_focus_um >= 0.0)) {
    throw InputError("alignment noise must be non-negative");
  }
  if (!(o.qc_threshold > 0.0 && o.qc_threshold <= 1.0)) {
    throw InputError("--qc-threshold must lie in (0, 1]");
  }
  std::uint64_t seed = 0;
  if (o.zero_noise) {
    config.alignment = {0.0, 0.0};
    config.dose.stochastic.relative_sigma = 0.0;
    seed = g.seed.value_or(0);
  } else {
    seed = require_seed(g, "simulate-wafer");
  }
  recipe.validate();
  const BatchReport report = run_batch(wafer, recipe, config, seed);
  const fs::path dir = output_dir(g);
  io::write_atomic(dir / "batch_report.json", io::dump(io::to_json(report)));
  io::write_atomic(dir / "batch_junctions.csv", io::batch_csv(report));
  out << "simulated " << report.junctions.size() << " junctions: " << report.passed
      << " passed, " << report.excluded << " excluded, estimated wall time "
      << io::format_number(report.estimated_wall_time_s) << " s\n";
  return kExitOk;
}

// -- fit ----------------------------------------------------------------------------

struct FitOptionsCli {
  std::string kind;
  std::string data;
  std::string side = "below";
  double tone_detuning_mhz = 80.0;
  double wait_us = 40.0;
  double gamma_1q_guess = 0.0;
  std::string dose;
};

ToneSide parse_side(const std::string& s) {
  if (s == "below") return ToneSide::below;
  if (s == "above") return ToneSide::above;
  throw InputError("--side must be below or above");
}

json fit_report(const FitResult& f) { return io::to_json(f); }

int finish_fit(const GlobalOptions& g, const json& report, const std::string& csv, bool converged,
               std::ostream& out) {
  emit(g, g.format == "csv" ? csv : io::dump(report), out);
  if (!converged) throw NonConvergence("fit did not converge; partial report written");
  return kExitOk;
}

int cmd_fit(const GlobalOptions& g, const FitOptionsCli& o, std::ostream& out) {
  const io::CsvTable t = load_csv(o.data);
  const std::size_t n = t.rows.size();

  if (o.kind == "aging") {
    const auto series = io::aging_series_from_csv(t);
    std::map<std::pair<std::string, int>, std::vector<AgingSeries>> groups;
    for (const auto& s : series) groups[{s.wafer_label, static_cast<int>(s.cohort)}].push_back(s);
    json list = json::array();
    io::CsvWriter csv({"wafer", "cohort", "parameter", "value", "std_error"});
    bool all = true;
    for (const auto& [key, members] : groups) {
      const AgingFit fit = fit_aging(members);
      json entry = fit_report(fit.fit);
      entry["wafer"] = key.first;
      const char* cohort = key.second == static_cast<int>(Cohort::annealed) ? "annealed" : "unannealed";
      entry["cohort"] = cohort;
      entry["junction_count"] = members.size();
      entry["tau_identified"] = fit.tau_identified();
      list.push_back(entry);
      all = all && fit.fit.converged;
      for (std::size_t i = 0; i < fit.fit.params.size(); ++i) {
        csv.cell(key.first).cell(cohort).cell(fit.fit.parameter_names[i]).cell(fit.fit.params[i]).cell(
            fit.fit.std_errors[i]);
        csv.end_row();
      }
    }
    const json report = {{"model", "aging"}, {"groups", list}, {"converged", all}};
    return finish_fit(g, report, csv.str(), all, out);
  }

  if (o.kind == "dose") {
    std::vector<DosePoint> pts;
    for (std::size_t i = 0; i < n; ++i) {
      DosePoint p;
      p.power_mw = t.number(i, "power_mw");
      p.shift = t.number(i, "shift_frac");
      if (t.has("exposure_s")) p.exposure_s = t.number(i, "exposure_s");
      if (t.has("repetitions")) p.repetitions = static_cast<int>(t.number(i, "repetitions"));
      pts.push_back(p);
    }
    const FitResult f = fit_dose_response(pts, load_dose(o.dose));
    return finish_fit(g, fit_report(f), io::fit_csv(f), f.converged, out);
  }

  if (o.kind == "displacement") {
    std::vector<DisplacementPoint> pts;
    for (std::size_t i = 0; i < n; ++i) {
      pts.push_back({t.number(i, "displacement_um"), t.number(i, "shift_frac")});
    }
    const FitResult f = fit_displacement(pts, load_dose(o.dose));
    return finish_fit(g, fit_report(f), io::fit_csv(f), f.converged, out);
  }

  if (o.kind == "stark") {
    std::vector<StarkPoint> pts;
    for (std::size_t i = 0; i < n; ++i) {
      pts.push_back({t.number(i, "amplitude"), t.number(i, "shift_mhz") * 1e6});
    }
    const FitResult f = fit_stark(pts, o.tone_detuning_mhz * 1e6, parse_side(o.side));
    json report = fit_report(f);
    report["conversion_mhz"] = f.params[0] * 1e-6;
    report["side"] = o.side;
    report["tone_detuning_mhz"] = o.tone_detuning_mhz;
    return finish_fit(g, report, io::fit_csv(f), f.converged, out);
  }

  if (o.kind == "tls") {
    std::vector<double> offsets;
    std::vector<double> pops;
    for (std::size_t i = 0; i < n; ++i) {
      offsets.push_back(t.number(i, "offset_mhz") * 1e6);
      pops.push_back(t.number(i, "population"));
    }
    const double wait = o.wait_us * 1e-6;
    const auto found = extract_defects(pops, offsets, wait, o.gamma_1q_guess);
    json report = io::defects_json(found, wait);
    report["model"] = "tls";
    bool converged = true;
    io::CsvWriter csv({"f_offset_mhz", "g_khz", "gamma_mhz", "gamma_1q_per_s"});
    for (const auto& e : found) {
      converged = converged && e.fit.converged;
      csv.cell(e.f_offset_hz * 1e-6).cell(e.coupling_g_hz * 1e-3).cell(e.gamma_hz * 1e-6).cell(e.gamma_1q);
      csv.end_row();
    }
    report["converged"] = converged;
    return finish_fit(g, report, csv.str(), converged, out);
  }

  if (o.kind == "barrier") {
    std::vector<BarrierSample> rows;
    for (std::size_t i = 0; i < n; ++i) {
      rows.push_back({t.number(i, "resistance_ohm"), t.number(i, "area_um2"), t.number(i, "thickness_nm")});
    }
    const BarrierFit fit = fit_barrier(rows);
    json report = fit_report(fit.fit);
    report["tau_nm"] = fit.params.tau_nm;
    report["prefactor_ohm_um2"] = fit.params.prefactor_ohm_um2;
    report["resistance_factor_per_angstrom"] = fit.resistance_factor(0.1);
    return finish_fit(g, report, io::fit_csv(fit.fit), fit.fit.converged, out);
  }

  throw InputError("unknown fit kind '" + o.kind +
                   "'; expected aging, dose, displacement, stark, tls or barrier");
}

// -- plan ----------------------------------------------------------------------------

struct PlanOptionsCli {
  std::string wafer;
  std::string targets;
  std::string dose;
  double min_spacing_mhz = -1.0;
  int max_shots = PlanOptions{}.max_shots;
};

struct PlanEntry {
  std::string id;
  double r_now = 0.0;
  double f_now = 0.0;
  double f_target = 0.0;
  double required = 0.0;
  ShotPlan shots;
};

int cmd_plan(const GlobalOptions& g, const PlanOptionsCli& o, std::ostream& out) {
  const WaferLayout wafer = io::wafer_from_json(io::read_json(o.wafer));
  const json tj = io::read_json(o.targets);
  const DoseModel dose = load_dose(o.dose);
  PlanOptions popts;
  popts.max_shots = o.max_shots;
  if (o.max_shots < 1) throw InputError("--max-shots must be at least 1");

  const JunctionPhysics phys;
  std::map<std::string, double> explicit_targets;
  if (!tj.is_object()) throw InputError("targets: expected an object");
  if (tj.contains("targets")) {
    const json& list = tj.at("targets");
    if (!list.is_array()) throw InputError("targets.targets: expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string ctx = "targets.targets[" + std::to_string(i) + "]";
      const json& e = list[i];
      if (!e.is_object() || !e.contains("id") || !e.at("id").is_string()) {
        throw InputError(ctx + ".id: expected a string");
      }
      const std::string id = e.at("id").get<std::string>();
      double f = 0.0;
      if (e.contains("f_target_ghz") && e.at("f_target_ghz").is_number()) {
        f = e.at("f_target_ghz").get<double>() * 1e9;
      } else if (e.contains("downshift_mhz") && e.at("downshift_mhz").is_number()) {
        const auto it = std::find_if(wafer.junctions.begin(), wafer.junctions.end(),
                                     [&](const JunctionRecord& j) { return j.id == id; });
        if (it == wafer.junctions.end()) throw InputError(ctx + ".id: unknown junction '" + id + "'");
        f = phys.qubit_frequency(Ohms(it->resistance_ohm)).value() -
            e.at("downshift_mhz").get<double>() * 1e6;
      } else {
        throw InputError(ctx + ": expected f_target_ghz or downshift_mhz");
      }
      explicit_targets[id] = f;
    }
  }
  double spacing_mhz = o.min_spacing_mhz;
  if (spacing_mhz < 0.0 && tj.contains("min_spacing_mhz")) {
    if (!tj.at("min_spacing_mhz").is_number()) throw InputError("targets.min_spacing_mhz: expected a number");
    spacing_mhz = tj.at("min_spacing_mhz").get<double>();
  }

  std::set<std::string> ids;
  for (const auto& j : wafer.junctions) ids.insert(j.id);
  for (const auto& [id, _] : explicit_targets) {
    if (!ids.count(id)) throw InputError("targets: unknown junction '" + id + "'");
  }

  std::vector<PlanEntry> entries;
  std::vector<double> wanted;
  for (const auto& j : wafer.junctions) {
    PlanEntry e;
    e.id = j.id;
    e.r_now = j.resistance_ohm;
    e.f_now = phys.qubit_frequency(Ohms(j.resistance_ohm)).value();
    const auto it = explicit_targets.find(j.id);
    e.f_target = it == explicit_targets.end() ? e.f_now : it->second;
    wanted.push_back(e.f_target);
    entries.push_back(e);
  }
  if (spacing_mhz >= 0.0) {
    const auto alloc = allocate_targets(wanted, spacing_mhz * 1e6);
    for (std::size_t i = 0; i < entries.size(); ++i) entries[i].f_target = alloc[i];
  }

  json list = json::array();
  io::CsvWriter csv({"id", "f_now_ghz", "f_target_ghz", "required_shift", "shots", "planned_shift"});
  for (auto& e : entries) {
    e.required = required_shift(Hertz(e.f_now), Hertz(e.f_target));
    e.shots = recipe_for_shift(e.required, dose, popts);
    json shots = json::array();
    for (const auto& r : e.shots.shots) shots.push_back(io::to_json(r));
    list.push_back({{"id", e.id},
                    {"r_now_ohm", e.r_now},
                    {"f_now_ghz", e.f_now * 1e-9},
                    {"f_target_ghz", e.f_target * 1e-9},
                    {"required_shift", e.required},
                    {"planned_shots", shots},
                    {"planned_shift", e.shots.planned_shift}});
    csv.cell(e.id)
        .cell(e.f_now * 1e-9)
        .cell(e.f_target * 1e-9)
        .cell(e.required)
        .cell(static_cast<long long>(e.shots.shots.size()))
        .cell(e.shots.planned_shift);
    csv.end_row();
  }
  json report = {{"wafer_id", wafer.wafer_id}, {"junctions", list}};
  if (spacing_mhz >= 0.0) report["min_spacing_mhz"] = spacing_mhz;
  emit(g, g.format == "csv" ? csv.str() : io::dump(report), out);
  return kExitOk;
}

// -- tune ------------------------------------------------------------------------------

struct TuneOptionsCli {
  std::string wafer;
  std::string plan;
  std::string dose;
  TunePolicy policy;
  double shot_sigma = -1.0;
  bool zero_noise = false;
};

int cmd_tune(const GlobalOptions& g, const TuneOptionsCli& o, std::ostream& out) {
  const WaferLayout wafer = io::wafer_from_json(io::read_json(o.wafer));
  const json plan = io::read_json(o.plan);
  DoseModel dose = load_dose(o.dose);
  TunePolicy policy = o.policy;
  if (o.shot_sigma >= 0.0) dose.stochastic.relative_sigma = o.shot_sigma;
  std::uint64_t seed = 0;
  if (o.zero_noise) {
    dose.stochastic.relative_sigma = 0.0;
    policy.measurement_noise_sigma = 0.0;
    seed = g.seed.value_or(0);
  } else {
    seed = require_seed(g, "tune");
  }
  try {
    policy.validate();
  } catch (const DomainError& e) {
    throw InputError(std::string("policy: ") + e.what());
  }

  std::map<std::string, double> resistance;
  for (const auto& j : wafer.junctions) resistance[j.id] = j.resistance_ohm;
  if (!plan.is_object() || !plan.contains("junctions") || !plan.at("junctions").is_array()) {
    throw InputError("plan.junctions: expected an array");
  }
  std::vector<TuneJob> jobs;
  const json& list = plan.at("junctions");
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string ctx = "plan.junctions[" + std::to_string(i) + "]";
    const json& e = list[i];
    if (!e.is_object() || !e.contains("id") || !e.at("id").is_string()) {
      throw InputError(ctx + ".id: expected a string");
    }
    if (!e.contains("f_target_ghz") || !e.at("f_target_ghz").is_number()) {
      throw InputError(ctx + ".f_target_ghz: expected a number");
    }
    const std::string id = e.at("id").get<std::string>();
    const auto it = resistance.find(id);
    if (it == resistance.end()) throw InputError(ctx + ".id: unknown junction '" + id + "'");
    jobs.push_back({id, it->second, e.at("f_target_ghz").get<double>() * 1e9});
  }

  const auto traces = tune_population(jobs, policy, dose, seed);
  const TuneSummary summary = summarize(traces);
  const fs::path dir = output_dir(g);
  if (g.format == "csv") {
    io::write_atomic(dir / "tune_traces.csv", io::traces_csv(traces));
  } else {
    json tj = json::array();
    for (const auto& t : traces) tj.push_back(io::to_json(t));
    io::write_atomic(dir / "tune_traces.json", io::dump(tj));
  }
  json sj = io::to_json(summary);
  sj["policy"] = io::to_json(policy);
  sj["shot_relative_sigma"] = dose.stochastic.relative_sigma;
  io::write_atomic(dir / "tune_summary.json", io::dump(sj));
  out << "tuned " << summary.count << " junctions: " << summary.converged << " converged, "
      << summary.overshoot << " overshoot, " << summary.exhausted << " exhausted\n";
  return kExitOk;
}

// -- tls-scan -----------------------------------------------------------------------------

struct ScanOptions {
  std::string model;
  std::string calibration;
  double offset_min_mhz = -33.0;
  double offset_max_mhz = 33.0;
  double offset_step_mhz = 0.25;
  double duration_h = 160.0;
  double step_s = 600.0;
  double wait_us = 40.0;
  double gamma_1q_guess = 0.0;
};

int cmd_tls_scan(const GlobalOptions& g, const ScanOptions& o, std::ostream& out) {
  const std::uint64_t seed = require_seed(g, "tls-scan");
  const QubitNoiseModel model = io::noise_model_from_json(io::read_json(o.model));
  const StarkCalibration cal = o.calibration.empty()
                                   ? StarkCalibration{}
                                   : io::calibration_from_json(io::read_json(o.calibration));
  if (!(o.offset_step_mhz > 0.0) || !(o.offset_max_mhz > o.offset_min_mhz)) {
    throw InputError("offset grid: need step > 0 and max > min");
  }
  if (!(o.duration_h > 0.0) || !(o.step_s > 0.0) || !(o.wait_us > 0.0)) {
    throw InputError("time grid: duration, step and wait must be positive");
  }
  const MapGrid grid = MapGrid::uniform(o.offset_min_mhz * 1e6, o.offset_max_mhz * 1e6,
                                        o.offset_step_mhz * 1e6, o.duration_h, o.step_s,
                                        o.wait_us * 1e-6);
  json drive = json::array();
  for (double f : grid.offsets_hz) {
    const ToneSide side = f < 0.0 ? ToneSide::below : ToneSide::above;
    double a = 0.0;
    try {
      a = amplitude_for_shift(f, cal, side);
    } catch (const DomainError& e) {
      throw InputError("offset grid: " + std::string(e.what()));
    }
    drive.push_back({{"offset_mhz", f * 1e-6},
                     {"side", side == ToneSide::below ? "below" : "above"},
                     {"amplitude", a}});
  }

  const SpectroMap map = simulate_map(model, grid, seed);
  const auto profile = time_average(map);
  const double guess = o.gamma_1q_guess > 0.0 ? o.gamma_1q_guess : model.gamma_1q;
  const auto found = extract_defects(profile, map.offsets_hz, map.wait_s, guess);

  const fs::path dir = output_dir(g);
  io::write_atomic(dir / "tls_map.csv", io::map_csv(map));
  io::write_atomic(dir / "tls_defects.json", io::dump(io::defects_json(found, map.wait_s)));
  json cj = io::to_json(cal);
  cj["drive"] = drive;
  io::write_atomic(dir / "tls_calibration.json", io::dump(cj));
  if (found.empty()) {
    out << "no persistent defect\n";
  } else {
    for (const auto& e : found) {
      out << "defect at " << io::format_number(e.f_offset_hz * 1e-6) << " MHz, g = "
          << io::format_number(e.coupling_g_hz * 1e-3) << " kHz\n";
    }
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Laser-annealing digital twin for transmon junctions", "lasertune"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "Master seed for stochastic runs");
  app.add_option("--output", g.output, "Output file, or directory for multi-file commands");
  app.add_option("--format", g.format, "Tabular output format")
      ->check(CLI::IsMember({"json", "csv"}));

  SimulateOptions sim;
  auto* sim_cmd = app.add_subcommand("simulate-wafer", "Align, gate and anneal every junction");
  sim_cmd->add_option("wafer", sim.wafer, "Wafer JSON")->required();
  sim_cmd->add_option("recipe", sim.recipe, "Recipe JSON")->required();
  sim_cmd->add_option("--dose", sim.dose, "Dose-model parameters JSON");
  sim_cmd->add_option("--sigma-center-um", sim.sigma_center_um, "Centering error sigma");
  sim_cmd->add_option("--sigma-focus-um", sim.sigma_focus_um, "Focus error sigma");
  sim_cmd->add_option("--qc-threshold", sim.qc_threshold, "QC pass threshold");
  sim_cmd->add_flag("--zero-noise", sim.zero_noise, "Disable alignment and shot noise");

  FitOptionsCli fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a model to CSV data");
  fit_cmd->add_option("kind", fit.kind, "aging|dose|displacement|stark|tls|barrier")->required();
  fit_cmd->add_option("data", fit.data, "Data CSV")->required();
  fit_cmd->add_option("--side", fit.side, "Stark tone side: below|above");
  fit_cmd->add_option("--tone-detuning-mhz", fit.tone_detuning_mhz, "Stark tone detuning");
  fit_cmd->add_option("--wait-us", fit.wait_us, "Population wait time");
  fit_cmd->add_option("--gamma1q-guess", fit.gamma_1q_guess, "Background rate guess, 1/s");
  fit_cmd->add_option("--dose", fit.dose, "Dose-model parameters JSON");

  PlanOptionsCli plan;
  auto* plan_cmd = app.add_subcommand("plan", "Plan shots toward frequency targets");
  plan_cmd->add_option("wafer", plan.wafer, "Wafer JSON")->required();
  plan_cmd->add_option("targets", plan.targets, "Targets JSON")->required();
  plan_cmd->add_option("--dose", plan.dose, "Dose-model parameters JSON");
  plan_cmd->add_option("--min-spacing-mhz", plan.min_spacing_mhz, "Allocate collision-free targets");
  plan_cmd->add_option("--max-shots", plan.max_shots, "Shot limit per junction");

  TuneOptionsCli tune;
  auto* tune_cmd = app.add_subcommand("tune", "Simulate closed-loop tuning");
  tune_cmd->add_option("wafer", tune.wafer, "Wafer JSON")->required();
  tune_cmd->add_option("plan", tune.plan, "Plan JSON")->required();
  tune_cmd->add_option("--dose", tune.dose, "Dose-model parameters JSON");
  tune_cmd->add_option("--step-fraction", tune.policy.step_fraction, "Fraction of remaining shift per round");
  tune_cmd->add_option("--tolerance", tune.policy.tolerance, "Relative frequency tolerance");
  tune_cmd->add_option("--max-iterations", tune.policy.max_iterations, "Anneal round limit");
  tune_cmd->add_option("--measurement-noise", tune.policy.measurement_noise_sigma,
                       "Relative resistance measurement sigma");
  tune_cmd->add_option("--shot-noise", tune.shot_sigma, "Relative shot sigma");
  tune_cmd->add_flag("--zero-noise", tune.zero_noise, "Disable shot and measurement noise");

  ScanOptions scan;
  auto* scan_cmd = app.add_subcommand("tls-scan", "Simulate a TLS spectro-temporal map and extract defects");
  scan_cmd->add_option("model", scan.model, "Qubit noise model JSON")->required();
  scan_cmd->add_option("--calibration", scan.calibration, "Stark calibration JSON");
  scan_cmd->add_option("--offset-min-mhz", scan.offset_min_mhz, "Lowest offset");
  scan_cmd->add_option("--offset-max-mhz", scan.offset_max_mhz, "Highest offset");
  scan_cmd->add_option("--offset-step-mhz", scan.offset_step_mhz, "Offset step");
  scan_cmd->add_option("--duration-h", scan.duration_h, "Acquisition length");
  scan_cmd->add_option("--step-s", scan.step_s, "Time step");
  scan_cmd->add_option("--wait-us", scan.wait_us, "Population wait time");
  scan_cmd->add_option("--gamma1q-guess", scan.gamma_1q_guess, "Background rate guess, 1/s");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }
  if (seed_opt->count() > 0) g.seed = seed_value;

  try {
    if (sim_cmd->parsed()) return cmd_simulate_wafer(g, sim, out);
    if (fit_cmd->parsed()) return cmd_fit(g, fit, out);
    if (plan_cmd->parsed()) return cmd_plan(g, plan, out);
    if (tune_cmd->parsed()) return cmd_tune(g, tune, out);
    if (scan_cmd->parsed()) return cmd_tls_scan(g, scan, out);
  } catch (const NonConvergence& e) {
    err << "error: " << e.what() << '\n';
    return kExitNonConvergence;
  } catch (const FitEvaluationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNonConvergence;
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const DomainError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace lasertune
