#include "lasertune/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <system_error>

#include "lasertune/errors.hpp"

namespace lasertune::io {

namespace fs = std::filesystem;

// -- files and numbers ---------------------------------------------------------

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_number(std::string_view text, const std::string& where) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw InputError(where + ": expected a number, got '" + std::string(text) + "'");
  }
  return v;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_atomic(const fs::path& path, std::string_view content) {
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::error_code ec;
  fs::create_directories(dir, ec);
  std::random_device rd;
  const fs::path tmp =
      dir / (path.filename().string() + ".tmp" + std::to_string(rd() % 1000000u));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError(tmp.string() + ": cannot open for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      fs::remove(tmp, ec);
      throw InputError(tmp.string() + ": write failed");
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw InputError(path.string() + ": cannot replace file");
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// -- CSV -------------------------------------------------------------------------

namespace {

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  for (auto& s : out) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }
  return out;
}

}  // namespace

CsvTable parse_csv(std::string_view text, const std::string& source) {
  CsvTable t;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    auto fields = split_line(line);
    if (!have_header) {
      t.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw InputError(source + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(t.header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    }
    t.rows.push_back(std::move(fields));
    t.line_numbers.push_back(lineno);
  }
  if (!have_header) throw InputError(source + ": missing header line");
  return t;
}

bool CsvTable::has(std::string_view name) const {
  for (const auto& h : header) {
    if (h == name) return true;
  }
  return false;
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw InputError("csv: missing column '" + std::string(name) + "'");
}

double CsvTable::number(std::size_t row, std::string_view name) const {
  const std::size_t c = column(name);
  return parse_number(rows[row][c], "line " + std::to_string(line_numbers[row]) + ", column '" +
                                        std::string(name) + "'");
}

const std::string& CsvTable::text(std::size_t row, std::string_view name) const {
  return rows[row][column(name)];
}

CsvWriter::CsvWriter(std::vector<std::string> header) : width_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out_ += ',';
    out_ += header[i];
  }
  out_ += '\n';
}

CsvWriter& CsvWriter::cell(double v) { return cell(std::string_view(format_number(v))); }

CsvWriter& CsvWriter::cell(long long v) { return cell(std::string_view(std::to_string(v))); }

CsvWriter& CsvWriter::cell(std::string_view s) {
  if (col_ > 0) out_ += ',';
  out_ += s;
  ++col_;
  return *this;
}

void CsvWriter::end_row() {
  if (col_ != width_) throw DomainError("csv row width does not match header");
  out_ += '\n';
  col_ = 0;
}

// -- JSON field access ------------------------------------------------------------

namespace {

const json& field(const json& j, const char* key, const std::string& ctx) {
  if (!j.is_object()) throw InputError(ctx + ": expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw InputError(ctx + "." + key + ": missing field");
  return *it;
}

double get_number(const json& j, const char* key, const std::string& ctx) {
  const json& v = field(j, key, ctx);
  if (!v.is_number()) throw InputError(ctx + "." + key + ": expected a number");
  return v.get<double>();
}

double opt_number(const json& j, const char* key, double fallback, const std::string& ctx) {
  if (!j.contains(key)) return fallback;
  return get_number(j, key, ctx);
}

long long get_integer(const json& j, const char* key, const std::string& ctx) {
  const json& v = field(j, key, ctx);
  if (!v.is_number_integer()) throw InputError(ctx + "." + key + ": expected an integer");
  return v.get<long long>();
}

std::string get_string(const json& j, const char* key, const std::string& ctx) {
  const json& v = field(j, key, ctx);
  if (!v.is_string()) throw InputError(ctx + "." + key + ": expected a string");
  return v.get<std::string>();
}

// Rethrows a DomainError from validation as an input error with context.
template <class F>
void checked(const std::string& ctx, F&& f) {
  try {
    f();
  } catch (const DomainError& e) {
    throw InputError(ctx + ": " + e.what());
  }
}

}  // namespace

// -- dose model ----------------------------------------------------------------

LasingRecipe recipe_from_json(const json& j) {
  const std::string ctx = "recipe";
  LasingRecipe r;
  r.power_mw = get_number(j, "power_mw", ctx);
  r.exposure_s = opt_number(j, "exposure_s", r.exposure_s, ctx);
  if (j.contains("repetitions")) r.repetitions = static_cast<int>(get_integer(j, "repetitions", ctx));
  r.displacement_um = opt_number(j, "displacement_um", r.displacement_um, ctx);
  if (!(r.power_mw >= 0.0)) throw InputError(ctx + ".power_mw: must be non-negative");
  if (!(r.exposure_s > 0.0)) throw InputError(ctx + ".exposure_s: must be positive");
  if (r.repetitions < 1) throw InputError(ctx + ".repetitions: must be at least 1");
  if (!(r.displacement_um >= 0.0)) throw InputError(ctx + ".displacement_um: must be non-negative");
  return r;
}

json to_json(const LasingRecipe& r) {
  return {{"power_mw", r.power_mw},
          {"exposure_s", r.exposure_s},
          {"repetitions", r.repetitions},
          {"displacement_um", r.displacement_um}};
}

namespace {

template <class Fn>
void for_each_dose_param(DoseModel& m, Fn&& fn) {
  fn("heating_slope_c_per_mw", m.heating.slope_c_per_mw);
  fn("ambient_c", m.heating.ambient_c);
  fn("plateau_m", m.response.plateau_m);
  fn("depth_b", m.response.depth_b);
  fn("char_temperature_c", m.response.char_temperature_c);
  fn("char_exposure_s", m.response.char_exposure_s);
  fn("wavelength_nm", m.beam.wavelength_nm);
  fn("waist_um", m.beam.waist_um);
  fn("si_reflectance", m.beam.si_reflectance);
  fn("al_reflectance", m.beam.al_reflectance);
  fn("electrode_extent_um", m.beam.electrode_extent_um);
  fn("transfer_amp_a", m.displacement.transfer_amp_a);
  fn("transfer_offset_b", m.displacement.transfer_offset_b);
  fn("decay_d0_um", m.displacement.decay_d0_um);
  fn("response_scale", m.displacement.response_scale);
  fn("shot_relative_sigma", m.stochastic.relative_sigma);
  fn("shift_floor", m.stochastic.shift_floor);
  fn("neighbor_temperature_c", m.neighbor_temperature_c);
}

}  // namespace

DoseModel dose_model_from_json(const json& j) {
  const std::string ctx = "dose";
  DoseModel m = DoseModel::defaults();
  if (j.contains("version")) m.version = get_string(j, "version", ctx);
  const json& params = field(j, "parameters", ctx);
  if (!params.is_object()) throw InputError(ctx + ".parameters: expected an object");
  std::map<std::string, bool> known;
  for_each_dose_param(m, [&](const char* name, double& slot) {
    known[name] = true;
    if (!params.contains(name)) return;
    const json& v = params.at(name);
    if (v.is_object()) {
      slot = get_number(v, "value", ctx + ".parameters." + name);
    } else if (v.is_number()) {
      slot = v.get<double>();
    } else {
      throw InputError(ctx + ".parameters." + name + ": expected a number or {value}");
    }
  });
  for (const auto& [key, _] : params.items()) {
    if (!known.count(key)) throw InputError(ctx + ".parameters." + key + ": unknown parameter");
  }
  checked(ctx, [&] { m.validate(); });
  return m;
}

json to_json(const DoseModel& model) {
  DoseModel m = model;
  json params = json::object();
  for_each_dose_param(m, [&](const char* name, double& slot) { params[name] = slot; });
  return {{"version", m.version}, {"parameters", params}};
}

// -- wafer -------------------------------------------------------------------------

WaferLayout wafer_from_json(const json& j) {
  const std::string ctx = "wafer";
  WaferLayout w;
  w.wafer_id = get_string(j, "wafer_id", ctx);
  w.rows = static_cast<int>(get_integer(j, "rows", ctx));
  w.cols = static_cast<int>(get_integer(j, "cols", ctx));
  w.pitch_um = get_number(j, "pitch_um", ctx);
  const json& list = field(j, "junctions", ctx);
  if (!list.is_array()) throw InputError(ctx + ".junctions: expected an array");
  w.junctions.reserve(list.size());
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string jc = ctx + ".junctions[" + std::to_string(i) + "]";
    const json& e = list[i];
    JunctionRecord r;
    r.id = get_string(e, "id", jc);
    r.row = static_cast<int>(get_integer(e, "row", jc));
    r.col = static_cast<int>(get_integer(e, "col", jc));
    r.area_um2 = opt_number(e, "area_um2", r.area_um2, jc);
    r.resistance_ohm = get_number(e, "resistance_ohm", jc);
    r.age_days = opt_number(e, "age_days", 0.0, jc);
    checked(jc, [&] { r.validate(); });
    w.junctions.push_back(std::move(r));
  }
  checked(ctx, [&] { w.validate(); });
  return w;
}

json to_json(const WaferLayout& w) {
  json list = json::array();
  for (const auto& r : w.junctions) {
    list.push_back({{"id", r.id},
                    {"row", r.row},
                    {"col", r.col},
                    {"area_um2", r.area_um2},
                    {"resistance_ohm", r.resistance_ohm},
                    {"age_days", r.age_days}});
  }
  return {{"wafer_id", w.wafer_id},
          {"rows", w.rows},
          {"cols", w.cols},
          {"pitch_um", w.pitch_um},
          {"junctions", list}};
}

json to_json(const BatchReport& r) {
  json excluded = json::array();
  for (const auto& o : r.junctions) {
    if (o.qc_status == QcStatus::excluded) excluded.push_back(o.id);
  }
  return {{"wafer_id", r.wafer_id},
          {"master_seed", r.master_seed},
          {"recipe", to_json(r.recipe)},
          {"junction_count", r.junctions.size()},
          {"passed", r.passed},
          {"excluded", r.excluded},
          {"excluded_ids", excluded},
          {"estimated_wall_time_s", r.estimated_wall_time_s},
          {"shift_mean", r.shift_mean},
          {"shift_stddev", r.shift_stddev}};
}

std::string batch_csv(const BatchReport& r) {
  CsvWriter w({"id", "r_before_ohm", "r_after_ohm", "qc_status", "shift_frac", "qc_score",
               "centering_offset_um", "focus_error_um"});
  for (const auto& o : r.junctions) {
    w.cell(o.id)
        .cell(o.r_before_ohm)
        .cell(o.r_after_ohm)
        .cell(to_string(o.qc_status))
        .cell(o.shift_frac)
        .cell(o.qc_score)
        .cell(o.centering_offset_um)
        .cell(o.focus_error_um);
    w.end_row();
  }
  return w.str();
}

// -- fits ----------------------------------------------------------------------------

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json to_json(const FitResult& f) {
  json params = json::object();
  json errors = json::object();
  for (std::size_t i = 0; i < f.parameter_names.size(); ++i) {
    params[f.parameter_names[i]] = finite_or_null(f.params[i]);
    errors[f.parameter_names[i]] = finite_or_null(f.std_errors[i]);
  }
  return {{"model", f.model},
          {"params", params},
          {"std_errors", errors},
          {"residual_norm", finite_or_null(f.residual_norm)},
          {"converged", f.converged},
          {"iterations", f.iterations}};
}

std::string fit_csv(const FitResult& f) {
  CsvWriter w({"parameter", "value", "std_error"});
  for (std::size_t i = 0; i < f.parameter_names.size(); ++i) {
    w.cell(f.parameter_names[i]).cell(f.params[i]).cell(f.std_errors[i]);
    w.end_row();
  }
  return w.str();
}

std::vector<AgingSeries> aging_series_from_csv(const CsvTable& t) {
  const bool has_r0 = t.has("r0_ohm");
  std::map<std::string, AgingSeries> by_id;
  std::vector<std::string> order;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const std::string& id = t.text(i, "junction_id");
    const std::string where = "line " + std::to_string(t.line_numbers[i]);
    if (id.empty()) throw InputError(where + ": empty junction_id");
    const std::string& cohort = t.text(i, "cohort");
    if (cohort != "annealed" && cohort != "unannealed") {
      throw InputError(where + ", column 'cohort': expected annealed or unannealed");
    }
    auto [it, inserted] = by_id.try_emplace(id);
    AgingSeries& s = it->second;
    if (inserted) {
      order.push_back(id);
      s.junction_id = id;
      s.cohort = cohort == "annealed" ? Cohort::annealed : Cohort::unannealed;
      s.wafer_label = t.text(i, "wafer");
    } else if (s.wafer_label != t.text(i, "wafer") ||
               (cohort == "annealed") != (s.cohort == Cohort::annealed)) {
      throw InputError(where + ": junction '" + id + "' changes wafer or cohort");
    }
    if (has_r0 && !t.text(i, "r0_ohm").empty()) s.r0_ohm = t.number(i, "r0_ohm");
    const double day = t.number(i, "day");
    const double r = t.number(i, "resistance_ohm");
    if (!(day >= 0.0)) throw InputError(where + ", column 'day': must be non-negative");
    if (!(r > 0.0)) throw InputError(where + ", column 'resistance_ohm': must be positive");
    s.samples.push_back({day, r});
  }
  std::vector<AgingSeries> out;
  for (const auto& id : order) {
    AgingSeries s = std::move(by_id[id]);
    std::stable_sort(s.samples.begin(), s.samples.end(),
                     [](const AgingSample& a, const AgingSample& b) { return a.day < b.day; });
    out.push_back(std::move(s));
  }
  return out;
}

// -- TLS --------------------------------------------------------------------------

QubitNoiseModel noise_model_from_json(const json& j) {
  const std::string ctx = "model";
  QubitNoiseModel m;
  if (j.contains("t1_q_us")) {
    m.gamma_1q = 1.0 / (get_number(j, "t1_q_us", ctx) * 1e-6);
  } else {
    m.gamma_1q = opt_number(j, "gamma_1q_per_s", m.gamma_1q, ctx);
  }
  m.readout_noise_sigma = opt_number(j, "readout_noise_sigma", 0.0, ctx);
  m.dropout_probability = opt_number(j, "dropout_probability", 0.0, ctx);
  if (j.contains("defects")) {
    const json& list = j.at("defects");
    if (!list.is_array()) throw InputError(ctx + ".defects: expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string dc = ctx + ".defects[" + std::to_string(i) + "]";
      const json& e = list[i];
      TlsDefect d;
      d.f_offset_hz = opt_number(e, "f_offset_mhz", 0.0, dc) * 1e6;
      d.coupling_g_hz = get_number(e, "g_khz", dc) * 1e3;
      d.gamma_total_hz = opt_number(e, "gamma_mhz", 1.0, dc) * 1e6;
      const std::string kind = e.contains("dynamics") ? get_string(e, "dynamics", dc) : "static";
      if (kind == "static") {
        d.dynamics = StaticDynamics{};
      } else if (kind == "drifting") {
        d.dynamics = DriftingDynamics{get_number(e, "drift_sigma_mhz", dc) * 1e6,
                                      opt_number(e, "drift_interval_s", 3600.0, dc)};
      } else if (kind == "telegraphic") {
        d.dynamics = TelegraphicDynamics{get_number(e, "f_a_mhz", dc) * 1e6,
                                         get_number(e, "f_b_mhz", dc) * 1e6,
                                         get_number(e, "switch_rate_per_h", dc) / 3600.0};
      } else {
        throw InputError(dc + ".dynamics: expected static, drifting or telegraphic");
      }
      m.defects.push_back(d);
    }
  }
  checked(ctx, [&] { m.validate(); });
  return m;
}

json to_json(const QubitNoiseModel& m) {
  json list = json::array();
  for (const auto& d : m.defects) {
    json e = {{"f_offset_mhz", d.f_offset_hz * 1e-6},
              {"g_khz", d.coupling_g_hz * 1e-3},
              {"gamma_mhz", d.gamma_total_hz * 1e-6}};
    if (const auto* dr = std::get_if<DriftingDynamics>(&d.dynamics)) {
      e["dynamics"] = "drifting";
      e["drift_sigma_mhz"] = dr->sigma_hz * 1e-6;
      e["drift_interval_s"] = dr->step_interval_s;
    } else if (const auto* t = std::get_if<TelegraphicDynamics>(&d.dynamics)) {
      e["dynamics"] = "telegraphic";
      e["f_a_mhz"] = t->f_a_hz * 1e-6;
      e["f_b_mhz"] = t->f_b_hz * 1e-6;
      e["switch_rate_per_h"] = t->switch_rate_per_s * 3600.0;
    } else {
      e["dynamics"] = "static";
    }
    list.push_back(e);
  }
  return {{"gamma_1q_per_s", m.gamma_1q},
          {"readout_noise_sigma", m.readout_noise_sigma},
          {"dropout_probability", m.dropout_probability},
          {"defects", list}};
}

StarkCalibration calibration_from_json(const json& j) {
  const std::string ctx = "calibration";
  StarkCalibration c;
  c.conv_a_neg_hz = opt_number(j, "conv_a_neg_mhz", c.conv_a_neg_hz * 1e-6, ctx) * 1e6;
  c.conv_a_pos_hz = opt_number(j, "conv_a_pos_mhz", c.conv_a_pos_hz * 1e-6, ctx) * 1e6;
  c.tone_detuning_hz = opt_number(j, "tone_detuning_mhz", c.tone_detuning_hz * 1e-6, ctx) * 1e6;
  c.reliable_range_hz = opt_number(j, "reliable_range_mhz", c.reliable_range_hz * 1e-6, ctx) * 1e6;
  checked(ctx, [&] { c.validate(); });
  return c;
}

json to_json(const StarkCalibration& c) {
  return {{"conv_a_neg_mhz", c.conv_a_neg_hz * 1e-6},
          {"conv_a_pos_mhz", c.conv_a_pos_hz * 1e-6},
          {"tone_detuning_mhz", c.tone_detuning_hz * 1e-6},
          {"reliable_range_mhz", c.reliable_range_hz * 1e-6}};
}

std::string map_csv(const SpectroMap& map) {
  std::vector<std::string> header{"time_h\\offset_mhz"};
  for (double f : map.offsets_hz) header.push_back(format_number(f * 1e-6));
  CsvWriter w(std::move(header));
  for (std::size_t k = 0; k < map.times_h.size(); ++k) {
    w.cell(map.times_h[k]);
    for (std::size_t i = 0; i < map.offsets_hz.size(); ++i) w.cell(map.at(k, i));
    w.end_row();
  }
  return w.str();
}

json to_json(const TlsExtraction& e) {
  return {{"f_offset_mhz", e.f_offset_hz * 1e-6},
          {"g_khz", e.coupling_g_hz * 1e-3},
          {"gamma_mhz", e.gamma_hz * 1e-6},
          {"gamma_1q_per_s", e.gamma_1q},
          {"peak_excess_per_s", e.peak_excess},
          {"peak_excess_error_per_s", finite_or_null(e.peak_excess_error)},
          {"fit", to_json(e.fit)}};
}

json defects_json(const std::vector<TlsExtraction>& found, double wait_s) {
  json list = json::array();
  for (const auto& e : found) list.push_back(to_json(e));
  return {{"wait_us", wait_s * 1e6},
          {"outcome", found.empty() ? "no persistent defect" : "persistent defect"},
          {"defects", list}};
}

// -- tuner --------------------------------------------------------------------------

json to_json(const TunePolicy& p) {
  return {{"step_fraction", p.step_fraction},
          {"tolerance", p.tolerance},
          {"max_iterations", p.max_iterations},
          {"measurement_noise_sigma", p.measurement_noise_sigma}};
}

json to_json(const TuneTrace& t) {
  json steps = json::array();
  for (const auto& s : t.steps) {
    json shots = json::array();
    for (const auto& r : s.shots) shots.push_back(to_json(r));
    steps.push_back({{"measured_r_ohm", s.measured_r_ohm},
                     {"inferred_f_ghz", s.inferred_f_hz * 1e-9},
                     {"relative_error", s.relative_error},
                     {"shots", shots},
                     {"planned_shift", s.planned_shift},
                     {"sampled_shift", s.sampled_shift},
                     {"true_r_after_ohm", s.true_r_after_ohm}});
  }
  return {{"junction_id", t.junction_id},
          {"target_f_ghz", t.target_f_hz * 1e-9},
          {"initial_r_ohm", t.initial_r_ohm},
          {"outcome", to_string(t.outcome)},
          {"iterations", t.iterations()},
          {"steps", steps}};
}

std::string traces_csv(const std::vector<TuneTrace>& traces) {
  CsvWriter w({"junction_id", "step", "measured_r_ohm", "inferred_f_ghz", "relative_error",
               "shots", "planned_shift", "sampled_shift", "true_r_after_ohm", "outcome"});
  for (const auto& t : traces) {
    for (std::size_t k = 0; k < t.steps.size(); ++k) {
      const auto& s = t.steps[k];
      w.cell(t.junction_id)
          .cell(static_cast<long long>(k))
          .cell(s.measured_r_ohm)
          .cell(s.inferred_f_hz * 1e-9)
          .cell(s.relative_error)
          .cell(static_cast<long long>(s.shots.size()))
          .cell(s.planned_shift)
          .cell(s.sampled_shift)
          .cell(s.true_r_after_ohm)
          .cell(k + 1 == t.steps.size() ? to_string(t.outcome) : "");
      w.end_row();
    }
  }
  return w.str();
}

json to_json(const TuneSummary& s) {
  return {{"count", s.count},
          {"converged", s.converged},
          {"overshoot", s.overshoot},
          {"exhausted", s.exhausted},
          {"converged_within_5", s.converged_within_5},
          {"convergence_fraction",
           s.count ? static_cast<double>(s.converged) / static_cast<double>(s.count) : 0.0},
          {"mean_iterations", s.mean_iterations},
          {"iteration_histogram", s.iteration_histogram}};
}

}  // namespace lasertune::io
