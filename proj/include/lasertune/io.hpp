#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lasertune/aging_model.hpp"
#include "lasertune/dose_model.hpp"
#include "lasertune/fitkit.hpp"
#include "lasertune/tls_sim.hpp"
#include "lasertune/tuner.hpp"
#include "lasertune/wafer_ops.hpp"

namespace lasertune::io {

using nlohmann::json;

// -- files and numbers ---------------------------------------------------------

/// Shortest round-trip decimal, independent of the C locale.
[[nodiscard]] std::string format_number(double v);

/// Parses a full field as a double; throws InputError naming `where`.
[[nodiscard]] double parse_number(std::string_view text, const std::string& where);

[[nodiscard]] std::string read_text(const std::filesystem::path& path);
[[nodiscard]] json read_json(const std::filesystem::path& path);

/// Writes to a sibling temporary file, then renames over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);

[[nodiscard]] std::string dump(const json& j);

// -- CSV -------------------------------------------------------------------------

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> line_numbers;  ///< 1-based source line of each row

  [[nodiscard]] bool has(std::string_view column) const;
  [[nodiscard]] std::size_t column(std::string_view name) const;  ///< throws InputError
  [[nodiscard]] double number(std::size_t row, std::string_view name) const;
  [[nodiscard]] const std::string& text(std::size_t row, std::string_view name) const;
};

/// Comma-separated, first non-comment line is the header, '#' lines and
/// blank lines skipped. Row width must match the header.
[[nodiscard]] CsvTable parse_csv(std::string_view text, const std::string& source = "csv");

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  CsvWriter& cell(double v);
  CsvWriter& cell(std::string_view s);
  CsvWriter& cell(long long v);
  void end_row();
  [[nodiscard]] const std::string& str() const { return out_; }

 private:
  std::string out_;
  std::size_t width_;
  std::size_t col_ = 0;
};

// -- dose model ----------------------------------------------------------------

[[nodiscard]] LasingRecipe recipe_from_json(const json& j);
[[nodiscard]] json to_json(const LasingRecipe& r);

/// Accepts {"version", "parameters": {...}}; missing parameters keep defaults.
[[nodiscard]] DoseModel dose_model_from_json(const json& j);
[[nodiscard]] json to_json(const DoseModel& m);

// -- wafer -------------------------------------------------------------------------

[[nodiscard]] WaferLayout wafer_from_json(const json& j);
[[nodiscard]] json to_json(const WaferLayout& w);
[[nodiscard]] json to_json(const BatchReport& r);
[[nodiscard]] std::string batch_csv(const BatchReport& r);

// -- fits ----------------------------------------------------------------------------

[[nodiscard]] json to_json(const FitResult& f);
[[nodiscard]] std::string fit_csv(const FitResult& f);

/// Rows of junction_id, day, resistance_ohm, cohort, wafer[, r0_ohm] grouped
/// into per-junction series.
[[nodiscard]] std::vector<AgingSeries> aging_series_from_csv(const CsvTable& t);

// -- TLS --------------------------------------------------------------------------

[[nodiscard]] QubitNoiseModel noise_model_from_json(const json& j);
[[nodiscard]] json to_json(const QubitNoiseModel& m);
[[nodiscard]] StarkCalibration calibration_from_json(const json& j);
[[nodiscard]] json to_json(const StarkCalibration& c);

/// First row: "time_h\\offset_mhz" then offsets in MHz; then one row per time.
[[nodiscard]] std::string map_csv(const SpectroMap& map);
[[nodiscard]] json to_json(const TlsExtraction& e);
[[nodiscard]] json defects_json(const std::vector<TlsExtraction>& found, double wait_s);

// -- tuner --------------------------------------------------------------------------

[[nodiscard]] json to_json(const TunePolicy& p);
[[nodiscard]] json to_json(const TuneTrace& t);
[[nodiscard]] std::string traces_csv(const std::vector<TuneTrace>& traces);
[[nodiscard]] json to_json(const TuneSummary& s);

}  // namespace lasertune::io
