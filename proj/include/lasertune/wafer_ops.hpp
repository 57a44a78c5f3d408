#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lasertune/dose_model.hpp"
#include "lasertune/execution.hpp"

namespace lasertune {

enum class QcStatus { pending, passed, excluded };

[[nodiscard]] const char* to_string(QcStatus s);

struct HistoryEntry {
  LasingRecipe recipe;
  double measured_r_ohm = 0.0;
  double day = 0.0;
};

struct JunctionRecord {
  std::string id;
  int row = 0;
  int col = 0;
  double area_um2 = 0.1;
  double resistance_ohm = 0.0;
  double age_days = 0.0;
  QcStatus qc_status = QcStatus::pending;
  std::vector<HistoryEntry> history;

  /// Design position (col * pitch, row * pitch).
  [[nodiscard]] Eigen::Vector2d design_xy(double pitch_um) const;
  void validate() const;
};

struct WaferLayout {
  std::string wafer_id;
  int rows = 0;
  int cols = 0;
  double pitch_um = 1000.0;
  std::vector<JunctionRecord> junctions;

  /// Throws DomainError on duplicate ids, out-of-grid positions or bad records.
  void validate() const;
};

/// rows x cols wafer with ids "J00000".. and resistances drawn around
/// `nominal_r_ohm` with relative spread `r_spread`.
[[nodiscard]] WaferLayout make_grid_wafer(const std::string& wafer_id, int rows, int cols,
                                          double pitch_um, double nominal_r_ohm,
                                          double r_spread, std::uint64_t seed);

// -- registration -------------------------------------------------------------

struct AffineTransform {
  Eigen::Matrix2d linear = Eigen::Matrix2d::Identity();
  Eigen::Vector2d offset = Eigen::Vector2d::Zero();

  [[nodiscard]] Eigen::Vector2d apply(const Eigen::Vector2d& p) const { return linear * p + offset; }
  /// (this o other)(p) = this(other(p)).
  [[nodiscard]] AffineTransform compose(const AffineTransform& other) const;
  [[nodiscard]] AffineTransform inverse() const;
  static AffineTransform similarity(double angle_rad, double scale, const Eigen::Vector2d& shift);
};

[[nodiscard]] Eigen::Vector2d apply_affine(const AffineTransform& t, const Eigen::Vector2d& p);

/// Least-squares affine map from design to stage coordinates. Points are
/// centered before solving. Throws DomainError for fewer than 3 pairs,
/// unequal counts, or collinear design points.
[[nodiscard]] AffineTransform estimate_affine(std::span<const Eigen::Vector2d> design,
                                              std::span<const Eigen::Vector2d> stage);

/// Euclidean residual |T(design_i) - stage_i| per pair.
[[nodiscard]] std::vector<double> registration_residuals(const AffineTransform& t,
                                                         std::span<const Eigen::Vector2d> design,
                                                         std::span<const Eigen::Vector2d> stage);

/// Indices of `count` junctions spread over the wafer: farthest-point
/// sampling seeded at the junction nearest the grid origin.
[[nodiscard]] std::vector<std::size_t> select_fiducials(const WaferLayout& wafer,
                                                        std::size_t count = 10);

// -- alignment and QC ---------------------------------------------------------

struct AlignmentNoise {
  double sigma_center_um = 0.06;
  double sigma_focus_um = 0.12;
};

/// Error scales of the score exp(-(offset/delta_c)^2 - (focus/delta_f)^2).
struct AlignmentScales {
  double delta_center_um = 1.0;
  double delta_focus_um = 2.0;
};

struct AlignmentResult {
  double centering_offset_um = 0.0;
  double focus_error_um = 0.0;
  double qc_score = 1.0;
};

[[nodiscard]] double alignment_score(double centering_offset_um, double focus_error_um,
                                     const AlignmentScales& scales = {});

/// Draws a centering offset and a focus error (two normal draws, always).
[[nodiscard]] AlignmentResult simulate_alignment(const JunctionRecord& junction,
                                                 const AlignmentNoise& noise, RngStream& rng,
                                                 const AlignmentScales& scales = {});

/// Passed iff score >= threshold.
[[nodiscard]] QcStatus qc_gate(const AlignmentResult& result, double threshold = 0.97);

// -- batch ----------------------------------------------------------------------

struct BatchConfig {
  AlignmentNoise alignment;
  AlignmentScales scales;
  double qc_threshold = 0.97;
  double seconds_per_junction = 20.0;
  DoseModel dose = DoseModel::defaults();
};

struct JunctionOutcome {
  std::string id;
  double r_before_ohm = 0.0;
  double r_after_ohm = 0.0;
  QcStatus qc_status = QcStatus::pending;
  double shift_frac = 0.0;
  double mean_shift = 0.0;
  double centering_offset_um = 0.0;
  double focus_error_um = 0.0;
  double qc_score = 0.0;

  bool operator==(const JunctionOutcome&) const = default;
};

struct BatchReport {
  std::string wafer_id;
  std::uint64_t master_seed = 0;
  LasingRecipe recipe;
  std::vector<JunctionOutcome> junctions;  ///< sorted by id
  std::size_t passed = 0;
  std::size_t excluded = 0;
  double estimated_wall_time_s = 0.0;
  double shift_mean = 0.0;    ///< over passed junctions
  double shift_stddev = 0.0;

  bool operator==(const BatchReport&) const = default;
};

/// Aligns, gates and anneals every junction with a stream derived from
/// (master_seed, id). Excluded junctions keep their input resistance. The
/// result does not depend on junction order or thread schedule.
[[nodiscard]] BatchReport run_batch(const WaferLayout& wafer, const LasingRecipe& recipe,
                                    const BatchConfig& config, std::uint64_t master_seed,
                                    Execution exec = Execution::parallel);

/// Writes outcomes back into the wafer: resistance, QC status and history.
void apply_report(WaferLayout& wafer, const BatchReport& report, double day = 0.0);

}  // namespace lasertune
