#include "lasertune/wafer_ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include "lasertune/errors.hpp"

namespace lasertune {

const char* to_string(QcStatus s) {
  switch (s) {
    case QcStatus::pending: return "pending";
    case QcStatus::passed: return "passed";
    case QcStatus::excluded: return "excluded";
  }
  return "pending";
}

Eigen::Vector2d JunctionRecord::design_xy(double pitch_um) const {
  return {col * pitch_um, row * pitch_um};
}

void JunctionRecord::validate() const {
  if (id.empty()) throw DomainError("junction id is empty");
  if (!(resistance_ohm > 0.0)) throw DomainError("junction '" + id + "' resistance must be positive");
  if (!(area_um2 > 0.0)) throw DomainError("junction '" + id + "' area must be positive");
  if (!(age_days >= 0.0)) throw DomainError("junction '" + id + "' age must be non-negative");
}

void WaferLayout::validate() const {
  if (rows < 0 || cols < 0) throw DomainError("wafer grid dimensions must be non-negative");
  if (!(pitch_um > 0.0)) throw DomainError("wafer pitch must be positive");
  if (junctions.size() > static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
    throw DomainError("wafer has more junctions than grid sites");
  }
  std::unordered_set<std::string> ids;
  for (const auto& j : junctions) {
    j.validate();
    if (j.row < 0 || j.row >= rows || j.col < 0 || j.col >= cols) {
      throw DomainError("junction '" + j.id + "' lies outside the wafer grid");
    }
    if (!ids.insert(j.id).second) throw DomainError("duplicate junction id '" + j.id + "'");
  }
}

WaferLayout make_grid_wafer(const std::string& wafer_id, int rows, int cols, double pitch_um,
                            double nominal_r_ohm, double r_spread, std::uint64_t seed) {
  WaferLayout w;
  w.wafer_id = wafer_id;
  w.rows = rows;
  w.cols = cols;
  w.pitch_um = pitch_um;
  RngStream rng(derive_seed(seed, "wafer-layout"));
  w.junctions.reserve(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      JunctionRecord j;
      char buf[16];
      std::snprintf(buf, sizeof buf, "J%05d", r * cols + c);
      j.id = buf;
      j.row = r;
      j.col = c;
      j.resistance_ohm = nominal_r_ohm * (1.0 + r_spread * rng.normal());
      w.junctions.push_back(std::move(j));
    }
  }
  w.validate();
  return w;
}

// -- registration -------------------------------------------------------------

AffineTransform AffineTransform::compose(const AffineTransform& other) const {
  AffineTransform t;
  t.linear = linear * other.linear;
  t.offset = linear * other.offset + offset;
  return t;
}

AffineTransform AffineTransform::inverse() const {
  if (std::abs(linear.determinant()) <= 1e-12) throw DomainError("affine map is singular");
  AffineTransform t;
  t.linear = linear.inverse();
  t.offset = -t.linear * offset;
  return t;
}

AffineTransform AffineTransform::similarity(double angle_rad, double scale,
                                            const Eigen::Vector2d& shift) {
  AffineTransform t;
  t.linear << std::cos(angle_rad), -std::sin(angle_rad), std::sin(angle_rad), std::cos(angle_rad);
  t.linear *= scale;
  t.offset = shift;
  return t;
}

Eigen::Vector2d apply_affine(const AffineTransform& t, const Eigen::Vector2d& p) {
  return t.apply(p);
}

AffineTransform estimate_affine(std::span<const Eigen::Vector2d> design,
                                std::span<const Eigen::Vector2d> stage) {
  if (design.size() != stage.size()) throw DomainError("design and stage point counts differ");
  const auto n = static_cast<Eigen::Index>(design.size());
  if (n < 3) throw DomainError("affine registration needs at least 3 point pairs");

  Eigen::Vector2d cd = Eigen::Vector2d::Zero();
  Eigen::Vector2d cs = Eigen::Vector2d::Zero();
  for (Eigen::Index i = 0; i < n; ++i) {
    cd += design[static_cast<std::size_t>(i)];
    cs += stage[static_cast<std::size_t>(i)];
  }
  cd /= static_cast<double>(n);
  cs /= static_cast<double>(n);

  Eigen::MatrixX2d d(n, 2);
  Eigen::MatrixX2d s(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    d.row(i) = (design[static_cast<std::size_t>(i)] - cd).transpose();
    s.row(i) = (stage[static_cast<std::size_t>(i)] - cs).transpose();
  }

  Eigen::JacobiSVD<Eigen::MatrixX2d> svd(d, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto sv = svd.singularValues();
  if (!(sv(0) > 0.0) || sv(1) <= 1e-12 * sv(0)) {
    throw DomainError("fiducial design points are collinear; affine map is rank deficient");
  }
  // d * L^T = s in the least-squares sense.
  const Eigen::Matrix2d lt = svd.solve(s);

  AffineTransform t;
  t.linear = lt.transpose();
  t.offset = cs - t.linear * cd;
  if (std::abs(t.linear.determinant()) <= 1e-12) {
    throw DomainError("estimated affine map is singular");
  }
  return t;
}

std::vector<double> registration_residuals(const AffineTransform& t,
                                           std::span<const Eigen::Vector2d> design,
                                           std::span<const Eigen::Vector2d> stage) {
  if (design.size() != stage.size()) throw DomainError("design and stage point counts differ");
  std::vector<double> out;
  out.reserve(design.size());
  for (std::size_t i = 0; i < design.size(); ++i) out.push_back((t.apply(design[i]) - stage[i]).norm());
  return out;
}

std::vector<std::size_t> select_fiducials(const WaferLayout& wafer, std::size_t count) {
  const std::size_t n = wafer.junctions.size();
  if (count > n) throw DomainError("more fiducials requested than junctions on the wafer");
  std::vector<std::size_t> chosen;
  if (count == 0) return chosen;
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::size_t next = 0;
  for (std::size_t i = 1; i < n; ++i) {
    const auto& a = wafer.junctions[i];
    const auto& b = wafer.junctions[next];
    if (a.row + a.col < b.row + b.col || (a.row + a.col == b.row + b.col && a.id < b.id)) next = i;
  }
  while (chosen.size() < count) {
    chosen.push_back(next);
    const Eigen::Vector2d p = wafer.junctions[next].design_xy(wafer.pitch_um);
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      dist[i] = std::min(dist[i], (wafer.junctions[i].design_xy(wafer.pitch_um) - p).squaredNorm());
      if (dist[i] > best) {
        best = dist[i];
        next = i;
      }
    }
  }
  return chosen;
}

// -- alignment ----------------------------------------------------------------

double alignment_score(double centering_offset_um, double focus_error_um,
                       const AlignmentScales& scales) {
  const double a = centering_offset_um / scales.delta_center_um;
  const double b = focus_error_um / scales.delta_focus_um;
  return std::exp(-a * a - b * b);
}

AlignmentResult simulate_alignment(const JunctionRecord&, const AlignmentNoise& noise,
                                   RngStream& rng, const AlignmentScales& scales) {
  if (!(noise.sigma_center_um >= 0.0) || !(noise.sigma_focus_um >= 0.0)) {
    throw DomainError("alignment noise must be non-negative");
  }
  AlignmentResult r;
  r.centering_offset_um = noise.sigma_center_um * rng.normal();
  r.focus_error_um = noise.sigma_focus_um * rng.normal();
  r.qc_score = alignment_score(r.centering_offset_um, r.focus_error_um, scales);
  return r;
}

QcStatus qc_gate(const AlignmentResult& result, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw DomainError("QC threshold must lie in (0, 1]");
  return result.qc_score >= threshold ? QcStatus::passed : QcStatus::excluded;
}

// -- batch ----------------------------------------------------------------------

namespace {

JunctionOutcome process_junction(const JunctionRecord& j, const LasingRecipe& recipe,
                                 const BatchConfig& config, std::uint64_t master_seed) {
  RngStream rng(derive_seed(master_seed, j.id));
  const AlignmentResult align = simulate_alignment(j, config.alignment, rng, config.scales);
  JunctionOutcome o;
  o.id = j.id;
  o.r_before_ohm = j.resistance_ohm;
  o.r_after_ohm = j.resistance_ohm;
  o.centering_offset_um = align.centering_offset_um;
  o.focus_error_um = align.focus_error_um;
  o.qc_score = align.qc_score;
  o.qc_status = qc_gate(align, config.qc_threshold);
  if (o.qc_status == QcStatus::passed) {
    LasingRecipe shot = recipe;
    shot.displacement_um += std::abs(align.centering_offset_um);
    JunctionState state;
    state.resistance_ohm = j.resistance_ohm;
    state.area_um2 = j.area_um2;
    state.age_days = j.age_days;
    state = apply_anneal(state, shot, config.dose, rng);
    o.r_after_ohm = state.resistance_ohm;
    o.mean_shift = state.history.back().mean_shift;
    o.shift_frac = state.history.back().realized_shift;
  }
  return o;
}

}  // namespace

BatchReport run_batch(const WaferLayout& wafer, const LasingRecipe& recipe,
                      const BatchConfig& config, std::uint64_t master_seed, Execution exec) {
  wafer.validate();
  recipe.validate();
  config.dose.validate();
  if (!(config.qc_threshold > 0.0 && config.qc_threshold <= 1.0)) {
    throw DomainError("QC threshold must lie in (0, 1]");
  }

  BatchReport report;
  report.wafer_id = wafer.wafer_id;
  report.master_seed = master_seed;
  report.recipe = recipe;
  const std::size_t n = wafer.junctions.size();
  report.junctions.resize(n);

  if (exec == Execution::parallel) {
    const auto total = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 64)
    for (std::int64_t i = 0; i < total; ++i) {
      const auto k = static_cast<std::size_t>(i);
      report.junctions[k] = process_junction(wafer.junctions[k], recipe, config, master_seed);
    }
  } else {
    for (std::size_t k = 0; k < n; ++k) {
      report.junctions[k] = process_junction(wafer.junctions[k], recipe, config, master_seed);
    }
  }

  std::sort(report.junctions.begin(), report.junctions.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });

  double sum = 0.0;
  for (const auto& o : report.junctions) {
    if (o.qc_status == QcStatus::passed) {
      ++report.passed;
      sum += o.shift_frac;
    } else {
      ++report.excluded;
    }
  }
  if (report.passed > 0) {
    report.shift_mean = sum / static_cast<double>(report.passed);
    double ss = 0.0;
    for (const auto& o : report.junctions) {
      if (o.qc_status != QcStatus::passed) continue;
      const double d = o.shift_frac - report.shift_mean;
      ss += d * d;
    }
    if (report.passed > 1) {
      report.shift_stddev = std::sqrt(ss / static_cast<double>(report.passed - 1));
    }
  }
  report.estimated_wall_time_s = config.seconds_per_junction * static_cast<double>(n);
  return report;
}

void apply_report(WaferLayout& wafer, const BatchReport& report, double day) {
  std::unordered_map<std::string, const JunctionOutcome*> by_id;
  for (const auto& o : report.junctions) by_id.emplace(o.id, &o);
  for (auto& j : wafer.junctions) {
    const auto it = by_id.find(j.id);
    if (it == by_id.end()) continue;
    const JunctionOutcome& o = *it->second;
    j.qc_status = o.qc_status;
    if (o.qc_status != QcStatus::passed) continue;
    j.resistance_ohm = o.r_after_ohm;
    LasingRecipe shot = report.recipe;
    shot.displacement_um += std::abs(o.centering_offset_um);
    j.history.push_back({shot, o.r_after_ohm, day});
  }
}

}  // namespace lasertune
