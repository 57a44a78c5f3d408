#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "lasertune/errors.hpp"
#include "lasertune/wafer_ops.hpp"

using namespace lasertune;
using Eigen::Vector2d;

namespace {

std::vector<Vector2d> design_points(const WaferLayout& w, std::span<const std::size_t> idx) {
  std::vector<Vector2d> out;
  for (std::size_t i : idx) out.push_back(w.junctions[i].design_xy(w.pitch_um));
  return out;
}

}  // namespace

TEST_CASE("grid wafer layout") {
  const WaferLayout w = make_grid_wafer("W1", 3, 4, 500.0, 7781.0, 0.02, 1);
  CHECK(w.junctions.size() == 12);
  CHECK(w.junctions[5].id == "J00005");
  CHECK(w.junctions[5].design_xy(500.0) == Vector2d(500.0, 500.0));
  CHECK(w.junctions[11].design_xy(500.0) == Vector2d(1500.0, 1000.0));
  CHECK(make_grid_wafer("W1", 3, 4, 500.0, 7781.0, 0.02, 1).junctions[7].resistance_ohm ==
        w.junctions[7].resistance_ohm);
}

TEST_CASE("wafer validation") {
  WaferLayout w = make_grid_wafer("W1", 2, 2, 500.0, 7781.0, 0.0, 1);
  w.junctions[1].id = w.junctions[0].id;
  CHECK_THROWS_AS(w.validate(), DomainError);
  w = make_grid_wafer("W1", 2, 2, 500.0, 7781.0, 0.0, 1);
  w.junctions[1].row = 5;
  CHECK_THROWS_AS(w.validate(), DomainError);
  w = make_grid_wafer("W1", 2, 2, 500.0, 7781.0, 0.0, 1);
  w.junctions[1].resistance_ohm = 0.0;
  CHECK_THROWS_AS(w.validate(), DomainError);
  w = make_grid_wafer("W1", 2, 2, 500.0, 7781.0, 0.0, 1);
  w.junctions[1].area_um2 = -0.1;
  CHECK_THROWS_AS(w.validate(), DomainError);
}

TEST_CASE("affine transform algebra") {
  const AffineTransform a = AffineTransform::similarity(0.3, 1.2, Vector2d(5, -2));
  const AffineTransform b = AffineTransform::similarity(-1.1, 0.7, Vector2d(-3, 8));
  const Vector2d p(1.5, -4.0);
  CHECK((a.compose(b).apply(p) - a.apply(b.apply(p))).norm() < 1e-12);
  CHECK((a.inverse().apply(a.apply(p)) - p).norm() < 1e-12);
  // Independent matrix-multiply oracle.
  const double c = std::cos(0.3) * 1.2, s = std::sin(0.3) * 1.2;
  CHECK(apply_affine(a, p).x() == doctest::Approx(c * 1.5 - s * -4.0 + 5));
  CHECK(apply_affine(a, p).y() == doctest::Approx(s * 1.5 + c * -4.0 - 2));
  CHECK(apply_affine(AffineTransform{}, p) == p);
}

TEST_CASE("exact affine recovery from ten fiducials") {
  const WaferLayout w = make_grid_wafer("W", 50, 60, 1000.0, 7781.0, 0.0, 1);
  const auto idx = select_fiducials(w, 10);
  REQUIRE(idx.size() == 10);
  const auto design = design_points(w, idx);
  const AffineTransform truth =
      AffineTransform::similarity(7.0 * std::numbers::pi / 180.0, 1.001, Vector2d(123.4, -56.7));
  std::vector<Vector2d> stage;
  for (const auto& d : design) stage.push_back(truth.apply(d));
  const AffineTransform est = estimate_affine(design, stage);
  const auto res = registration_residuals(est, design, stage);
  CHECK(*std::max_element(res.begin(), res.end()) < 1e-9);
  CHECK((est.linear - truth.linear).norm() < 1e-12);
}

TEST_CASE("affine with three points and identity") {
  const std::vector<Vector2d> d{{0, 0}, {1, 0}, {0, 1}};
  const AffineTransform est = estimate_affine(d, d);
  CHECK((est.linear - Eigen::Matrix2d::Identity()).norm() < 1e-12);
  CHECK(est.offset.norm() < 1e-12);
}

TEST_CASE("affine rejects degenerate input") {
  const std::vector<Vector2d> line{{0, 0}, {1, 1}, {2, 2}, {3, 3}};
  CHECK_THROWS_AS((void)estimate_affine(line, line), DomainError);
  const std::vector<Vector2d> two{{0, 0}, {1, 0}};
  CHECK_THROWS_AS((void)estimate_affine(two, two), DomainError);
  const std::vector<Vector2d> three{{0, 0}, {1, 0}, {0, 1}};
  CHECK_THROWS_AS((void)estimate_affine(three, two), DomainError);
}

TEST_CASE("registration residual under stage noise") {
  const WaferLayout w = make_grid_wafer("W", 50, 60, 1000.0, 7781.0, 0.0, 1);
  const auto idx = select_fiducials(w, 10);
  const auto design = design_points(w, idx);
  const AffineTransform truth = AffineTransform::similarity(0.12, 0.999, Vector2d(10, 20));
  double ss = 0.0;
  std::size_t count = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    RngStream rng(seed);
    std::vector<Vector2d> stage;
    for (const auto& d : design) stage.push_back(truth.apply(d) + 0.5 * Vector2d(rng.normal(), rng.normal()));
    for (double r : registration_residuals(estimate_affine(design, stage), design, stage)) {
      ss += r * r;
      ++count;
    }
  }
  const double rms = std::sqrt(ss / static_cast<double>(count));
  CHECK(rms >= 0.3);
  CHECK(rms <= 0.7);
  // Six fitted parameters leave 2n - 6 of the 2n noise dimensions.
  CHECK(rms == doctest::Approx(0.5 * std::sqrt(14.0 / 10.0)).epsilon(0.05));
}

TEST_CASE("fiducials are distinct and spread over the wafer") {
  const WaferLayout w = make_grid_wafer("W", 20, 30, 1000.0, 7781.0, 0.0, 1);
  auto idx = select_fiducials(w, 10);
  std::sort(idx.begin(), idx.end());
  CHECK(std::adjacent_find(idx.begin(), idx.end()) == idx.end());
  const auto pts = design_points(w, idx);
  double min_sep = 1e300;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) min_sep = std::min(min_sep, (pts[i] - pts[j]).norm());
  }
  CHECK(min_sep > 5000.0);
  bool has_origin = false;
  for (std::size_t i : idx) has_origin |= (w.junctions[i].row == 0 && w.junctions[i].col == 0);
  CHECK(has_origin);
}

TEST_CASE("alignment score and gate") {
  CHECK(alignment_score(0.0, 0.0) == 1.0);
  CHECK(alignment_score(1.0, 0.0) == doctest::Approx(std::exp(-1.0)));
  CHECK(alignment_score(0.0, 2.0) == doctest::Approx(std::exp(-1.0)));
  CHECK(alignment_score(0.2, 0.1) > alignment_score(0.3, 0.1));
  CHECK(alignment_score(0.2, 0.1) > alignment_score(0.2, 0.3));
  CHECK(qc_gate(AlignmentResult{0, 0, 0.97}) == QcStatus::passed);
  CHECK(qc_gate(AlignmentResult{0, 0, 0.969}) == QcStatus::excluded);
  CHECK_THROWS_AS((void)qc_gate(AlignmentResult{}, 0.0), DomainError);
  RngStream rng(1);
  const auto r = simulate_alignment(JunctionRecord{}, AlignmentNoise{0.0, 0.0}, rng);
  CHECK(r.qc_score == 1.0);
}

TEST_CASE("pass rate matches the Gaussian tail") {
  // With delta_f = 2 delta_c and sigma_f = 2 sigma_c the exponent is sigma_c^2 chi^2_2.
  const double c = -std::log(0.97);
  for (double sc : {0.06, 0.1, 0.15}) {
    RngStream rng(derive_seed(5, static_cast<std::uint64_t>(sc * 1000)));
    const AlignmentNoise noise{sc, 2 * sc};
    const int n = 20000;
    int passed = 0;
    for (int i = 0; i < n; ++i) {
      passed += qc_gate(simulate_alignment(JunctionRecord{}, noise, rng)) == QcStatus::passed;
    }
    const double oracle = 1.0 - std::exp(-c / (2 * sc * sc));
    CHECK(std::abs(static_cast<double>(passed) / n - oracle) <= 0.01);
  }
  CHECK(1.0 - std::exp(-c / (2 * 0.06 * 0.06)) == doctest::Approx(0.9854540908647601));
}

TEST_CASE("batch of 3000 junctions") {
  const WaferLayout w = make_grid_wafer("W3000", 50, 60, 1000.0, 7781.0, 0.02, 3);
  const BatchConfig cfg;
  const BatchReport r = run_batch(w, LasingRecipe{}, cfg, 42);
  CHECK(r.junctions.size() == 3000);
  CHECK(r.estimated_wall_time_s == 60000.0);
  CHECK(r.passed + r.excluded == 3000);
  CHECK(static_cast<double>(r.passed) / 3000.0 >= 0.95);
  CHECK(std::is_sorted(r.junctions.begin(), r.junctions.end(),
                       [](const auto& a, const auto& b) { return a.id < b.id; }));

  double sum = 0.0, sum2 = 0.0;
  std::size_t n = 0;
  for (const auto& o : r.junctions) {
    if (o.qc_status == QcStatus::excluded) {
      CHECK(o.r_after_ohm == o.r_before_ohm);
      continue;
    }
    const double z = o.shift_frac / o.mean_shift - 1.0;
    sum += z;
    sum2 += z * z;
    ++n;
  }
  const double mean = sum / static_cast<double>(n);
  const double sd = std::sqrt((sum2 - static_cast<double>(n) * mean * mean) / static_cast<double>(n - 1));
  CHECK(std::abs(mean) <= 3.0 * 0.01 / std::sqrt(static_cast<double>(n)));
  CHECK(sd == doctest::Approx(0.01).epsilon(0.05));
}

TEST_CASE("batch is independent of order and schedule") {
  WaferLayout w = make_grid_wafer("W", 30, 40, 1000.0, 7781.0, 0.02, 3);
  const BatchConfig cfg;
  const BatchReport serial = run_batch(w, LasingRecipe{}, cfg, 99, Execution::serial);
  const BatchReport parallel = run_batch(w, LasingRecipe{}, cfg, 99, Execution::parallel);
  RngStream rng(4);
  for (std::size_t i = w.junctions.size() - 1; i > 0; --i) {
    std::swap(w.junctions[i], w.junctions[static_cast<std::size_t>(rng.uniform() * static_cast<double>(i + 1)) % (i + 1)]);
  }
  const BatchReport permuted = run_batch(w, LasingRecipe{}, cfg, 99, Execution::parallel);
  CHECK(serial == parallel);
  CHECK(serial == permuted);
  CHECK_FALSE(serial == run_batch(w, LasingRecipe{}, cfg, 100));
}

TEST_CASE("zero-noise batch shifts every junction by the mean") {
  const WaferLayout w = make_grid_wafer("W", 5, 5, 1000.0, 7781.0, 0.02, 3);
  BatchConfig cfg;
  cfg.alignment = {0.0, 0.0};
  cfg.dose.stochastic.relative_sigma = 0.0;
  const BatchReport r = run_batch(w, LasingRecipe{}, cfg, 1);
  const double mu = mean_shift(LasingRecipe{}, cfg.dose);
  CHECK(r.passed == 25);
  for (const auto& o : r.junctions) CHECK(o.shift_frac == doctest::Approx(mu).epsilon(1e-12));
  CHECK(r.shift_stddev == doctest::Approx(0.0));
}

TEST_CASE("empty wafer and report write-back") {
  WaferLayout empty;
  empty.wafer_id = "E";
  const BatchReport r0 = run_batch(empty, LasingRecipe{}, BatchConfig{}, 1);
  CHECK(r0.junctions.empty());
  CHECK(r0.estimated_wall_time_s == 0.0);

  WaferLayout w = make_grid_wafer("W", 4, 4, 1000.0, 7781.0, 0.02, 3);
  BatchConfig cfg;
  cfg.qc_threshold = 1.0;  // everything with a nonzero offset is excluded
  const BatchReport r = run_batch(w, LasingRecipe{}, cfg, 7);
  CHECK(r.excluded == 16);
  apply_report(w, r, 2.0);
  for (const auto& j : w.junctions) {
    CHECK(j.qc_status == QcStatus::excluded);
    CHECK(j.history.empty());
  }
  WaferLayout v = make_grid_wafer("W", 4, 4, 1000.0, 7781.0, 0.02, 3);
  const BatchReport rv = run_batch(v, LasingRecipe{}, BatchConfig{}, 7);
  apply_report(v, rv, 2.0);
  for (std::size_t i = 0; i < v.junctions.size(); ++i) {
    const auto& j = v.junctions[i];
    if (j.qc_status != QcStatus::passed) continue;
    REQUIRE(j.history.size() == 1);
    CHECK(j.history[0].day == 2.0);
    CHECK(j.resistance_ohm == j.history[0].measured_r_ohm);
  }
}
