#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "lasertune/dose_model.hpp"
#include "lasertune/errors.hpp"

using namespace lasertune;

namespace {

const DoseModel kModel = DoseModel::defaults();

double response(double d) {
  return displacement_response(d, kModel.beam, kModel.displacement);
}

}  // namespace

TEST_CASE("heating map") {
  CHECK(junction_temperature(40.0) == doctest::Approx(118.8));
  CHECK(junction_temperature(0.0) == 20.0);
}

TEST_CASE("mean shift anchors") {
  // Independent evaluation of the composed model.
  CHECK(mean_shift(LasingRecipe{}, kModel) == doctest::Approx(0.01671657354158567).epsilon(1e-12));
  CHECK(mean_shift(LasingRecipe{49.0, 60.0, 1, 0.0}, kModel) ==
        doctest::Approx(0.0172989874286905).epsilon(1e-12));
  CHECK(mean_shift(LasingRecipe{40.0, 60.0, 1, 30.0}, kModel) ==
        doctest::Approx(0.0006341344535722363).epsilon(1e-9));
  CHECK(mean_shift(LasingRecipe{0.0, 60.0, 1, 0.0}, kModel) == 0.0);
  const double d = mean_shift(LasingRecipe{}, kModel);
  CHECK(d >= 0.010);
  CHECK(d <= 0.018);
}

TEST_CASE("default recipe equals the temperature response times the reference exposure") {
  const double ref = exposure_factor(60.0, 1, kModel.response);
  CHECK(ref == doctest::Approx(-std::expm1(-6.0)));
  CHECK(mean_shift(LasingRecipe{}, kModel) ==
        doctest::Approx(mean_shift_vs_temperature(junction_temperature(40.0), kModel.response) * ref)
            .epsilon(1e-14));
  CHECK(mean_shift_vs_temperature(20.0, kModel.response) ==
        doctest::Approx(0.018 - 0.037 * std::exp(-20.0 / 35.0)));
}

TEST_CASE("power at or above 50 mW is refused") {
  CHECK_THROWS_AS((void)mean_shift(LasingRecipe{50.0, 60.0, 1, 0.0}, kModel), InfeasibleError);
  CHECK_THROWS_AS((void)mean_shift(LasingRecipe{-1.0, 60.0, 1, 0.0}, kModel), DomainError);
  CHECK_THROWS_AS((void)mean_shift(LasingRecipe{40.0, 0.0, 1, 0.0}, kModel), DomainError);
  CHECK_THROWS_AS((void)mean_shift(LasingRecipe{40.0, 60.0, 0, 0.0}, kModel), DomainError);
}

TEST_CASE("mean shift is bounded and monotone") {
  double prev = 0.0;
  for (double p = 0.0; p < 50.0; p += 0.5) {
    const double s = mean_shift(LasingRecipe{p, 60.0, 1, 0.0}, kModel);
    CHECK(s >= prev);
    CHECK(s <= kModel.response.plateau_m);
    prev = s;
  }
  prev = 0.0;
  for (double e : {1.0, 5.0, 10.0, 30.0, 60.0, 120.0, 600.0}) {
    for (int n = 1; n <= 4; ++n) {
      const double s = mean_shift(LasingRecipe{40.0, e, n, 0.0}, kModel);
      CHECK(s >= mean_shift(LasingRecipe{40.0, e, std::max(1, n - 1), 0.0}, kModel));
      CHECK(s <= kModel.response.plateau_m);
    }
    const double s = mean_shift(LasingRecipe{40.0, e, 1, 0.0}, kModel);
    CHECK(s >= prev);
    prev = s;
  }
}

TEST_CASE("exposure factor saturates") {
  CHECK(exposure_factor(1e6, 1, kModel.response) == doctest::Approx(1.0));
  CHECK(exposure_factor(60.0, 2, kModel.response) == exposure_factor(120.0, 1, kModel.response));
  CHECK(exposure_factor(60.0, 2, kModel.response) / exposure_factor(60.0, 1, kModel.response) ==
        doctest::Approx(1.0024787521766663).epsilon(1e-12));
}

TEST_CASE("aluminum weight matches two-dimensional quadrature") {
  // dblquad of the Gaussian spot over the half-plane x < edge.
  CHECK(aluminum_weight(3.2, kModel.beam) == doctest::Approx(0.9758834334387472).epsilon(1e-10));
  CHECK(aluminum_weight(4.0, kModel.beam) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(aluminum_weight(4.5, kModel.beam) == doctest::Approx(0.10849568067945774).epsilon(1e-10));
}

TEST_CASE("absorption limits far from the edge") {
  const double w = kModel.beam.waist_um;
  CHECK(std::abs(absorption_fraction(4.0 - 10 * w, kModel.beam) - (1 - 0.64)) <= 1e-9);
  CHECK(std::abs(absorption_fraction(4.0 + 10 * w, kModel.beam) - (1 - 0.374)) <= 1e-9);
  CHECK(absorption_fraction(4.0, kModel.beam) == doctest::Approx(0.493));
}

TEST_CASE("heat transfer factor") {
  const auto& d = kModel.displacement;
  CHECK(heat_transfer_factor(0.0, d) == doctest::Approx(1.0 - 0.005));
  CHECK(heat_transfer_factor(9.5, d) == doctest::Approx(std::exp(-1.0) - 0.005));
  for (double x = 0.0; x < 50.0; x += 0.5) {
    CHECK(heat_transfer_factor(x + 0.5, d) < heat_transfer_factor(x, d));
  }
  CHECK(relative_heating(0.0, kModel.beam, d) == doctest::Approx(1.0));
}

TEST_CASE("displacement response shape") {
  double best = -1.0, arg = -1.0;
  int maxima = 0;
  for (int i = 0; i <= 300; ++i) {
    const double d = 0.1 * i;
    const double r = response(d);
    if (r > best) {
      best = r;
      arg = d;
    }
    if (i > 0 && i < 300 && r > response(d - 0.1) && r > response(d + 0.1)) ++maxima;
  }
  CHECK(arg == doctest::Approx(4.7));
  CHECK(best == doctest::Approx(0.017103370549335698).epsilon(1e-10));
  CHECK(maxima == 1);
  CHECK(response(0.0) < best);
  CHECK(response(30.0) == doctest::Approx(0.0010802863318055212).epsilon(1e-10));
  CHECK(response(30.0) <= 0.003);
}

TEST_CASE("kink near the electrode edge") {
  const double h = 0.1, w = kModel.beam.waist_um, edge = kModel.beam.electrode_extent_um;
  double inner = 0.0, outer = 0.0;
  for (int i = 1; i < 300; ++i) {
    const double d = h * i;
    const double c = std::abs(response(d + h) - 2 * response(d) + response(d - h));
    if (std::abs(d - edge) <= w) inner = std::max(inner, c);
    if (std::abs(d - edge) >= 2 * w) outer = std::max(outer, c);
  }
  CHECK(inner / outer == doctest::Approx(65.79148048530683).epsilon(1e-3));
  CHECK(inner / outer >= 5.0);
}

TEST_CASE("apply_anneal is deterministic without noise") {
  DoseModel m = kModel;
  m.stochastic.relative_sigma = 0.0;
  RngStream rng(1);
  JunctionState s{7781.0, 0.1, 0.0, {}};
  const JunctionState t = apply_anneal(s, LasingRecipe{}, m, rng);
  CHECK(t.resistance_ohm == doctest::Approx(7781.0 * (1 + mean_shift(LasingRecipe{}, m))).epsilon(1e-15));
  REQUIRE(t.history.size() == 1);
  CHECK(t.history[0].r_before_ohm == 7781.0);
  CHECK(s.history.empty());
}

TEST_CASE("apply_anneal replays the draw and honours the floor") {
  RngStream a(42), b(42);
  JunctionState s{1000.0, 0.1, 0.0, {}};
  const JunctionState t = apply_anneal(s, LasingRecipe{}, kModel, a);
  const double eps = b.normal();
  const double mu = mean_shift(LasingRecipe{}, kModel);
  CHECK(t.history.back().draw == eps);
  CHECK(t.resistance_ohm == doctest::Approx(1000.0 * (1 + mu * (1 + 0.01 * eps))).epsilon(1e-15));

  DoseModel wild = kModel;
  wild.stochastic.relative_sigma = 100.0;
  RngStream rng(3);
  for (int i = 0; i < 2000; ++i) {
    const JunctionState u = apply_anneal(s, LasingRecipe{}, wild, rng);
    CHECK(u.resistance_ohm >= 1000.0 * (1 - 0.005) - 1e-9);
  }
}

TEST_CASE("apply_anneal Monte Carlo statistics") {
  RngStream rng(2024);
  const double mu = mean_shift(LasingRecipe{}, kModel);
  const int n = 10000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const JunctionState u = apply_anneal(JunctionState{1000.0}, LasingRecipe{}, kModel, rng);
    const double x = u.resistance_ohm / 1000.0 - 1.0;
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  const double sd = std::sqrt((sum2 - n * mean * mean) / (n - 1));
  const double expected_sd = mu * 0.01;
  CHECK(std::abs(mean - mu) <= 3 * expected_sd / std::sqrt(n));
  CHECK(sd == doctest::Approx(expected_sd).epsilon(0.05));
}

TEST_CASE("dose response fit recovers the plateau from noisy shots") {
  RngStream rng(11);
  std::vector<DosePoint> pts;
  for (double p : {20.0, 30.0, 40.0}) {
    for (int j = 0; j < 20; ++j) {
      const JunctionState u =
          apply_anneal(JunctionState{5000.0}, LasingRecipe{p, 60.0, 1, 0.0}, kModel, rng);
      pts.push_back({p, u.resistance_ohm / 5000.0 - 1.0});
    }
  }
  const FitResult f = fit_dose_response(pts, kModel);
  CHECK(f.converged);
  CHECK(std::abs(f.param("plateau_m") - 0.018) <= 0.002);
}

TEST_CASE("dose response fit is exact on noiseless data") {
  std::vector<DosePoint> pts;
  for (double p = 5.0; p <= 45.0; p += 5.0) {
    pts.push_back({p, mean_shift(LasingRecipe{p, 60.0, 1, 0.0}, kModel)});
  }
  const FitResult f = fit_dose_response(pts, kModel);
  CHECK(f.param("plateau_m") == doctest::Approx(0.018).epsilon(1e-6));
  CHECK(f.param("depth_b") == doctest::Approx(0.037).epsilon(1e-6));
  CHECK(f.param("char_temperature_c") == doctest::Approx(35.0).epsilon(1e-6));
}

TEST_CASE("repetition ratio matches fitted plateaus") {
  std::vector<DosePoint> once, twice;
  for (double p = 5.0; p <= 45.0; p += 5.0) {
    once.push_back({p, mean_shift(LasingRecipe{p, 60.0, 1, 0.0}, kModel), 60.0, 1});
    twice.push_back({p, mean_shift(LasingRecipe{p, 60.0, 2, 0.0}, kModel), 60.0, 2});
  }
  const double m1 = fit_dose_response(once, kModel, false).param("plateau_m");
  const double m2 = fit_dose_response(twice, kModel, false).param("plateau_m");
  CHECK(m2 / m1 == doctest::Approx(exposure_factor(60.0, 2, kModel.response) /
                                   exposure_factor(60.0, 1, kModel.response))
                       .epsilon(1e-6));
}

TEST_CASE("displacement fit recovers the transfer parameters") {
  std::vector<DisplacementPoint> pts;
  for (double d = 0.0; d <= 30.0; d += 1.0) pts.push_back({d, response(d)});
  const FitResult f = fit_displacement(pts, kModel);
  CHECK(f.converged);
  CHECK(f.param("scale_a") == doctest::Approx(0.046).epsilon(1e-6));
  CHECK(f.param("scale_b") == doctest::Approx(0.046 * -0.005).epsilon(1e-5));
  CHECK(f.param("decay_d0_um") == doctest::Approx(9.5).epsilon(1e-6));
}

TEST_CASE("invalid model parameters") {
  DoseModel m = kModel;
  m.beam.al_reflectance = 1.0;
  CHECK_THROWS_AS(m.validate(), DomainError);
  m = kModel;
  m.displacement.transfer_offset_b = -1.0;
  CHECK_THROWS_AS(m.validate(), DomainError);
  CHECK_NOTHROW(kModel.validate());
}
