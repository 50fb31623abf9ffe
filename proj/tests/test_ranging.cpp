#include <doctest.h>

#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "lrloc/ranging.hpp"

using namespace lrloc;

namespace {

// distance = P(rssi) used to generate exact cubic data; monotone decreasing
// over the sampled rssi span with distances in [10, 267] m
double cubic(double rssi) {
  return -391.4 - 5.43 * rssi + 0.03 * rssi * rssi + 0.00015 * rssi * rssi * rssi;
}

std::vector<RangingSample> cubic_samples() {
  std::vector<RangingSample> s;
  for (double rssi = -95.0; rssi <= -60.0; rssi += 2.5) {
    s.push_back({cubic(rssi), rssi});
  }
  return s;
}

}  // namespace

TEST_CASE("cubic data refit at n=3 recovers its coefficients") {
  const auto curve = fit_polynomial(cubic_samples(), 3);
  const std::vector<double> expected{-391.4, -5.43, 0.03, 0.00015};
  REQUIRE(curve.coefficients().size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(curve.coefficients()[i] ==
          doctest::Approx(expected[i]).epsilon(1e-6));
  }
  CHECK(curve.residual_rmse() < 1e-6);
}

TEST_CASE("degree 1 on two points is the exact line") {
  const std::vector<RangingSample> s{{10.0, -60.0}, {110.0, -90.0}};
  const auto curve = fit_polynomial(s, 1);
  // d = a0 + a1 rssi through (-60, 10) and (-90, 110)
  const double a1 = (110.0 - 10.0) / (-90.0 + 60.0);
  const double a0 = 10.0 - a1 * -60.0;
  CHECK(curve.coefficients()[0] == doctest::Approx(a0).epsilon(1e-9));
  CHECK(curve.coefficients()[1] == doctest::Approx(a1).epsilon(1e-9));
  CHECK(curve.residual_rmse() == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("fit residual matches a brute-force grid-search oracle") {
  // 20 noisy samples, 2-coefficient sub-problem
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 4.0);
  std::vector<RangingSample> s;
  for (int i = 0; i < 20; ++i) {
    const double rssi = -95.0 + 2.0 * i;
    s.push_back({std::max(1.0, 500.0 + 5.5 * rssi + noise(rng)), rssi});
  }
  const auto curve = fit_polynomial(s, 1);

  auto rmse_of = [&](double a0, double a1) {
    double acc = 0.0;
    for (const auto& p : s) {
      const double e = a0 + a1 * p.rssi - p.distance;
      acc += e * e;
    }
    return std::sqrt(acc / s.size());
  };
  // coarse-to-fine dense grid around the fit, independent of the solver path
  double best = 1e300;
  double c0 = 500.0, c1 = 5.5, span0 = 200.0, span1 = 4.0;
  for (int level = 0; level < 6; ++level) {
    double best0 = c0, best1 = c1;
    for (int i = -40; i <= 40; ++i) {
      for (int j = -40; j <= 40; ++j) {
        const double a0 = c0 + span0 * i / 40.0;
        const double a1 = c1 + span1 * j / 40.0;
        const double v = rmse_of(a0, a1);
        if (v < best) {
          best = v;
          best0 = a0;
          best1 = a1;
        }
      }
    }
    c0 = best0;
    c1 = best1;
    span0 /= 20.0;
    span1 /= 20.0;
  }
  CHECK(curve.residual_rmse() <= best + 1e-6);
}

TEST_CASE("perturbing any coefficient never reduces the least-squares objective") {
  const auto s = cubic_samples();
  const auto curve = fit_polynomial(s, 2);
  auto sse_of = [&](const std::vector<double>& c) {
    double acc = 0.0;
    for (const auto& p : s) {
      const double e = c[0] + c[1] * p.rssi + c[2] * p.rssi * p.rssi - p.distance;
      acc += e * e;
    }
    return acc;
  };
  const double base = sse_of(curve.coefficients());
  for (std::size_t i = 0; i < curve.coefficients().size(); ++i) {
    for (double delta : {-1e-3, 1e-3}) {
      auto perturbed = curve.coefficients();
      perturbed[i] += delta;
      CHECK(sse_of(perturbed) >= base - 1e-9);
    }
  }
}

TEST_CASE("polynomial fit rejects degenerate input") {
  std::vector<RangingSample> flat;
  for (int i = 0; i < 8; ++i) flat.push_back({10.0 + i, -70.0});
  CHECK_THROWS_AS(fit_polynomial(flat, 2), std::invalid_argument);
  CHECK_THROWS_AS(fit_polynomial(cubic_samples(), 0), std::invalid_argument);
  CHECK_THROWS_AS(fit_polynomial(cubic_samples(), 6), std::invalid_argument);
  CHECK_THROWS_AS(fit_polynomial({{10.0, -60.0}}, 1), std::invalid_argument);
}

TEST_CASE("power fit recovers exact two-term parameters") {
  std::vector<RangingSample> s;
  for (double d = 10.0; d <= 200.0; d += 10.0) {
    s.push_back({d, -10.0 * std::pow(d, 0.5) - 40.0});
  }
  const auto curve = fit_power(s);
  CHECK(curve.coefficients()[0] == doctest::Approx(-10.0).epsilon(1e-4));
  CHECK(curve.coefficients()[1] == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(curve.coefficients()[2] == doctest::Approx(-40.0).epsilon(1e-4));
}

TEST_CASE("flat power data is a rank-deficiency error") {
  std::vector<RangingSample> flat;
  for (double d = 10.0; d <= 100.0; d += 10.0) flat.push_back({d, -70.0});
  CHECK_THROWS_AS(fit_power(flat), std::invalid_argument);
}

TEST_CASE("campus-shaped power fit is monotone decreasing") {
  // roughly -58 dBm at 10 m to -87 dBm at 100 m
  std::mt19937_64 rng(11);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<RangingSample> s;
  for (double d = 10.0; d <= 130.0; d += 5.0) {
    s.push_back({d, -30.0 - 12.2 * std::log10(d) * 2.3 + noise(rng)});
  }
  const auto curve = fit_power(s);
  double prev = curve.rssi_at(curve.domain_min());
  for (double d = curve.domain_min() + 1.0; d <= curve.domain_max(); d += 1.0) {
    const double cur = curve.rssi_at(d);
    CHECK(cur <= prev + 1e-9);
    prev = cur;
  }
}

TEST_CASE("invert_distance round-trips and clamps") {
  const auto curve = fit_polynomial(cubic_samples(), 3);

  SUBCASE("round-trip at d = 50") {
    const double rssi = curve.rssi_at(50.0);
    CHECK(invert_distance(curve, rssi) == doctest::Approx(50.0).epsilon(1e-6));
  }
  SUBCASE("round-trip across the monotone span") {
    for (double d = curve.domain_min(); d <= curve.domain_max();
         d += (curve.domain_max() - curve.domain_min()) / 17.0) {
      const double back = invert_distance(curve, curve.rssi_at(d));
      CHECK(std::abs(back - d) <= 1e-6 * d);
    }
  }
  SUBCASE("readings beyond the curve ends clamp to the domain") {
    // the cubic maps stronger rssi to shorter distance
    CHECK(invert_distance(curve, 0.0) == curve.domain_min());
    CHECK(invert_distance(curve, -150.0) == curve.domain_max());
  }
  SUBCASE("output always stays inside the fit domain") {
    for (double rssi = -150.0; rssi <= 0.0; rssi += 3.7) {
      const double d = invert_distance(curve, rssi);
      CHECK(d >= curve.domain_min());
      CHECK(d <= curve.domain_max());
    }
  }
}

TEST_CASE("power curve round-trip") {
  std::vector<RangingSample> s;
  for (double d = 10.0; d <= 200.0; d += 10.0) {
    s.push_back({d, -8.0 * std::pow(d, 0.6) - 35.0});
  }
  const auto curve = fit_power(s);
  for (double d = 12.0; d <= 195.0; d += 13.0) {
    CHECK(invert_distance(curve, curve.rssi_at(d)) == doctest::Approx(d).epsilon(1e-6));
  }
}

TEST_CASE("ranging rmse") {
  CHECK(ranging_rmse({{5.0, 7.0}}, {{5.0, 7.0}}) == 0.0);
  CHECK(ranging_rmse({{8.0}}, {{5.0}}) == doctest::Approx(3.0));
  // errors {3, 4} over 2 entries -> sqrt(25/2)
  CHECK(ranging_rmse({{8.0, 1.0}}, {{5.0, 5.0}}) == doctest::Approx(3.5355339).epsilon(1e-6));
  CHECK_THROWS_AS(ranging_rmse({{1.0}}, {{1.0, 2.0}}), std::invalid_argument);
  CHECK_THROWS_AS(ranging_rmse({}, {}), std::invalid_argument);
}

TEST_CASE("curve json round-trip") {
  const auto curve = fit_polynomial(cubic_samples(), 3);
  const auto restored = RangingCurve::from_json(curve.to_json());
  CHECK(restored.kind() == CurveKind::Polynomial);
  CHECK(restored.coefficients() == curve.coefficients());
  CHECK(restored.domain_min() == curve.domain_min());
  CHECK(restored.domain_max() == curve.domain_max());
}
