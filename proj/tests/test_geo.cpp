#include <doctest.h>

#include <cmath>

#include <nlohmann/json.hpp>
#include <random>

#include "lrloc/geo.hpp"

using namespace lrloc;

TEST_CASE("project identity at origin") {
  const GeoPoint o{51.0, 4.0};
  const auto p = project(o, o);
  CHECK(p.x == 0.0);
  CHECK(p.y == 0.0);
}

TEST_CASE("project east offset lands at 1000 m") {
  const GeoPoint o{51.0, 4.0};
  // delta chosen so x = 1000 under the closed-form equirectangular formula
  const double dlon = 1000.0 / (kEarthRadiusM * std::cos(51.0 * kDegToRad)) / kDegToRad;
  const auto p = project(o, {51.0, 4.0 + dlon});
  CHECK(p.y == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(p.x == doctest::Approx(1000.0).epsilon(1e-3));
}

TEST_CASE("project north offset") {
  // R * dlat_rad = 6371000 * 0.009 * pi/180 = 1000.754 m
  const auto p = project({51.0, 4.0}, {51.009, 4.0});
  CHECK(p.x == 0.0);
  CHECK(p.y == doctest::Approx(1000.754).epsilon(1e-4));
}

TEST_CASE("project rejects out-of-frame input") {
  CHECK_THROWS_AS(project({51.0, 4.0}, {52.5, 4.0}), std::invalid_argument);
  CHECK_THROWS_AS(project({91.0, 4.0}, {51.0, 4.0}), std::invalid_argument);
}

TEST_CASE("project/unproject round-trips below 5 km") {
  const GeoPoint o{51.0, 4.0};
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coord(-5000.0, 5000.0);
  for (int i = 0; i < 200; ++i) {
    const PlanarPoint p{coord(rng), coord(rng)};
    const PlanarPoint back = project(o, unproject(o, p));
    CHECK(std::abs(back.x - p.x) < 1e-6);
    CHECK(std::abs(back.y - p.y) < 1e-6);
  }
}

TEST_CASE("single-class partition and gap") {
  const auto part = make_partition({51.0, 4.0}, 1, 1600.0, 600.0);
  CHECK(part.class_count() == 1);
  CHECK(part.center(0).x == 0.0);
  CHECK(part.center(0).y == 0.0);
  // Gap: 1600 - sqrt(3)*600 = 560.7695 m
  CHECK(part.gap_x() == doctest::Approx(560.7695).epsilon(1e-5));
}

TEST_CASE("seven-class partition is origin plus hexagon of radius D") {
  const auto part = make_partition({51.0, 4.0}, 7, 1600.0, 600.0);
  REQUIRE(part.class_count() == 7);
  CHECK(distance(part.center(0), {0.0, 0.0}) == doctest::Approx(0.0));
  for (ClassId c = 1; c < 7; ++c) {
    CHECK(distance(part.center(c), {0.0, 0.0}) == doctest::Approx(1600.0).epsilon(1e-9));
  }
}

TEST_CASE("connected classes have zero gap") {
  const double r = 600.0;
  const auto part = make_partition({51.0, 4.0}, 3, std::sqrt(3.0) * r, r);
  CHECK(part.gap_x() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("geometry violation D < sqrt(3) r is rejected") {
  CHECK_THROWS_AS(make_partition({51.0, 4.0}, 3, 1000.0, 600.0), std::invalid_argument);
  CHECK_THROWS_AS(make_partition({51.0, 4.0}, 0, 1600.0, 600.0), std::invalid_argument);
}

TEST_CASE("minimum pairwise center distance equals D") {
  for (int l : {3, 7, 18, 37}) {
    const auto part = make_partition({51.0, 4.0}, l, 1300.0, 600.0);
    double min_pair = 1e18;
    for (ClassId a = 0; a < l; ++a) {
      for (ClassId b = a + 1; b < l; ++b) {
        min_pair = std::min(min_pair, distance(part.center(a), part.center(b)));
      }
    }
    CHECK(min_pair == doctest::Approx(1300.0).epsilon(1e-6));
  }
}

TEST_CASE("assign_class basics") {
  const auto part = make_partition({51.0, 4.0}, 7, 1600.0, 600.0);
  CHECK(assign_class(part, part.center(3)) == 3);
  // 601 m out from an outer center along its radial direction is in the gap
  const PlanarPoint far{part.center(1).x * (1.0 + 601.0 / 1600.0),
                        part.center(1).y * (1.0 + 601.0 / 1600.0)};
  CHECK_FALSE(assign_class(part, far).has_value());
}

TEST_CASE("assign_class tie-break takes the lower index") {
  // overlapping disks: D < 2r, midpoint of centers 0 and 1 is inside both
  const double r = 600.0;
  const double d = std::sqrt(3.0) * r;
  const auto part = make_partition({51.0, 4.0}, 7, d, r);
  const PlanarPoint mid{0.5 * (part.center(0).x + part.center(1).x),
                        0.5 * (part.center(0).y + part.center(1).y)};
  CHECK(assign_class(part, mid) == 0);
}

TEST_CASE("partition json round-trip") {
  const auto part = make_partition({51.0, 4.0}, 7, 1600.0, 600.0);
  const auto restored = ClassPartition::from_json(part.to_json());
  CHECK(restored.class_count() == 7);
  CHECK(restored.spacing_d() == part.spacing_d());
  CHECK(restored.radius_r() == part.radius_r());
  for (ClassId c = 0; c < 7; ++c) {
    CHECK(restored.center(c).x == part.center(c).x);
    CHECK(restored.center(c).y == part.center(c).y);
  }
}
