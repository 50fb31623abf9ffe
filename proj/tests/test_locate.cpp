#include <doctest.h>

#include <cmath>
#include <random>

#include "lrloc/channel.hpp"
#include "lrloc/locate.hpp"

using namespace lrloc;

TEST_CASE("in_range conventions") {
  CHECK_FALSE(in_range(std::nullopt, -100.0));
  CHECK(in_range(-85.0, -100.0));
  CHECK(in_range(-100.0, -100.0));  // inclusive boundary
  CHECK_FALSE(in_range(-100.001, -100.0));
}

TEST_CASE("multilateration recovers the target from exact distances") {
  const std::vector<PlanarPoint> anchors{{0.0, 0.0}, {100.0, 0.0}, {0.0, 100.0}};
  const PlanarPoint target{30.0, 40.0};
  std::vector<double> distances;
  for (const auto& a : anchors) distances.push_back(distance(a, target));
  const auto p = multilaterate(anchors, distances);
  CHECK(p.x == doctest::Approx(30.0).epsilon(1e-8));
  CHECK(p.y == doctest::Approx(40.0).epsilon(1e-8));
}

TEST_CASE("100 random non-collinear configurations recover within 1e-6 m") {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> coord(-500.0, 500.0);
  int done = 0;
  while (done < 100) {
    const std::vector<PlanarPoint> anchors{{coord(rng), coord(rng)},
                                           {coord(rng), coord(rng)},
                                           {coord(rng), coord(rng)}};
    // skip nearly collinear draws
    const double area =
        std::abs((anchors[1].x - anchors[0].x) * (anchors[2].y - anchors[0].y) -
                 (anchors[2].x - anchors[0].x) * (anchors[1].y - anchors[0].y));
    if (area < 1e4) continue;
    const PlanarPoint target{coord(rng), coord(rng)};
    std::vector<double> distances;
    for (const auto& a : anchors) distances.push_back(distance(a, target));
    const auto p = multilaterate(anchors, distances);
    CHECK(std::abs(p.x - target.x) < 1e-6);
    CHECK(std::abs(p.y - target.y) < 1e-6);
    ++done;
  }
}

TEST_CASE("target at an anchor position") {
  const std::vector<PlanarPoint> anchors{{0.0, 0.0}, {100.0, 0.0}, {40.0, 90.0}};
  const PlanarPoint target = anchors[0];
  std::vector<double> distances;
  for (const auto& a : anchors) distances.push_back(distance(a, target));
  const auto p = multilaterate(anchors, distances);
  CHECK(p.x == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(p.y == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("degenerate geometry is rejected") {
  CHECK_THROWS_AS(multilaterate({{0.0, 0.0}, {100.0, 0.0}}, {10.0, 20.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      multilaterate({{0.0, 0.0}, {50.0, 0.0}, {100.0, 0.0}}, {10.0, 20.0, 30.0}),
      std::runtime_error);
}

TEST_CASE("multilateration is translation-equivariant") {
  const std::vector<PlanarPoint> anchors{{0.0, 0.0}, {120.0, 10.0}, {30.0, 140.0}};
  const PlanarPoint target{55.0, 48.0};
  std::vector<double> distances;
  for (const auto& a : anchors) distances.push_back(distance(a, target));
  const auto base = multilaterate(anchors, distances);
  const PlanarPoint shift{1234.5, -678.9};
  std::vector<PlanarPoint> moved;
  for (const auto& a : anchors) moved.push_back({a.x + shift.x, a.y + shift.y});
  const auto shifted = multilaterate(moved, distances);
  CHECK(shifted.x - base.x == doctest::Approx(shift.x).epsilon(1e-9));
  CHECK(shifted.y - base.y == doctest::Approx(shift.y).epsilon(1e-9));
}

TEST_CASE("refined error shrinks as ranging noise vanishes") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> coord(-150.0, 150.0);
  const std::vector<PlanarPoint> anchors{{0.0, 0.0}, {200.0, 0.0}, {100.0, 180.0}};
  std::vector<double> medians;
  for (double sigma : {1.0, 0.1, 0.01}) {
    std::normal_distribution<double> noise(0.0, sigma);
    std::vector<double> errors;
    for (int trial = 0; trial < 100; ++trial) {
      const PlanarPoint target{coord(rng) + 100.0, coord(rng) + 60.0};
      std::vector<double> distances;
      for (const auto& a : anchors) {
        distances.push_back(std::max(0.1, distance(a, target) + noise(rng)));
      }
      const auto p = multilaterate(anchors, distances);
      errors.push_back(distance(p, target));
    }
    std::sort(errors.begin(), errors.end());
    medians.push_back(errors[errors.size() / 2]);
  }
  CHECK(medians[1] < medians[0]);
  CHECK(medians[2] < medians[1]);
}

namespace {

struct Fixture {
  ClassPartition part = make_partition({51.0, 4.0}, 7, 1600.0, 600.0);
  ChannelModel channel;
  TrainedClassifier model;
  std::vector<Anchor> anchors;

  Fixture() : model(make_model()) {
    channel.pl0_db = 40.0;
    channel.d0 = 1.0;
    channel.n_p = 2.5;
    channel.sigma_sh = 0.0;
    for (ClassId c = 0; c < part.class_count(); ++c) {
      anchors.push_back({c, part.center(c), make_curve()});
    }
  }

  // exact linear rssi-distance law: d = -750 - 25 rssi on [1, 3000] m
  RangingCurve make_curve() const {
    return RangingCurve(CurveKind::Polynomial, {-750.0, -25.0}, 1.0, 3000.0, 0.0);
  }

  TrainedClassifier make_model() {
    // tiny 7-class kNN on per-class constant fingerprints
    std::vector<std::vector<double>> rows;
    std::vector<ClassId> labels;
    for (ClassId c = 0; c < 7; ++c) {
      rows.push_back({-60.0 - 5.0 * c, -95.0 + 5.0 * c});
      labels.push_back(c);
    }
    TrainConfig cfg;
    cfg.algorithm = Algorithm::Knn;
    cfg.knn.k = 1;
    return train_rows(cfg, rows, labels);
  }

  std::vector<double> fingerprint_of(ClassId c) const {
    return {-60.0 - 5.0 * c, -95.0 + 5.0 * c};
  }

  double d2d_rssi(PlanarPoint sn, ClassId anchor_id) const {
    const double d = std::max(1.0, distance(sn, part.center(anchor_id)));
    return anchors[anchor_id].curve.rssi_at(d);
  }
};

}  // namespace

TEST_CASE("localize follows the K >= 3 branch structure") {
  Fixture fx;
  const PlanarPoint sn{120.0, -80.0};  // inside class 0

  SUBCASE("no readings -> class only at the predicted center") {
    const auto res = localize(fx.fingerprint_of(0), fx.model, fx.part, fx.anchors, {});
    CHECK(res.mode == LocMode::ClassOnly);
    CHECK(res.class_id == 0);
    CHECK(res.position.x == fx.part.center(0).x);
    CHECK(res.anchors_used == 0);
  }
  SUBCASE("two in-range anchors stay class only") {
    std::map<ClassId, double> d2d{{0, fx.d2d_rssi(sn, 0)}, {1, fx.d2d_rssi(sn, 1)}};
    const auto res = localize(fx.fingerprint_of(0), fx.model, fx.part, fx.anchors, d2d);
    CHECK(res.mode == LocMode::ClassOnly);
    CHECK(res.anchors_used == 2);
  }
  SUBCASE("three noiseless readings refine to the truth") {
    std::map<ClassId, double> d2d;
    for (ClassId c : {0, 1, 2}) d2d[c] = fx.d2d_rssi(sn, c);
    const auto res = localize(fx.fingerprint_of(0), fx.model, fx.part, fx.anchors, d2d,
                              -140.0);
    REQUIRE(res.mode == LocMode::Refined);
    CHECK(res.anchors_used == 3);
    CHECK(distance(res.position, sn) < 1e-3);
  }
  SUBCASE("out-of-range readings are ignored") {
    std::map<ClassId, double> d2d;
    for (ClassId c : {0, 1, 2}) d2d[c] = fx.d2d_rssi(sn, c);
    // threshold above every reading: no anchor is in range
    const auto res = localize(fx.fingerprint_of(0), fx.model, fx.part, fx.anchors, d2d,
                              0.0);
    CHECK(res.mode == LocMode::ClassOnly);
    CHECK(res.anchors_used == 0);
  }
}

TEST_CASE("refinement never hurts on noiseless synthetic data") {
  Fixture fx;
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    PlanarPoint sn{400.0 * u(rng), 400.0 * u(rng)};
    std::map<ClassId, double> d2d;
    for (ClassId c = 0; c < fx.part.class_count(); ++c) d2d[c] = fx.d2d_rssi(sn, c);
    const auto refined =
        localize(fx.fingerprint_of(0), fx.model, fx.part, fx.anchors, d2d, -140.0);
    const auto class_only =
        localize(fx.fingerprint_of(0), fx.model, fx.part, fx.anchors, {}, -140.0);
    REQUIRE(refined.mode == LocMode::Refined);
    CHECK(distance(refined.position, sn) <= distance(class_only.position, sn) + 1e-9);
  }
}
