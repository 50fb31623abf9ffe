#include <doctest.h>

#include <cmath>

#include <nlohmann/json.hpp>
#include <random>

#include "lrloc/channel.hpp"
#include "lrloc/random.hpp"

using namespace lrloc;

namespace {
ChannelModel noiseless() {
  ChannelModel m;
  m.pl0_db = 40.0;
  m.d0 = 1.0;
  m.n_p = 2.0;
  m.sigma_sh = 0.0;
  return m;
}
}  // namespace

TEST_CASE("rssi at reference distance equals tx minus pl0") {
  auto m = noiseless();
  std::mt19937_64 rng(1);
  const auto rssi = rssi_sample(m, 14.0, m.d0, rng);
  REQUIRE(rssi.has_value());
  CHECK(*rssi == doctest::Approx(14.0 - 40.0));
}

TEST_CASE("log-distance slope: 20 dB per decade at n_p = 2") {
  auto m = noiseless();
  std::mt19937_64 rng(1);
  const double at_d0 = *rssi_sample(m, 14.0, m.d0, rng);
  const double at_10d0 = *rssi_sample(m, 14.0, 10.0 * m.d0, rng);
  CHECK(at_d0 - at_10d0 == doctest::Approx(20.0).epsilon(1e-12));
}

TEST_CASE("distance below d0 is rejected") {
  auto m = noiseless();
  std::mt19937_64 rng(1);
  CHECK_THROWS_AS(rssi_sample(m, 14.0, 0.5, rng), std::invalid_argument);
}

TEST_CASE("below-floor samples are not received") {
  auto m = noiseless();
  m.rssi_floor = -60.0;
  std::mt19937_64 rng(1);
  CHECK_FALSE(rssi_sample(m, 14.0, 100.0, rng).has_value());  // -66 dBm < floor
  CHECK(rssi_sample(m, 14.0, 10.0, rng).has_value());         // -46 dBm
}

TEST_CASE("shadowing variance matches sigma^2 over 10k draws") {
  auto m = noiseless();
  m.sigma_sh = 6.0;
  m.rssi_floor = -1000.0;
  std::mt19937_64 rng(42);
  const int n = 10000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = *rssi_sample(m, 14.0, 50.0, rng);
    sum += v;
    sq += v * v;
  }
  const double var = sq / n - (sum / n) * (sum / n);
  CHECK(var > 32.0);  // sigma^2 = 36 within the Monte-Carlo band
  CHECK(var < 40.0);
}

TEST_CASE("noiseless rssi strictly decreases with distance") {
  auto m = noiseless();
  double prev = rssi_mean(m, 14.0, m.d0);
  for (double d = 2.0; d < 5000.0; d *= 1.4) {
    const double cur = rssi_mean(m, 14.0, d);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("toa bound with denominator constructed to cancel") {
  CrlbInputs in;
  in.snr = 1.0;
  in.beta_hz = kSpeedOfLight / (2.0 * std::sqrt(2.0) * M_PI);
  CHECK(crlb_toa(in) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("toa bound at snr 10, beta 100") {
  // c / (2 sqrt2 pi sqrt(10) 100) = 1.06695e5 m, evaluated independently
  CHECK(crlb_toa({10.0, 100.0}) == doctest::Approx(1.0672e5).epsilon(1e-3));
}

TEST_CASE("doubling beta halves the toa bound; invariant to distance by construction") {
  const double base = crlb_toa({5.0, 200.0});
  CHECK(crlb_toa({5.0, 400.0}) == doctest::Approx(base / 2.0).epsilon(1e-12));
  CHECK_THROWS_AS(crlb_toa({0.0, 100.0}), std::invalid_argument);
  CHECK_THROWS_AS(crlb_toa({1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("rssi bound values and linearity in distance") {
  CHECK(crlb_rssi(1.0, 1.0, 0.0) == 0.0);
  CHECK(crlb_rssi(1.0, 1.0, 10.0) == doctest::Approx(2.302585093).epsilon(1e-9));
  const double at_d = crlb_rssi(6.0, 3.0, 250.0);
  CHECK(crlb_rssi(6.0, 3.0, 750.0) == doctest::Approx(3.0 * at_d).epsilon(1e-12));
  CHECK_THROWS_AS(crlb_rssi(6.0, 0.0, 10.0), std::invalid_argument);
}

TEST_CASE("noiseless campaign repeats the same record") {
  const auto part = make_partition({51.0, 4.0}, 1, 1600.0, 600.0);
  auto m = noiseless();
  const std::vector<PlanarPoint> bs{{1000.0, 0.0}};
  const std::vector<SimNode> nodes{{"n0", {100.0, 50.0}, NodeKind::Sn}};
  const auto ms = simulate_campaign(part, m, bs, nodes, 3);
  REQUIRE(ms.records.size() == 3);
  CHECK(ms.records[0].rssi[0] == ms.records[1].rssi[0]);
  CHECK(ms.records[1].rssi[0] == ms.records[2].rssi[0]);
  CHECK_FALSE(ms.records[0].position.has_value());  // SN carries no position
}

TEST_CASE("campaign is seed-deterministic and shaped T x nodes x M") {
  const auto part = make_partition({51.0, 4.0}, 7, 1600.0, 600.0);
  ChannelModel m;
  m.rng_seed = 99;
  std::vector<PlanarPoint> bs;
  for (int i = 0; i < 10; ++i) bs.push_back({3000.0 * std::cos(i), 3000.0 * std::sin(i)});
  std::vector<SimNode> nodes;
  for (ClassId c = 0; c < 7; ++c) {
    nodes.push_back({"gsn" + std::to_string(c), part.center(c), NodeKind::Gsn});
  }
  const auto a = simulate_campaign(part, m, bs, nodes, 40);
  const auto b = simulate_campaign(part, m, bs, nodes, 40);
  REQUIRE(a.records.size() == 40 * 7);
  REQUIRE(a.bs_ids.size() == 10);
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    REQUIRE(a.records[i].rssi.size() == 10);
    for (std::size_t j = 0; j < 10; ++j) {
      const bool both_missing =
          is_missing(a.records[i].rssi[j]) && is_missing(b.records[i].rssi[j]);
      CHECK((both_missing || a.records[i].rssi[j] == b.records[i].rssi[j]));
    }
  }
  CHECK(a.records[0].position.has_value());  // GSN carries its position
}

TEST_CASE("channel config json round-trip") {
  ChannelModel m;
  m.pl0_db = 31.5;
  m.n_p = 3.2;
  m.sigma_sh = 5.5;
  m.rng_seed = 1234;
  const auto restored = ChannelModel::from_json(m.to_json());
  CHECK(restored.pl0_db == m.pl0_db);
  CHECK(restored.n_p == m.n_p);
  CHECK(restored.sigma_sh == m.sigma_sh);
  CHECK(restored.rssi_floor == m.rssi_floor);
  CHECK(restored.rng_seed == m.rng_seed);
}
