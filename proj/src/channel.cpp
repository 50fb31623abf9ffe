#include "lrloc/channel.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "lrloc/random.hpp"

namespace lrloc {

void validate(const ChannelModel& m) {
  if (m.n_p <= 0.0) throw std::invalid_argument("path-loss exponent must be > 0");
  if (m.sigma_sh < 0.0) throw std::invalid_argument("shadowing std-dev must be >= 0");
  if (m.d0 <= 0.0) throw std::invalid_argument("reference distance must be > 0");
}

double rssi_mean(const ChannelModel& m, double tx_dbm, double d) {
  validate(m);
  if (d < m.d0) throw std::invalid_argument("distance below reference distance d0");
  return tx_dbm - m.pl0_db - 10.0 * m.n_p * std::log10(d / m.d0);
}

std::optional<double> rssi_sample(const ChannelModel& m, double tx_dbm, double d,
                                  std::mt19937_64& rng) {
  double rssi = rssi_mean(m, tx_dbm, d);
  if (m.sigma_sh > 0.0) {
    std::normal_distribution<double> shadow(0.0, m.sigma_sh);
    rssi += shadow(rng);
  }
  if (rssi < m.rssi_floor) return std::nullopt;
  return rssi;
}

double crlb_toa(const CrlbInputs& in) {
  if (in.snr <= 0.0) throw std::invalid_argument("SNR must be > 0");
  if (in.beta_hz <= 0.0) throw std::invalid_argument("bandwidth must be > 0");
  return kSpeedOfLight / (2.0 * std::sqrt(2.0) * M_PI * std::sqrt(in.snr) * in.beta_hz);
}

double crlb_rssi(double sigma_sh, double n_p, double d) {
  if (n_p <= 0.0) throw std::invalid_argument("path-loss exponent must be > 0");
  if (d < 0.0) throw std::invalid_argument("distance must be >= 0");
  return (std::log(10.0) / 10.0) * (sigma_sh / n_p) * d;
}

MessageSet simulate_campaign(const ClassPartition& part, const ChannelModel& m,
                             const std::vector<PlanarPoint>& base_stations,
                             const std::vector<SimNode>& nodes, int messages_per_node,
                             double tx_dbm) {
  validate(m);
  if (base_stations.empty()) throw std::invalid_argument("need at least one base station");
  if (messages_per_node < 1) throw std::invalid_argument("messages per node must be >= 1");

  MessageSet ms;
  for (std::size_t b = 0; b < base_stations.size(); ++b) {
    ms.bs_ids.push_back("bs" + std::to_string(b));
  }
  ms.records.reserve(nodes.size() * static_cast<std::size_t>(messages_per_node));

  for (std::size_t n = 0; n < nodes.size(); ++n) {
    const SimNode& node = nodes[n];
    auto rng = make_rng(m.rng_seed, n);
    for (int t = 0; t < messages_per_node; ++t) {
      MessageRecord rec;
      rec.time_index = t;
      rec.node_id = node.id;
      if (node.kind == NodeKind::Gsn) {
        rec.position = unproject(part.origin(), node.position);
      }
      rec.rssi.reserve(base_stations.size());
      for (const auto& bs : base_stations) {
        // clamp inside the reference distance so co-located placements work
        const double d = std::max(distance(node.position, bs), m.d0);
        const auto sample = rssi_sample(m, tx_dbm, d, rng);
        rec.rssi.push_back(sample ? *sample : missing_rssi());
      }
      ms.records.push_back(std::move(rec));
    }
  }
  return ms;
}

nlohmann::json ChannelModel::to_json() const {
  return {{"pl0_db", pl0_db},       {"d0_m", d0},
          {"n_p", n_p},             {"sigma_sh_db", sigma_sh},
          {"rssi_floor_dbm", rssi_floor}, {"seed", rng_seed}};
}

ChannelModel ChannelModel::from_json(const nlohmann::json& j) {
  ChannelModel m;
  m.pl0_db = j.value("pl0_db", m.pl0_db);
  m.d0 = j.value("d0_m", m.d0);
  m.n_p = j.value("n_p", m.n_p);
  m.sigma_sh = j.value("sigma_sh_db", m.sigma_sh);
  m.rssi_floor = j.value("rssi_floor_dbm", m.rssi_floor);
  m.rng_seed = j.value("seed", m.rng_seed);
  validate(m);
  return m;
}

}  // namespace lrloc
