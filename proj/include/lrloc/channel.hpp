#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lrloc/dataset.hpp"
#include "lrloc/geo.hpp"

namespace lrloc {

/// Log-distance path loss with log-normal shadowing.
struct ChannelModel {
  double pl0_db = 30.0;      // path loss at the reference distance
  double d0 = 1.0;           // reference distance, meters
  double n_p = 3.0;          // path-loss exponent
  double sigma_sh = 6.0;     // shadowing std-dev, dB
  double rssi_floor = -140.0;  // receiver sensitivity, dBm
  std::uint64_t rng_seed = 0;

  nlohmann::json to_json() const;
  static ChannelModel from_json(const nlohmann::json& j);
};

void validate(const ChannelModel& m);

struct CrlbInputs {
  double snr = 1.0;      // linear ratio
  double beta_hz = 1.0;  // effective signal bandwidth
};

inline constexpr double kSpeedOfLight = 299792458.0;

/// One RSSI draw at distance d; nullopt when the sample falls below the
/// receiver floor ("not received").
std::optional<double> rssi_sample(const ChannelModel& m, double tx_dbm, double d,
                                  std::mt19937_64& rng);

/// Mean (noiseless) RSSI at distance d.
double rssi_mean(const ChannelModel& m, double tx_dbm, double d);

/// Distance-estimation lower bound for time-of-arrival ranging:
/// c / (2 sqrt(2) pi sqrt(SNR) beta).
double crlb_toa(const CrlbInputs& in);

/// Distance-estimation lower bound for RSSI ranging:
/// (ln 10 / 10) (sigma_sh / n_p) d. Grows linearly with distance.
double crlb_rssi(double sigma_sh, double n_p, double d);

enum class NodeKind { Gsn, Sn };

struct SimNode {
  std::string id;
  PlanarPoint position;
  NodeKind kind = NodeKind::Sn;
};

/// Generates T messages per node with independent shadowing draws per base
/// station per message. GSN messages carry their transmit position.
/// Deterministic given the model seed; per-node RNG streams.
MessageSet simulate_campaign(const ClassPartition& part, const ChannelModel& m,
                             const std::vector<PlanarPoint>& base_stations,
                             const std::vector<SimNode>& nodes, int messages_per_node,
                             double tx_dbm = 14.0);

}  // namespace lrloc
