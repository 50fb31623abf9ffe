#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lrloc/channel.hpp"
#include "lrloc/classify.hpp"
#include "lrloc/dataset.hpp"
#include "lrloc/geo.hpp"

namespace lrloc {

/// Row = truth, column = prediction, indexed by class id.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int n_classes);

  void add(ClassId truth, ClassId predicted);
  int count(ClassId truth, ClassId predicted) const;
  int total() const { return total_; }
  double accuracy() const;
  int class_count() const { return n_; }

  nlohmann::json to_json() const;

 private:
  int n_;
  int total_ = 0;
  std::vector<std::vector<int>> counts_;
};

ConfusionMatrix confusion(const TrainedClassifier& model, const MessageSet& test,
                          const std::vector<ClassId>& labels,
                          double fill = kMissingFill);

/// Right-continuous empirical CDF as (error, cumulative fraction) steps.
std::vector<std::pair<double, double>> error_cdf(std::vector<double> errors);

/// Synthetic stand-in for a measurement campaign: one GPS anchor node per
/// class center plus test nodes uniform in each class disk, all heard by a
/// ring of base stations.
struct CampaignConfig {
  int class_count = 7;
  double spacing_d = 1600.0;
  double radius_r = 600.0;
  int bs_count = 10;
  double bs_ring_radius = 4000.0;
  int train_msgs_per_class = 40;
  int test_nodes_per_class = 10;
  int test_msgs_per_node = 4;
  double anchor_radius = 100.0;
  double tx_dbm = 14.0;
  ChannelModel channel;
  GeoPoint origin{51.0, 4.0};

  nlohmann::json to_json() const;
  static CampaignConfig from_json(const nlohmann::json& j);
};

struct Campaign {
  ClassPartition partition;
  MessageSet messages;
};

Campaign make_campaign(const CampaignConfig& cfg, std::uint64_t seed);

enum class SweepKind { Features, TrainSize, Spacing, Sigma2, Averaging, ClassCount };

std::string to_string(SweepKind k);
SweepKind sweep_kind_from_string(const std::string& s);

struct SweepSeries {
  Algorithm algorithm;
  std::vector<double> mean_accuracy;    // one entry per x value
  std::vector<double> mean_train_ms;    // wall-clock around train() only
};

struct SweepResult {
  SweepKind kind = SweepKind::Features;
  std::vector<double> x_values;
  std::vector<SweepSeries> series;
  std::vector<std::uint64_t> seeds;

  nlohmann::json to_json() const;
  std::string to_csv() const;
};

/// Reruns generate/split/train/evaluate per (x value, seed) and aggregates
/// mean accuracy per algorithm. Deterministic given (config, seeds).
SweepResult run_sweep(SweepKind kind, const CampaignConfig& cfg,
                      const std::vector<double>& x_values,
                      const std::vector<TrainConfig>& algorithms,
                      const std::vector<std::uint64_t>& seeds);

}  // namespace lrloc
