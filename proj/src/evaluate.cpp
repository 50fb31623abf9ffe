#include "lrloc/evaluate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "lrloc/random.hpp"

namespace lrloc {

ConfusionMatrix::ConfusionMatrix(int n_classes) : n_(n_classes) {
  if (n_ < 1) throw std::invalid_argument("confusion matrix needs >= 1 class");
  counts_.assign(n_, std::vector<int>(n_, 0));
}

void ConfusionMatrix::add(ClassId truth, ClassId predicted) {
  counts_.at(truth).at(predicted) += 1;
  ++total_;
}

int ConfusionMatrix::count(ClassId truth, ClassId predicted) const {
  return counts_.at(truth).at(predicted);
}

double ConfusionMatrix::accuracy() const {
  if (total_ == 0) throw std::runtime_error("empty confusion matrix");
  int diag = 0;
  for (int i = 0; i < n_; ++i) diag += counts_[i][i];
  return static_cast<double>(diag) / total_;
}

nlohmann::json ConfusionMatrix::to_json() const {
  return {{"counts", counts_}, {"accuracy", accuracy()}};
}

namespace {

std::vector<double> imputed(const std::vector<double>& rssi, double fill) {
  std::vector<double> out(rssi.size());
  for (std::size_t i = 0; i < rssi.size(); ++i) out[i] = is_missing(rssi[i]) ? fill : rssi[i];
  return out;
}

}  // namespace

ConfusionMatrix confusion(const TrainedClassifier& model, const MessageSet& test,
                          const std::vector<ClassId>& labels, double fill) {
  if (test.records.empty()) throw std::invalid_argument("empty test set");
  if (test.records.size() != labels.size()) {
    throw std::invalid_argument("test/label count mismatch");
  }
  int n = model.classes().empty() ? 0 : model.classes().back() + 1;
  for (ClassId l : labels) n = std::max(n, l + 1);
  ConfusionMatrix cm(n);
  for (std::size_t i = 0; i < test.records.size(); ++i) {
    cm.add(labels[i], model.predict(imputed(test.records[i].rssi, fill)));
  }
  return cm;
}

std::vector<std::pair<double, double>> error_cdf(std::vector<double> errors) {
  if (errors.empty()) throw std::invalid_argument("error_cdf: empty input");
  std::sort(errors.begin(), errors.end());
  std::vector<std::pair<double, double>> cdf;
  const double n = static_cast<double>(errors.size());
  for (std::size_t i = 0; i < errors.size(); ++i) {
    const double frac = static_cast<double>(i + 1) / n;
    if (!cdf.empty() && cdf.back().first == errors[i]) {
      cdf.back().second = frac;
    } else {
      cdf.emplace_back(errors[i], frac);
    }
  }
  return cdf;
}

Campaign make_campaign(const CampaignConfig& cfg, std::uint64_t seed) {
  if (cfg.class_count < 1) throw std::invalid_argument("class count must be >= 1");
  if (cfg.bs_count < 1) throw std::invalid_argument("need at least one base station");
  ClassPartition part =
      make_partition(cfg.origin, cfg.class_count, cfg.spacing_d, cfg.radius_r);

  std::vector<PlanarPoint> base_stations;
  for (int b = 0; b < cfg.bs_count; ++b) {
    const double angle = 2.0 * M_PI * b / cfg.bs_count + 0.37;
    base_stations.push_back(
        {cfg.bs_ring_radius * std::cos(angle), cfg.bs_ring_radius * std::sin(angle)});
  }

  // Anchor (GSN) node at every class center; test nodes uniform in the disk.
  // All nodes carry ground truth; anchor_split assigns the GSN/SN roles.
  std::vector<SimNode> anchors_only, test_only;
  auto rng = make_rng(seed, 3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (ClassId c = 0; c < part.class_count(); ++c) {
    anchors_only.push_back({"gsn" + std::to_string(c), part.center(c), NodeKind::Gsn});
    for (int i = 0; i < cfg.test_nodes_per_class; ++i) {
      const double rad = cfg.radius_r * std::sqrt(unit(rng));
      const double theta = 2.0 * M_PI * unit(rng);
      PlanarPoint p{part.center(c).x + rad * std::cos(theta),
                    part.center(c).y + rad * std::sin(theta)};
      test_only.push_back(
          {"sn" + std::to_string(c) + "_" + std::to_string(i), p, NodeKind::Gsn});
    }
  }

  ChannelModel train_ch = cfg.channel;
  train_ch.rng_seed = derive_seed(seed, 1);
  ChannelModel test_ch = cfg.channel;
  test_ch.rng_seed = derive_seed(seed, 2);

  Campaign campaign{part, simulate_campaign(part, train_ch, base_stations, anchors_only,
                                            cfg.train_msgs_per_class, cfg.tx_dbm)};
  MessageSet test_ms = simulate_campaign(part, test_ch, base_stations, test_only,
                                         cfg.test_msgs_per_node, cfg.tx_dbm);
  campaign.messages.records.insert(campaign.messages.records.end(),
                                   std::make_move_iterator(test_ms.records.begin()),
                                   std::make_move_iterator(test_ms.records.end()));
  return campaign;
}

std::string to_string(SweepKind k) {
  switch (k) {
    case SweepKind::Features: return "features";
    case SweepKind::TrainSize: return "trainsize";
    case SweepKind::Spacing: return "spacing";
    case SweepKind::Sigma2: return "sigma2";
    case SweepKind::Averaging: return "averaging";
    case SweepKind::ClassCount: return "classcount";
  }
  throw std::logic_error("unknown sweep kind");
}

SweepKind sweep_kind_from_string(const std::string& s) {
  if (s == "features") return SweepKind::Features;
  if (s == "trainsize") return SweepKind::TrainSize;
  if (s == "spacing") return SweepKind::Spacing;
  if (s == "sigma2") return SweepKind::Sigma2;
  if (s == "averaging") return SweepKind::Averaging;
  if (s == "classcount") return SweepKind::ClassCount;
  throw std::invalid_argument("unknown sweep kind '" + s + "'");
}

namespace {

struct PointOutcome {
  double accuracy = 0.0;
  double train_ms = 0.0;
};

// one (x value, seed) evaluation: generate, split, train, score
PointOutcome evaluate_point(SweepKind kind, double x, const CampaignConfig& base,
                            const TrainConfig& algo, std::uint64_t seed) {
  CampaignConfig cfg = base;
  TrainConfig tcfg = algo;
  std::size_t features = 0;
  std::size_t avg_k = 1;
  switch (kind) {
    case SweepKind::Features:
      features = static_cast<std::size_t>(x);
      break;
    case SweepKind::TrainSize:
      cfg.train_msgs_per_class = static_cast<int>(x);
      break;
    case SweepKind::Spacing: {
      if (x < 0.0 || x >= 1.0) {
        throw std::invalid_argument("spacing ratio x/D must lie in [0, 1)");
      }
      cfg.radius_r = cfg.spacing_d * (1.0 - x) / std::sqrt(3.0);
      break;
    }
    case SweepKind::Sigma2:
      tcfg.algorithm = Algorithm::Svm;
      tcfg.svm.sigma2 = x;
      break;
    case SweepKind::Averaging:
      avg_k = static_cast<std::size_t>(x);
      break;
    case SweepKind::ClassCount:
      cfg.class_count = static_cast<int>(x);
      break;
  }

  Campaign campaign = make_campaign(cfg, seed);
  LabeledSplit split =
      anchor_split(campaign.messages, campaign.partition, cfg.anchor_radius, seed);
  if (features > 0) {
    auto [tr, te] = select_features(split.train, split.test, features);
    split.train = std::move(tr);
    split.test = std::move(te);
  }

  // per-class fingerprint matrices from the (balanced) train half
  std::size_t per_class = 0;
  {
    std::vector<std::size_t> counts(campaign.partition.class_count(), 0);
    for (ClassId c : split.train_labels) ++counts[c];
    per_class = *std::max_element(counts.begin(), counts.end());
  }
  std::map<ClassId, FingerprintMatrix> matrices;
  for (std::size_t i = 0; i < split.train.records.size(); ++i) {
    const ClassId c = split.train_labels[i];
    matrices.try_emplace(c, c, per_class, split.train.feature_count());
    matrices.at(c).insert(split.train.records[i].rssi);
  }
  if (avg_k > 1) {
    std::map<ClassId, FingerprintMatrix> averaged;
    for (const auto& [c, fm] : matrices) averaged.emplace(c, average_k(fm, avg_k));
    matrices = std::move(averaged);
  }

  const auto t0 = std::chrono::steady_clock::now();
  const TrainedClassifier model = train(tcfg, matrices);
  const auto t1 = std::chrono::steady_clock::now();

  // test rows, optionally averaged k-by-k within each node's message stream
  std::vector<std::vector<double>> test_rows;
  std::vector<ClassId> test_labels;
  if (avg_k > 1) {
    std::size_t i = 0;
    while (i < split.test.records.size()) {
      const std::string& node = split.test.records[i].node_id;
      std::size_t j = i;
      while (j < split.test.records.size() && split.test.records[j].node_id == node) ++j;
      for (std::size_t g = i; g + avg_k <= j; g += avg_k) {
        std::vector<double> mean(split.test.feature_count(), 0.0);
        for (std::size_t r = g; r < g + avg_k; ++r) {
          const auto row = imputed(split.test.records[r].rssi, kMissingFill);
          for (std::size_t f = 0; f < mean.size(); ++f) mean[f] += row[f];
        }
        for (double& v : mean) v /= static_cast<double>(avg_k);
        test_rows.push_back(std::move(mean));
        test_labels.push_back(split.test_labels[g]);
      }
      i = j;
    }
  } else {
    for (std::size_t i = 0; i < split.test.records.size(); ++i) {
      test_rows.push_back(imputed(split.test.records[i].rssi, kMissingFill));
      test_labels.push_back(split.test_labels[i]);
    }
  }
  if (test_rows.empty()) throw std::runtime_error("sweep point produced an empty test set");

  int correct = 0;
  for (std::size_t i = 0; i < test_rows.size(); ++i) {
    if (model.predict(test_rows[i]) == test_labels[i]) ++correct;
  }
  PointOutcome out;
  out.accuracy = static_cast<double>(correct) / test_rows.size();
  out.train_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  return out;
}

}  // namespace

SweepResult run_sweep(SweepKind kind, const CampaignConfig& cfg,
                      const std::vector<double>& x_values,
                      const std::vector<TrainConfig>& algorithms,
                      const std::vector<std::uint64_t>& seeds) {
  if (x_values.empty()) throw std::invalid_argument("sweep needs x values");
  if (algorithms.empty()) throw std::invalid_argument("sweep needs algorithms");
  if (seeds.empty()) throw std::invalid_argument("sweep needs seeds");

  SweepResult result;
  result.kind = kind;
  result.x_values = x_values;
  result.seeds = seeds;
  for (const auto& algo : algorithms) {
    SweepSeries series;
    series.algorithm = kind == SweepKind::Sigma2 ? Algorithm::Svm : algo.algorithm;
    for (double x : x_values) {
      double acc = 0.0, ms = 0.0;
      for (std::uint64_t seed : seeds) {
        const PointOutcome p = evaluate_point(kind, x, cfg, algo, seed);
        acc += p.accuracy;
        ms += p.train_ms;
      }
      series.mean_accuracy.push_back(acc / seeds.size());
      series.mean_train_ms.push_back(ms / seeds.size());
    }
    result.series.push_back(std::move(series));
  }
  return result;
}

nlohmann::json CampaignConfig::to_json() const {
  return {{"class_count", class_count},
          {"spacing_d_m", spacing_d},
          {"radius_r_m", radius_r},
          {"bs_count", bs_count},
          {"bs_ring_radius_m", bs_ring_radius},
          {"train_msgs_per_class", train_msgs_per_class},
          {"test_nodes_per_class", test_nodes_per_class},
          {"test_msgs_per_node", test_msgs_per_node},
          {"anchor_radius_m", anchor_radius},
          {"tx_dbm", tx_dbm},
          {"channel", channel.to_json()},
          {"origin", {{"lat", origin.lat}, {"lon", origin.lon}}}};
}

CampaignConfig CampaignConfig::from_json(const nlohmann::json& j) {
  CampaignConfig cfg;
  cfg.class_count = j.value("class_count", cfg.class_count);
  cfg.spacing_d = j.value("spacing_d_m", cfg.spacing_d);
  cfg.radius_r = j.value("radius_r_m", cfg.radius_r);
  cfg.bs_count = j.value("bs_count", cfg.bs_count);
  cfg.bs_ring_radius = j.value("bs_ring_radius_m", cfg.bs_ring_radius);
  cfg.train_msgs_per_class = j.value("train_msgs_per_class", cfg.train_msgs_per_class);
  cfg.test_nodes_per_class = j.value("test_nodes_per_class", cfg.test_nodes_per_class);
  cfg.test_msgs_per_node = j.value("test_msgs_per_node", cfg.test_msgs_per_node);
  cfg.anchor_radius = j.value("anchor_radius_m", cfg.anchor_radius);
  cfg.tx_dbm = j.value("tx_dbm", cfg.tx_dbm);
  if (j.contains("channel")) cfg.channel = ChannelModel::from_json(j.at("channel"));
  if (j.contains("origin")) {
    cfg.origin = {j.at("origin").at("lat").get<double>(),
                  j.at("origin").at("lon").get<double>()};
  }
  return cfg;
}

nlohmann::json SweepResult::to_json() const {
  nlohmann::json series_json = nlohmann::json::array();
  for (const auto& s : series) {
    series_json.push_back({{"algorithm", to_string(s.algorithm)},
                           {"mean_accuracy", s.mean_accuracy},
                           {"mean_train_ms", s.mean_train_ms}});
  }
  return {{"kind", to_string(kind)},
          {"x_values", x_values},
          {"seeds", seeds},
          {"series", std::move(series_json)}};
}

std::string SweepResult::to_csv() const {
  std::ostringstream out;
  // timings live in the JSON report; the CSV stays byte-reproducible per seed
  out << "kind,x,algorithm,mean_accuracy\n";
  for (const auto& s : series) {
    for (std::size_t i = 0; i < x_values.size(); ++i) {
      out << to_string(kind) << "," << x_values[i] << "," << to_string(s.algorithm) << ","
          << s.mean_accuracy[i] << "\n";
    }
  }
  return out.str();
}

}  // namespace lrloc
