#include "lrloc/classify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "classify_internal.hpp"

namespace lrloc {

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Knn: return "knn";
    case Algorithm::Svm: return "svm";
    case Algorithm::RandomForest: return "rndf";
  }
  throw std::logic_error("unknown algorithm");
}

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "knn") return Algorithm::Knn;
  if (s == "svm") return Algorithm::Svm;
  if (s == "rndf" || s == "forest" || s == "randomforest") return Algorithm::RandomForest;
  throw std::invalid_argument("unknown algorithm '" + s + "' (knn|svm|rndf)");
}

namespace {

int knn_vote(const detail::KnnModel& m, std::span<const double> x,
             const std::vector<ClassId>& classes, std::vector<double>* proba) {
  const std::size_t n = m.rows.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sq = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double d = m.rows[i][j] - x[j];
      sq += d * d;
    }
    dist[i] = sq;
  }
  const std::size_t k = std::min<std::size_t>(m.k, n);
  // ties on distance resolve by training-row index for determinism
  std::partial_sort(order.begin(), order.begin() + k, order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return dist[a] != dist[b] ? dist[a] < dist[b] : a < b;
                    });
  std::vector<int> votes(classes.size(), 0);
  for (std::size_t i = 0; i < k; ++i) {
    const auto it = std::lower_bound(classes.begin(), classes.end(), m.labels[order[i]]);
    ++votes[static_cast<std::size_t>(it - classes.begin())];
  }
  int best = 0;
  for (std::size_t i = 1; i < votes.size(); ++i) {
    if (votes[i] > votes[best]) best = static_cast<int>(i);
  }
  if (proba) {
    proba->assign(votes.size(), 0.0);
    for (std::size_t i = 0; i < votes.size(); ++i) {
      (*proba)[i] = votes[i] / static_cast<double>(k);
    }
  }
  return best;
}

}  // namespace

ClassId TrainedClassifier::predict(std::span<const double> rssi) const {
  if (rssi.size() != feature_count_) {
    throw std::invalid_argument("predict: expected " + std::to_string(feature_count_) +
                                " features, got " + std::to_string(rssi.size()));
  }
  int idx = 0;
  if (const auto* knn = std::get_if<detail::KnnModel>(&model_)) {
    idx = knn_vote(*knn, rssi, classes_, nullptr);
  } else if (const auto* svm = std::get_if<detail::SvmModel>(&model_)) {
    idx = detail::svm_vote(*svm, rssi, classes_, nullptr);
  } else {
    const auto proba =
        detail::forest_proba(std::get<detail::ForestModel>(model_), rssi, class_count());
    for (std::size_t i = 1; i < proba.size(); ++i) {
      if (proba[i] > proba[idx]) idx = static_cast<int>(i);
    }
  }
  return classes_[idx];
}

std::vector<double> TrainedClassifier::predict_proba(std::span<const double> rssi) const {
  if (rssi.size() != feature_count_) {
    throw std::invalid_argument("predict_proba: feature count mismatch");
  }
  std::vector<double> proba;
  if (const auto* knn = std::get_if<detail::KnnModel>(&model_)) {
    knn_vote(*knn, rssi, classes_, &proba);
  } else if (const auto* svm = std::get_if<detail::SvmModel>(&model_)) {
    detail::svm_vote(*svm, rssi, classes_, &proba);
  } else {
    proba = detail::forest_proba(std::get<detail::ForestModel>(model_), rssi, class_count());
  }
  return proba;
}

TrainedClassifier train_rows(const TrainConfig& cfg,
                             const std::vector<std::vector<double>>& rows,
                             const std::vector<ClassId>& labels) {
  if (rows.empty()) throw std::invalid_argument("train: no rows");
  if (rows.size() != labels.size()) throw std::invalid_argument("train: rows/labels mismatch");
  const std::size_t m = rows.front().size();
  if (m == 0) throw std::invalid_argument("train: zero features");
  for (const auto& row : rows) {
    if (row.size() != m) throw std::invalid_argument("train: inconsistent feature count");
  }
  const std::set<ClassId> class_set(labels.begin(), labels.end());
  if (class_set.size() < 2) throw std::invalid_argument("train: need at least 2 classes");

  TrainedClassifier model;
  model.feature_count_ = m;
  model.classes_.assign(class_set.begin(), class_set.end());
  model.train_timestamp_ = std::chrono::duration_cast<std::chrono::seconds>(
                               std::chrono::system_clock::now().time_since_epoch())
                               .count();

  std::vector<int> label_idx(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto it = std::lower_bound(model.classes_.begin(), model.classes_.end(), labels[i]);
    label_idx[i] = static_cast<int>(it - model.classes_.begin());
  }

  model.algorithm_ = cfg.algorithm;
  switch (cfg.algorithm) {
    case Algorithm::Knn: {
      if (cfg.knn.k < 1) throw std::invalid_argument("kNN: k must be >= 1");
      detail::KnnModel knn;
      knn.k = cfg.knn.k;
      knn.rows = rows;
      knn.labels = labels;
      model.model_ = std::move(knn);
      break;
    }
    case Algorithm::Svm:
      model.model_ = detail::train_svm(cfg.svm, rows, label_idx, model.classes_);
      break;
    case Algorithm::RandomForest:
      model.model_ = detail::train_forest(cfg.forest, rows, label_idx,
                                          static_cast<int>(model.classes_.size()));
      break;
  }
  return model;
}

TrainedClassifier train(const TrainConfig& cfg,
                        const std::map<ClassId, FingerprintMatrix>& fingerprints) {
  if (fingerprints.size() < 2) throw std::invalid_argument("train: need at least 2 classes");
  std::vector<std::vector<double>> rows;
  std::vector<ClassId> labels;
  std::size_t m = 0;
  for (const auto& [cls, fm] : fingerprints) {
    if (fm.row_count() == 0) {
      throw std::invalid_argument("train: class " + std::to_string(cls) + " has no rows");
    }
    if (m == 0) m = fm.feature_count();
    if (fm.feature_count() != m) {
      throw std::invalid_argument("train: inconsistent feature count across classes");
    }
    for (auto& row : fm.snapshot()) {
      rows.push_back(std::move(row));
      labels.push_back(cls);
    }
  }
  return train_rows(cfg, rows, labels);
}

double class_error(ClassId estimated, ClassId truth, const ClassPartition& part) {
  return distance(part.center(estimated), part.center(truth));
}

OnlineTrainer::OnlineTrainer(TrainConfig cfg, std::map<std::string, ClassId> gsn_registry,
                             std::size_t rows, std::size_t features, long train_period,
                             double fill)
    : cfg_(std::move(cfg)), gsn_registry_(std::move(gsn_registry)),
      train_period_(train_period) {
  if (train_period_ < 1) throw std::invalid_argument("train period must be >= 1 s");
  for (const auto& [node, cls] : gsn_registry_) {
    (void)node;
    matrices_.try_emplace(cls, cls, rows, features, fill);
  }
}

const TrainedClassifier& OnlineTrainer::current_model() const {
  if (!model_) throw std::runtime_error("no model trained yet");
  return *model_;
}

void OnlineTrainer::maybe_retrain(long clock) {
  if (clock % train_period_ != 0) return;
  for (const auto& [cls, fm] : matrices_) {
    if (fm.row_count() == 0) return;  // not enough data yet
  }
  model_ = train(cfg_, matrices_);
}

std::optional<ClassId> OnlineTrainer::online_step(const MessageRecord& msg, long clock) {
  maybe_retrain(clock);
  const auto it = gsn_registry_.find(msg.node_id);
  if (it != gsn_registry_.end()) {
    matrices_.at(it->second).insert(msg.rssi);
    return std::nullopt;
  }
  return current_model().predict(msg.rssi);
}

namespace {

nlohmann::json rows_to_json(const std::vector<std::vector<double>>& rows) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : rows) j.push_back(r);
  return j;
}

std::vector<std::vector<double>> rows_from_json(const nlohmann::json& j) {
  std::vector<std::vector<double>> rows;
  for (const auto& r : j) rows.push_back(r.get<std::vector<double>>());
  return rows;
}

}  // namespace

nlohmann::json TrainedClassifier::to_json() const {
  nlohmann::json j{{"format_version", 1},
                   {"algorithm", to_string(algorithm_)},
                   {"feature_count", feature_count_},
                   {"classes", classes_},
                   {"train_timestamp", train_timestamp_}};
  if (const auto* knn = std::get_if<detail::KnnModel>(&model_)) {
    j["knn"] = {{"k", knn->k}, {"rows", rows_to_json(knn->rows)}, {"labels", knn->labels}};
  } else if (const auto* svm = std::get_if<detail::SvmModel>(&model_)) {
    nlohmann::json machines = nlohmann::json::array();
    for (const auto& bin : svm->machines) {
      machines.push_back({{"pos", bin.pos},
                          {"neg", bin.neg},
                          {"support_vectors", rows_to_json(bin.support_vectors)},
                          {"coef", bin.coef},
                          {"bias", bin.bias}});
    }
    j["svm"] = {{"sigma2", svm->sigma2},
                {"feature_mean", svm->feature_mean},
                {"feature_scale", svm->feature_scale},
                {"machines", std::move(machines)}};
  } else {
    const auto& forest = std::get<detail::ForestModel>(model_);
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& tree : forest.trees) {
      nlohmann::json nodes = nlohmann::json::array();
      for (const auto& n : tree) {
        nodes.push_back({{"f", n.feature},
                         {"t", n.threshold},
                         {"l", n.left},
                         {"r", n.right},
                         {"d", n.class_dist}});
      }
      trees.push_back(std::move(nodes));
    }
    j["forest"] = {{"trees", std::move(trees)}};
  }
  return j;
}

TrainedClassifier TrainedClassifier::from_json(const nlohmann::json& j) {
  if (j.at("format_version").get<int>() != 1) {
    throw std::runtime_error("unsupported model format version");
  }
  TrainedClassifier model;
  model.algorithm_ = algorithm_from_string(j.at("algorithm").get<std::string>());
  model.feature_count_ = j.at("feature_count").get<std::size_t>();
  model.classes_ = j.at("classes").get<std::vector<ClassId>>();
  model.train_timestamp_ = j.value("train_timestamp", std::int64_t{0});
  if (model.algorithm_ == Algorithm::Knn) {
    detail::KnnModel knn;
    knn.k = j.at("knn").at("k").get<int>();
    knn.rows = rows_from_json(j.at("knn").at("rows"));
    knn.labels = j.at("knn").at("labels").get<std::vector<ClassId>>();
    model.model_ = std::move(knn);
  } else if (model.algorithm_ == Algorithm::Svm) {
    detail::SvmModel svm;
    const auto& js = j.at("svm");
    svm.sigma2 = js.at("sigma2").get<double>();
    svm.feature_mean = js.at("feature_mean").get<std::vector<double>>();
    svm.feature_scale = js.at("feature_scale").get<std::vector<double>>();
    for (const auto& jm : js.at("machines")) {
      detail::SvmBinary bin;
      bin.pos = jm.at("pos").get<ClassId>();
      bin.neg = jm.at("neg").get<ClassId>();
      bin.support_vectors = rows_from_json(jm.at("support_vectors"));
      bin.coef = jm.at("coef").get<std::vector<double>>();
      bin.bias = jm.at("bias").get<double>();
      svm.machines.push_back(std::move(bin));
    }
    model.model_ = std::move(svm);
  } else {
    detail::ForestModel forest;
    for (const auto& jt : j.at("forest").at("trees")) {
      std::vector<detail::TreeNode> tree;
      for (const auto& jn : jt) {
        detail::TreeNode n;
        n.feature = jn.at("f").get<int>();
        n.threshold = jn.at("t").get<double>();
        n.left = jn.at("l").get<int>();
        n.right = jn.at("r").get<int>();
        n.class_dist = jn.at("d").get<std::vector<double>>();
        tree.push_back(std::move(n));
      }
      forest.trees.push_back(std::move(tree));
    }
    model.model_ = std::move(forest);
  }
  return model;
}

}  // namespace lrloc
