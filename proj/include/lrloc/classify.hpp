#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lrloc/dataset.hpp"
#include "lrloc/geo.hpp"

namespace lrloc {

enum class Algorithm { Knn, Svm, RandomForest };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

struct KnnConfig {
  int k = 11;
};

struct SvmConfig {
  double sigma2 = 0.0;    // <= 0: use the adaptive default M/2
  double c_penalty = 1.0;
  double tol = 1e-3;
  int max_passes = 0;     // <= 0: cap at 10 * n training passes
};

struct ForestConfig {
  int n_trees = 100;
  int max_features = 0;   // <= 0: ceil(sqrt(M)) features per split
  std::uint64_t rng_seed = 0;
};

struct TrainConfig {
  Algorithm algorithm = Algorithm::RandomForest;
  KnnConfig knn;
  SvmConfig svm;
  ForestConfig forest;
};

/// Gaussian RBF similarity: exp(-||a - b||^2 / (2 sigma2)).
double rbf_kernel(std::span<const double> a, std::span<const double> b, double sigma2);

namespace detail {

struct KnnModel {
  int k = 11;
  std::vector<std::vector<double>> rows;
  std::vector<ClassId> labels;
};

struct SvmBinary {
  ClassId pos = 0;  // decision value >= 0 votes for pos (the lower class id)
  ClassId neg = 0;
  std::vector<std::vector<double>> support_vectors;
  std::vector<double> coef;  // alpha_i * y_i per support vector
  double bias = 0.0;
};

struct SvmModel {
  double sigma2 = 1.0;
  std::vector<double> feature_mean;
  std::vector<double> feature_scale;
  std::vector<SvmBinary> machines;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<double> class_dist;  // leaf only, aligned with model classes
};

struct ForestModel {
  std::vector<std::vector<TreeNode>> trees;
};

}  // namespace detail

class TrainedClassifier {
 public:
  ClassId predict(std::span<const double> rssi) const;
  /// Per-class probabilities aligned with classes(); vote fractions for kNN
  /// and SVM, averaged tree distributions for the forest.
  std::vector<double> predict_proba(std::span<const double> rssi) const;

  Algorithm algorithm() const { return algorithm_; }
  std::size_t feature_count() const { return feature_count_; }
  int class_count() const { return static_cast<int>(classes_.size()); }
  const std::vector<ClassId>& classes() const { return classes_; }
  std::int64_t train_timestamp() const { return train_timestamp_; }

  nlohmann::json to_json() const;
  static TrainedClassifier from_json(const nlohmann::json& j);

 private:
  friend TrainedClassifier train_rows(const TrainConfig&,
                                      const std::vector<std::vector<double>>&,
                                      const std::vector<ClassId>&);
  Algorithm algorithm_ = Algorithm::Knn;
  std::size_t feature_count_ = 0;
  std::vector<ClassId> classes_;
  std::int64_t train_timestamp_ = 0;
  std::variant<detail::KnnModel, detail::SvmModel, detail::ForestModel> model_;
};

/// Trains on raw feature rows with one label per row.
TrainedClassifier train_rows(const TrainConfig& cfg,
                             const std::vector<std::vector<double>>& rows,
                             const std::vector<ClassId>& labels);

/// Trains from per-class fingerprint matrices (snapshot rows).
TrainedClassifier train(const TrainConfig& cfg,
                        const std::map<ClassId, FingerprintMatrix>& fingerprints);

/// Distance between the estimated and true class centers; the classification
/// error metric (adjacent-class mistakes cost exactly D).
double class_error(ClassId estimated, ClassId truth, const ClassPartition& part);

/// Periodic retraining loop: GSN messages update their class ring buffer,
/// SN messages are classified with the current model.
class OnlineTrainer {
 public:
  OnlineTrainer(TrainConfig cfg, std::map<std::string, ClassId> gsn_registry,
                std::size_t rows, std::size_t features, long train_period = 3600,
                double fill = kMissingFill);

  /// One online-loop step. Retrains first when clock is a multiple of the
  /// train period; returns a class only for SN messages.
  std::optional<ClassId> online_step(const MessageRecord& msg, long clock);

  const FingerprintMatrix& matrix(ClassId cls) const { return matrices_.at(cls); }
  const TrainedClassifier& current_model() const;
  bool has_model() const { return model_.has_value(); }
  long train_period() const { return train_period_; }

 private:
  void maybe_retrain(long clock);

  TrainConfig cfg_;
  std::map<std::string, ClassId> gsn_registry_;
  std::map<ClassId, FingerprintMatrix> matrices_;
  long train_period_;
  std::optional<TrainedClassifier> model_;
};

}  // namespace lrloc
