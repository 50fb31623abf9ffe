#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lrloc/geo.hpp"

namespace lrloc {

/// RSSI value standing in for "not received". Far below any real reading so
/// distance-based classifiers treat non-reception as strong dissimilarity.
inline constexpr double kMissingFill = -200.0;

inline bool is_missing(double rssi) { return std::isnan(rssi); }
inline double missing_rssi() { return std::numeric_limits<double>::quiet_NaN(); }

/// One uplink message: per-base-station RSSI vector R^(t), NaN where a base
/// station did not receive. Position present only for GPS-enabled senders.
struct MessageRecord {
  int time_index = 0;
  std::string node_id;
  std::optional<GeoPoint> position;
  std::vector<double> rssi;
};

struct MessageSet {
  std::vector<std::string> bs_ids;
  std::vector<MessageRecord> records;

  std::size_t feature_count() const { return bs_ids.size(); }
};

/// Per-class T x M ring buffer of RSSI rows. Inserting past capacity
/// overwrites the oldest row; missing entries are imputed at insert.
class FingerprintMatrix {
 public:
  FingerprintMatrix(ClassId class_id, std::size_t capacity, std::size_t features,
                    double fill = kMissingFill);

  void insert(const std::vector<double>& rssi);

  ClassId class_id() const { return class_id_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t feature_count() const { return features_; }
  std::size_t row_count() const { return std::min<std::size_t>(write_cursor_, capacity_); }
  std::size_t write_cursor() const { return write_cursor_; }

  /// Rows oldest-to-newest in arrival order.
  std::vector<std::vector<double>> snapshot() const;

 private:
  ClassId class_id_;
  std::size_t capacity_;
  std::size_t features_;
  double fill_;
  std::size_t write_cursor_ = 0;
  std::vector<std::vector<double>> rows_;
};

/// Parses the wide campaign CSV: node_id,t,lat,lon,rssi_<bs>... Empty cells
/// and the -200 sentinel become missing.
MessageSet load_messages(std::istream& in);
MessageSet load_messages_file(const std::string& path);

void write_messages(const MessageSet& ms, std::ostream& out);
void write_messages_file(const MessageSet& ms, const std::string& path);

/// Per class, the most recent T messages of its labeled nodes, in time order.
std::map<ClassId, FingerprintMatrix> build_fingerprints(
    const MessageSet& ms, const std::map<std::string, ClassId>& labels,
    std::size_t rows, double fill = kMissingFill);

struct LabeledSplit {
  MessageSet train;
  std::vector<ClassId> train_labels;
  MessageSet test;
  std::vector<ClassId> test_labels;
};

/// Splits a ground-truth campaign: messages within anchor_radius of a class
/// center become training data for that class, other in-class messages become
/// test data, gap messages are dropped. Both sets are balanced per class by
/// seeded down-sampling to the smallest class count.
LabeledSplit anchor_split(const MessageSet& ms, const ClassPartition& part,
                          double anchor_radius, std::uint64_t seed = 0);

/// Replaces consecutive groups of k rows by their per-column mean; a trailing
/// partial group is dropped.
FingerprintMatrix average_k(const FingerprintMatrix& fm, std::size_t k);

/// Keeps the m_prime base-station columns with the highest non-missing count
/// in the training set; the same columns are applied to the test set.
std::pair<MessageSet, MessageSet> select_features(const MessageSet& train,
                                                  const MessageSet& test,
                                                  std::size_t m_prime);

}  // namespace lrloc
