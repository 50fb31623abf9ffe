#include "lrloc/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "lrloc/random.hpp"

namespace lrloc {

FingerprintMatrix::FingerprintMatrix(ClassId class_id, std::size_t capacity,
                                     std::size_t features, double fill)
    : class_id_(class_id), capacity_(capacity), features_(features), fill_(fill) {
  if (capacity_ == 0) throw std::invalid_argument("fingerprint capacity must be >= 1");
  if (features_ == 0) throw std::invalid_argument("fingerprint needs >= 1 feature");
}

void FingerprintMatrix::insert(const std::vector<double>& rssi) {
  if (rssi.size() != features_) {
    throw std::invalid_argument("rssi vector length does not match feature count");
  }
  std::vector<double> row(features_);
  for (std::size_t i = 0; i < features_; ++i) {
    row[i] = is_missing(rssi[i]) ? fill_ : rssi[i];
  }
  if (rows_.size() < capacity_) {
    rows_.push_back(std::move(row));
  } else {
    rows_[write_cursor_ % capacity_] = std::move(row);
  }
  ++write_cursor_;
}

std::vector<std::vector<double>> FingerprintMatrix::snapshot() const {
  std::vector<std::vector<double>> out;
  const std::size_t n = row_count();
  out.reserve(n);
  const std::size_t start = write_cursor_ > capacity_ ? write_cursor_ % capacity_ : 0;
  for (std::size_t i = 0; i < n; ++i) out.push_back(rows_[(start + i) % capacity_]);
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_rssi_cell(const std::string& raw, std::size_t row) {
  const std::string cell = trim(raw);
  if (cell.empty()) return missing_rssi();
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(cell, &pos);
  } catch (const std::exception&) {
    throw std::runtime_error("row " + std::to_string(row) + ": non-numeric RSSI '" + cell + "'");
  }
  if (pos != cell.size()) {
    throw std::runtime_error("row " + std::to_string(row) + ": non-numeric RSSI '" + cell + "'");
  }
  if (v <= kMissingFill) return missing_rssi();
  return v;
}

}  // namespace

MessageSet load_messages(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty input: header row required");
  auto header = split_csv_line(line);
  if (header.size() < 5 || trim(header[0]) != "node_id" || trim(header[1]) != "t" ||
      trim(header[2]) != "lat" || trim(header[3]) != "lon") {
    throw std::runtime_error("header must be node_id,t,lat,lon,rssi_<bs>...");
  }
  MessageSet ms;
  for (std::size_t i = 4; i < header.size(); ++i) {
    const std::string col = trim(header[i]);
    if (col.rfind("rssi_", 0) != 0) {
      throw std::runtime_error("unexpected column '" + col + "' (want rssi_<bs_id>)");
    }
    ms.bs_ids.push_back(col.substr(5));
  }
  const std::size_t m = ms.bs_ids.size();
  std::set<std::pair<std::string, int>> seen;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != 4 + m) {
      throw std::runtime_error("row " + std::to_string(row_no) + ": expected " +
                               std::to_string(4 + m) + " cells, got " +
                               std::to_string(cells.size()));
    }
    MessageRecord rec;
    rec.node_id = trim(cells[0]);
    try {
      rec.time_index = std::stoi(trim(cells[1]));
    } catch (const std::exception&) {
      throw std::runtime_error("row " + std::to_string(row_no) + ": bad time index");
    }
    if (!seen.insert({rec.node_id, rec.time_index}).second) {
      throw std::runtime_error("row " + std::to_string(row_no) + ": duplicate (node_id, t) = (" +
                               rec.node_id + ", " + std::to_string(rec.time_index) + ")");
    }
    const std::string lat = trim(cells[2]);
    const std::string lon = trim(cells[3]);
    if (!lat.empty() && !lon.empty()) {
      rec.position = GeoPoint{std::stod(lat), std::stod(lon)};
    }
    rec.rssi.reserve(m);
    for (std::size_t i = 0; i < m; ++i) rec.rssi.push_back(parse_rssi_cell(cells[4 + i], row_no));
    ms.records.push_back(std::move(rec));
  }
  return ms;
}

MessageSet load_messages_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_messages(in);
}

void write_messages(const MessageSet& ms, std::ostream& out) {
  out << "node_id,t,lat,lon";
  for (const auto& bs : ms.bs_ids) out << ",rssi_" << bs;
  out << "\n";
  out << std::setprecision(10);
  for (const auto& rec : ms.records) {
    out << rec.node_id << "," << rec.time_index << ",";
    if (rec.position) out << rec.position->lat;
    out << ",";
    if (rec.position) out << rec.position->lon;
    for (double v : rec.rssi) {
      out << ",";
      if (!is_missing(v)) out << v;
    }
    out << "\n";
  }
}

void write_messages_file(const MessageSet& ms, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_messages(ms, out);
}

std::map<ClassId, FingerprintMatrix> build_fingerprints(
    const MessageSet& ms, const std::map<std::string, ClassId>& labels,
    std::size_t rows, double fill) {
  std::map<ClassId, FingerprintMatrix> out;
  for (const auto& [node, cls] : labels) {
    (void)node;
    out.try_emplace(cls, cls, rows, ms.feature_count(), fill);
  }
  // Stable time order across nodes of the same class.
  std::vector<const MessageRecord*> ordered;
  ordered.reserve(ms.records.size());
  for (const auto& rec : ms.records) ordered.push_back(&rec);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const MessageRecord* a, const MessageRecord* b) {
                     return a->time_index < b->time_index;
                   });
  for (const MessageRecord* rec : ordered) {
    auto it = labels.find(rec->node_id);
    if (it == labels.end()) continue;
    out.at(it->second).insert(rec->rssi);
  }
  for (const auto& [cls, fm] : out) {
    if (fm.row_count() == 0) {
      throw std::runtime_error("class " + std::to_string(cls) + " has no messages");
    }
  }
  return out;
}

LabeledSplit anchor_split(const MessageSet& ms, const ClassPartition& part,
                          double anchor_radius, std::uint64_t seed) {
  const int l = part.class_count();
  std::vector<std::vector<std::size_t>> train_by_class(l), test_by_class(l);
  for (std::size_t i = 0; i < ms.records.size(); ++i) {
    const auto& rec = ms.records[i];
    if (!rec.position) {
      throw std::runtime_error("anchor_split requires ground-truth positions (node " +
                               rec.node_id + ")");
    }
    const PlanarPoint p = project(part.origin(), *rec.position);
    ClassId nearest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (ClassId c = 0; c < l; ++c) {
      const double d = distance(part.center(c), p);
      if (d < best) {
        best = d;
        nearest = c;
      }
    }
    if (best <= anchor_radius) {
      train_by_class[nearest].push_back(i);
    } else if (best <= part.radius_r()) {
      test_by_class[nearest].push_back(i);
    }
    // else: gap message, dropped
  }
  for (ClassId c = 0; c < l; ++c) {
    if (train_by_class[c].empty()) {
      throw std::runtime_error("class " + std::to_string(c) + " has no anchor messages");
    }
  }

  auto balance = [&](std::vector<std::vector<std::size_t>>& groups, std::uint64_t stream) {
    std::size_t floor = std::numeric_limits<std::size_t>::max();
    bool any = false;
    for (const auto& g : groups) {
      if (!g.empty()) {
        floor = std::min(floor, g.size());
        any = true;
      }
    }
    if (!any) return;
    auto rng = make_rng(seed, stream);
    for (auto& g : groups) {
      if (g.size() <= floor) continue;
      std::shuffle(g.begin(), g.end(), rng);
      g.resize(floor);
      std::sort(g.begin(), g.end());
    }
  };
  balance(train_by_class, 1);
  balance(test_by_class, 2);

  LabeledSplit out;
  out.train.bs_ids = ms.bs_ids;
  out.test.bs_ids = ms.bs_ids;
  for (ClassId c = 0; c < l; ++c) {
    for (std::size_t i : train_by_class[c]) {
      out.train.records.push_back(ms.records[i]);
      out.train_labels.push_back(c);
    }
    for (std::size_t i : test_by_class[c]) {
      out.test.records.push_back(ms.records[i]);
      out.test_labels.push_back(c);
    }
  }
  return out;
}

FingerprintMatrix average_k(const FingerprintMatrix& fm, std::size_t k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (k > fm.row_count()) throw std::invalid_argument("k exceeds row count");
  const auto rows = fm.snapshot();
  const std::size_t groups = rows.size() / k;
  FingerprintMatrix out(fm.class_id(), std::max<std::size_t>(groups, 1),
                        fm.feature_count());
  for (std::size_t g = 0; g < groups; ++g) {
    std::vector<double> mean(fm.feature_count(), 0.0);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += rows[g * k + i][j];
    }
    for (double& v : mean) v /= static_cast<double>(k);
    out.insert(mean);
  }
  return out;
}

std::pair<MessageSet, MessageSet> select_features(const MessageSet& train,
                                                  const MessageSet& test,
                                                  std::size_t m_prime) {
  const std::size_t m = train.feature_count();
  if (m_prime < 1 || m_prime > m) throw std::invalid_argument("m_prime out of [1, M]");
  if (test.feature_count() != m) throw std::invalid_argument("train/test feature mismatch");
  std::vector<std::size_t> heard(m, 0);
  for (const auto& rec : train.records) {
    for (std::size_t j = 0; j < m; ++j) {
      if (!is_missing(rec.rssi[j])) ++heard[j];
    }
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return heard[a] > heard[b]; });
  order.resize(m_prime);
  std::sort(order.begin(), order.end());  // keep original column order

  auto reduce = [&](const MessageSet& in) {
    MessageSet out;
    for (std::size_t j : order) out.bs_ids.push_back(in.bs_ids[j]);
    out.records.reserve(in.records.size());
    for (const auto& rec : in.records) {
      MessageRecord r = rec;
      r.rssi.clear();
      for (std::size_t j : order) r.rssi.push_back(rec.rssi[j]);
      out.records.push_back(std::move(r));
    }
    return out;
  };
  return {reduce(train), reduce(test)};
}

}  // namespace lrloc
