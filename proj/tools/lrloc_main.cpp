#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lrloc/channel.hpp"
#include "lrloc/classify.hpp"
#include "lrloc/dataset.hpp"
#include "lrloc/evaluate.hpp"
#include "lrloc/geo.hpp"
#include "lrloc/locate.hpp"
#include "lrloc/random.hpp"
#include "lrloc/ranging.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

void write_json_file(const json& j, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

fs::path prepare_out_dir(const std::string& out) {
  fs::path dir(out);
  fs::create_directories(dir);
  return dir;
}

// ---------------------------------------------------------------- simulate

struct SimulateOpts {
  std::string config_path;
  std::string out = "out";
  std::uint64_t seed = 0;
  std::optional<int> classes, bs_count, train_msgs, test_nodes, test_msgs;
  std::optional<double> spacing_d, radius_r, sigma_sh, n_p;
};

int cmd_simulate(const SimulateOpts& o) {
  lrloc::CampaignConfig cfg;
  if (!o.config_path.empty()) {
    cfg = lrloc::CampaignConfig::from_json(read_json_file(o.config_path));
  }
  if (o.classes) cfg.class_count = *o.classes;
  if (o.bs_count) cfg.bs_count = *o.bs_count;
  if (o.train_msgs) cfg.train_msgs_per_class = *o.train_msgs;
  if (o.test_nodes) cfg.test_nodes_per_class = *o.test_nodes;
  if (o.test_msgs) cfg.test_msgs_per_node = *o.test_msgs;
  if (o.spacing_d) cfg.spacing_d = *o.spacing_d;
  if (o.radius_r) cfg.radius_r = *o.radius_r;
  if (o.sigma_sh) cfg.channel.sigma_sh = *o.sigma_sh;
  if (o.n_p) cfg.channel.n_p = *o.n_p;

  const auto campaign = lrloc::make_campaign(cfg, o.seed);
  const fs::path dir = prepare_out_dir(o.out);
  lrloc::write_messages_file(campaign.messages, (dir / "campaign.csv").string());
  write_json_file(campaign.partition.to_json(), dir / "partition.json");
  json echo = cfg.to_json();
  echo["seed"] = o.seed;
  write_json_file(echo, dir / "config.json");
  std::cout << "wrote " << campaign.messages.records.size() << " records, "
            << campaign.partition.class_count() << " classes, "
            << campaign.messages.bs_ids.size() << " base stations to " << dir.string()
            << "\n";
  return 0;
}

// ------------------------------------------------------------------ ingest

int cmd_ingest(const std::string& data, const std::string& partition_path,
               const std::string& out) {
  const auto ms = lrloc::load_messages_file(data);
  const fs::path dir = prepare_out_dir(out);
  lrloc::write_messages_file(ms, (dir / "messages.csv").string());

  std::size_t missing = 0, cells = 0;
  std::map<std::string, int> per_node;
  for (const auto& rec : ms.records) {
    ++per_node[rec.node_id];
    for (double v : rec.rssi) {
      ++cells;
      if (lrloc::is_missing(v)) ++missing;
    }
  }
  json report{{"records", ms.records.size()},
              {"nodes", per_node.size()},
              {"base_stations", ms.bs_ids},
              {"missing_fraction", cells ? double(missing) / double(cells) : 0.0}};
  if (!partition_path.empty()) {
    const auto part = lrloc::ClassPartition::from_json(read_json_file(partition_path));
    std::map<std::string, std::size_t> zone_counts;
    for (const auto& rec : ms.records) {
      if (!rec.position) {
        ++zone_counts["unpositioned"];
        continue;
      }
      const auto cls =
          lrloc::assign_class(part, lrloc::project(part.origin(), *rec.position));
      if (cls) {
        ++zone_counts["class_" + std::to_string(*cls)];
      } else {
        ++zone_counts["gap"];
      }
    }
    report["zone_counts"] = zone_counts;
  }
  write_json_file(report, dir / "ingest_report.json");
  std::cout << "ingested " << ms.records.size() << " records from " << per_node.size()
            << " nodes (" << ms.bs_ids.size() << " base stations)\n";
  return 0;
}

// ------------------------------------------------------------------- train

struct TrainOpts {
  std::string data, partition_path, out = "out";
  std::string algorithm = "rndf";
  std::uint64_t seed = 0;
  int k = 11;
  double sigma2 = 0.0;
  int trees = 100;
  int train_msgs = 40;  // ring-buffer depth T
  int avg_k = 1;
  int features = 0;  // 0 keeps all base stations
  double anchor_radius = 100.0;
};

int cmd_train(const TrainOpts& o) {
  const auto ms = lrloc::load_messages_file(o.data);
  const auto part = lrloc::ClassPartition::from_json(read_json_file(o.partition_path));
  auto split = lrloc::anchor_split(ms, part, o.anchor_radius, o.seed);
  if (o.features > 0) {
    auto [tr, te] = lrloc::select_features(split.train, split.test, o.features);
    split.train = std::move(tr);
    split.test = std::move(te);
  }

  std::map<std::string, lrloc::ClassId> labels;
  for (std::size_t i = 0; i < split.train.records.size(); ++i) {
    labels[split.train.records[i].node_id] = split.train_labels[i];
  }
  auto matrices = lrloc::build_fingerprints(split.train, labels, o.train_msgs);
  if (o.avg_k > 1) {
    for (auto& [cls, fm] : matrices) fm = lrloc::average_k(fm, o.avg_k);
  }

  lrloc::TrainConfig cfg;
  cfg.algorithm = lrloc::algorithm_from_string(o.algorithm);
  cfg.knn.k = o.k;
  cfg.svm.sigma2 = o.sigma2;
  cfg.forest.n_trees = o.trees;
  cfg.forest.rng_seed = o.seed;

  const auto t0 = std::chrono::steady_clock::now();
  const auto model = lrloc::train(cfg, matrices);
  const double train_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();

  std::size_t hits = 0, total = 0;
  for (const auto& [cls, fm] : matrices) {
    for (const auto& row : fm.snapshot()) {
      hits += model.predict(row) == cls;
      ++total;
    }
  }

  const std::size_t m = model.feature_count();
  const double sigma2_effective = o.sigma2 > 0.0 ? o.sigma2 : double(m) / 2.0;
  const fs::path dir = prepare_out_dir(o.out);
  write_json_file(model.to_json(), dir / "model.json");
  json report{{"algorithm", lrloc::to_string(cfg.algorithm)},
              {"accuracy_on_train", total ? double(hits) / double(total) : 0.0},
              {"train_time_ms", train_ms},
              {"M", m},
              {"L", model.class_count()},
              {"T", o.train_msgs},
              {"k", o.k},
              {"sigma2", sigma2_effective},
              {"trees", o.trees},
              {"avg_k", o.avg_k},
              {"features", o.features},
              {"anchor_radius_m", o.anchor_radius},
              {"seed", o.seed}};
  write_json_file(report, dir / "train_report.json");
  std::cout << "trained " << lrloc::to_string(cfg.algorithm) << " on "
            << model.class_count() << " classes x " << m << " features, "
            << "train accuracy " << (total ? double(hits) / double(total) : 0.0)
            << ", " << train_ms << " ms\n";
  return 0;
}

// ---------------------------------------------------------------- localize

std::map<std::string, std::map<lrloc::ClassId, double>> load_d2d(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  if (line != "node_id,anchor_class_id,rssi_dbm") {
    throw std::runtime_error(path + ": expected header node_id,anchor_class_id,rssi_dbm");
  }
  std::map<std::string, std::map<lrloc::ClassId, double>> readings;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string node, cls_s, rssi_s;
    if (!std::getline(ss, node, ',') || !std::getline(ss, cls_s, ',') ||
        !std::getline(ss, rssi_s, ',')) {
      throw std::runtime_error(path + ": malformed row " + std::to_string(row));
    }
    readings[node][std::stoi(cls_s)] = std::stod(rssi_s);
  }
  return readings;
}

std::vector<lrloc::Anchor> load_anchors(const std::string& path,
                                        const lrloc::ClassPartition& part) {
  const json j = read_json_file(path);
  std::vector<lrloc::Anchor> anchors;
  for (const auto& a : j.at("anchors")) {
    lrloc::Anchor anchor{a.at("class_id").get<lrloc::ClassId>(),
                         part.center(a.at("class_id").get<lrloc::ClassId>()),
                         lrloc::RangingCurve::from_json(a.at("curve"))};
    if (a.contains("position")) {
      anchor.position = {a["position"].at("x_m").get<double>(),
                         a["position"].at("y_m").get<double>()};
    }
    anchors.push_back(std::move(anchor));
  }
  return anchors;
}

struct LocalizeOpts {
  std::string model_path, partition_path, data, out = "out";
  std::string anchors_path, d2d_path;
  double threshold = lrloc::kDefaultD2dThresholdDbm;
};

int cmd_localize(const LocalizeOpts& o) {
  const auto model = lrloc::TrainedClassifier::from_json(read_json_file(o.model_path));
  const auto part = lrloc::ClassPartition::from_json(read_json_file(o.partition_path));
  const auto ms = lrloc::load_messages_file(o.data);

  std::vector<lrloc::Anchor> anchors;
  std::map<std::string, std::map<lrloc::ClassId, double>> d2d;
  if (!o.d2d_path.empty()) {
    if (o.anchors_path.empty()) {
      throw std::runtime_error("--d2d requires --anchors (ranging curves)");
    }
    d2d = load_d2d(o.d2d_path);
  }
  if (!o.anchors_path.empty()) anchors = load_anchors(o.anchors_path, part);

  const fs::path dir = prepare_out_dir(o.out);
  std::ofstream results(dir / "results.jsonl");
  if (!results) throw std::runtime_error("cannot write results.jsonl");

  int class_only = 0, refined = 0;
  for (const auto& rec : ms.records) {
    std::vector<double> row = rec.rssi;
    for (double& v : row) {
      if (lrloc::is_missing(v)) v = lrloc::kMissingFill;
    }
    const auto it = d2d.find(rec.node_id);
    const auto res =
        lrloc::localize(row, model, part, anchors,
                        it == d2d.end() ? std::map<lrloc::ClassId, double>{} : it->second,
                        o.threshold);
    (res.mode == lrloc::LocMode::Refined ? refined : class_only) += 1;
    const auto geo = lrloc::unproject(part.origin(), res.position);
    results << json{{"node_id", rec.node_id},
                    {"t", rec.time_index},
                    {"mode", res.mode == lrloc::LocMode::Refined ? "refined" : "class_only"},
                    {"class_id", res.class_id},
                    {"x_m", res.position.x},
                    {"y_m", res.position.y},
                    {"lat", geo.lat},
                    {"lon", geo.lon},
                    {"anchors_used", res.anchors_used}}
                   .dump()
            << "\n";
  }
  json summary{{"messages", ms.records.size()},
               {"class_only", class_only},
               {"refined", refined},
               {"d2d_threshold_dbm", o.threshold}};
  write_json_file(summary, dir / "summary.json");
  std::cout << "localized " << ms.records.size() << " messages: " << refined
            << " refined, " << class_only << " class-only\n";
  return 0;
}

// ------------------------------------------------------------------- sweep

struct SweepOpts {
  std::string kind = "features";
  std::string config_path;
  std::string out = "out";
  std::uint64_t seed = 0;
  int n_seeds = 1;
  std::vector<double> x_values;
  std::vector<std::string> algorithms{"knn", "svm", "rndf"};
  std::optional<int> classes, bs_count, train_msgs;
  std::optional<double> spacing_d, radius_r, sigma_sh;
  int trees = 100;
  int k = 11;
  double sigma2 = 0.0;
};

void print_sweep_table(const lrloc::SweepResult& res) {
  std::cout << std::left << std::setw(10) << "x";
  for (const auto& s : res.series) {
    std::cout << std::setw(12) << lrloc::to_string(s.algorithm);
  }
  std::cout << "\n";
  for (std::size_t i = 0; i < res.x_values.size(); ++i) {
    std::cout << std::setw(10) << res.x_values[i];
    for (const auto& s : res.series) {
      std::cout << std::setw(12) << std::setprecision(4) << s.mean_accuracy[i];
    }
    std::cout << "\n";
  }
}

int cmd_sweep(const SweepOpts& o) {
  if (o.x_values.empty()) throw std::runtime_error("--x requires at least one value");
  lrloc::CampaignConfig cfg;
  if (!o.config_path.empty()) {
    cfg = lrloc::CampaignConfig::from_json(read_json_file(o.config_path));
  }
  if (o.classes) cfg.class_count = *o.classes;
  if (o.bs_count) cfg.bs_count = *o.bs_count;
  if (o.train_msgs) cfg.train_msgs_per_class = *o.train_msgs;
  if (o.spacing_d) cfg.spacing_d = *o.spacing_d;
  if (o.radius_r) cfg.radius_r = *o.radius_r;
  if (o.sigma_sh) cfg.channel.sigma_sh = *o.sigma_sh;

  std::vector<lrloc::TrainConfig> algs;
  for (const auto& name : o.algorithms) {
    lrloc::TrainConfig tc;
    tc.algorithm = lrloc::algorithm_from_string(name);
    tc.knn.k = o.k;
    tc.svm.sigma2 = o.sigma2;
    tc.forest.n_trees = o.trees;
    algs.push_back(tc);
  }
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < o.n_seeds; ++i) seeds.push_back(lrloc::derive_seed(o.seed, i));

  const auto kind = lrloc::sweep_kind_from_string(o.kind);
  const auto res = lrloc::run_sweep(kind, cfg, o.x_values, algs, seeds);

  const fs::path dir = prepare_out_dir(o.out);
  {
    std::ofstream csv(dir / "sweep.csv");
    csv << res.to_csv();
  }
  json echo = cfg.to_json();
  echo["seed"] = o.seed;
  echo["n_seeds"] = o.n_seeds;
  write_json_file(json{{"config", echo}, {"result", res.to_json()}}, dir / "sweep.json");
  print_sweep_table(res);
  return 0;
}

// ------------------------------------------------------------------ report

int cmd_report(const std::string& sweep_path, const std::string& errors_path,
               const std::string& out) {
  if (sweep_path.empty() && errors_path.empty()) {
    throw std::runtime_error("report needs --sweep and/or --errors");
  }
  if (!sweep_path.empty()) {
    const json j = read_json_file(sweep_path);
    const json& r = j.contains("result") ? j["result"] : j;
    std::cout << "sweep kind: " << r.at("kind").get<std::string>() << "\n";
    std::cout << std::left << std::setw(10) << "x";
    for (const auto& s : r.at("series")) {
      std::cout << std::setw(12) << s.at("algorithm").get<std::string>();
    }
    std::cout << "\n";
    const auto& xs = r.at("x_values");
    for (std::size_t i = 0; i < xs.size(); ++i) {
      std::cout << std::setw(10) << xs[i].get<double>();
      for (const auto& s : r.at("series")) {
        std::cout << std::setw(12) << std::setprecision(4)
                  << s.at("mean_accuracy")[i].get<double>();
      }
      std::cout << "\n";
    }
  }
  if (!errors_path.empty()) {
    std::ifstream in(errors_path);
    if (!in) throw std::runtime_error("cannot open " + errors_path);
    std::vector<double> errors;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line == "error_m") continue;
      errors.push_back(std::stod(line));
    }
    const auto cdf = lrloc::error_cdf(errors);
    const fs::path dir = prepare_out_dir(out);
    std::ofstream csv(dir / "cdf.csv");
    csv << "error_m,fraction\n";
    for (const auto& [e, f] : cdf) csv << e << "," << f << "\n";
    std::cout << "wrote " << cdf.size() << " cdf steps for " << errors.size()
              << " errors\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RSSI fingerprinting localization toolkit"};
  app.require_subcommand(1);

  SimulateOpts sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic campaign");
  simulate->add_option("--config", sim.config_path, "campaign config JSON");
  simulate->add_option("--out", sim.out, "output directory");
  simulate->add_option("--seed", sim.seed, "root RNG seed")->required();
  simulate->add_option("--classes", sim.classes, "number of classes L");
  simulate->add_option("--spacing-d", sim.spacing_d, "center spacing D, meters");
  simulate->add_option("--radius-r", sim.radius_r, "class radius r, meters");
  simulate->add_option("--bs-count", sim.bs_count, "number of base stations");
  simulate->add_option("--train-msgs", sim.train_msgs, "anchor messages per class");
  simulate->add_option("--test-nodes", sim.test_nodes, "test nodes per class");
  simulate->add_option("--test-msgs", sim.test_msgs, "messages per test node");
  simulate->add_option("--sigma-sh", sim.sigma_sh, "shadowing std-dev, dB");
  simulate->add_option("--n-p", sim.n_p, "path-loss exponent");

  std::string ingest_data, ingest_partition, ingest_out = "out";
  auto* ingest = app.add_subcommand("ingest", "Validate and normalize a campaign CSV");
  ingest->add_option("--data", ingest_data, "campaign CSV")->required();
  ingest->add_option("--partition", ingest_partition, "partition JSON for zone counts");
  ingest->add_option("--out", ingest_out, "output directory");

  TrainOpts tr;
  auto* train = app.add_subcommand("train", "Fit a fingerprint classifier");
  train->add_option("--data", tr.data, "campaign CSV")->required();
  train->add_option("--partition", tr.partition_path, "partition JSON")->required();
  train->add_option("--out", tr.out, "output directory");
  train->add_option("--seed", tr.seed, "root RNG seed")->required();
  train->add_option("--algorithm", tr.algorithm, "knn | svm | rndf");
  train->add_option("--k", tr.k, "kNN neighbor count");
  train->add_option("--sigma2", tr.sigma2, "RBF kernel width (default M/2)");
  train->add_option("--trees", tr.trees, "forest size");
  train->add_option("--train-msgs", tr.train_msgs, "fingerprint rows per class T");
  train->add_option("--avg-k", tr.avg_k, "average groups of k fingerprint rows");
  train->add_option("--features", tr.features, "keep the M' best-covered columns");
  train->add_option("--anchor-radius", tr.anchor_radius,
                    "anchor-to-center distance cutoff, meters");

  LocalizeOpts loc;
  auto* localize = app.add_subcommand("localize", "Two-step localization");
  localize->add_option("--model", loc.model_path, "model JSON")->required();
  localize->add_option("--partition", loc.partition_path, "partition JSON")->required();
  localize->add_option("--data", loc.data, "SN messages CSV")->required();
  localize->add_option("--out", loc.out, "output directory");
  localize->add_option("--anchors", loc.anchors_path, "anchor + ranging-curve JSON");
  localize->add_option("--d2d", loc.d2d_path, "device-to-device readings CSV");
  localize->add_option("--threshold", loc.threshold, "D2D in-range threshold, dBm");

  SweepOpts sw;
  auto* sweep = app.add_subcommand("sweep", "Parameter sweep over synthetic campaigns");
  sweep->add_option("--kind", sw.kind,
                    "features | trainsize | spacing | sigma2 | averaging | classcount");
  sweep->add_option("--x", sw.x_values, "swept values")->delimiter(',')->required();
  sweep->add_option("--config", sw.config_path, "campaign config JSON");
  sweep->add_option("--out", sw.out, "output directory");
  sweep->add_option("--seed", sw.seed, "root RNG seed")->required();
  sweep->add_option("--seeds", sw.n_seeds, "number of derived seeds to average");
  sweep->add_option("--algorithms", sw.algorithms, "algorithms to compare")
      ->delimiter(',');
  sweep->add_option("--classes", sw.classes, "number of classes L");
  sweep->add_option("--spacing-d", sw.spacing_d, "center spacing D, meters");
  sweep->add_option("--radius-r", sw.radius_r, "class radius r, meters");
  sweep->add_option("--bs-count", sw.bs_count, "number of base stations");
  sweep->add_option("--train-msgs", sw.train_msgs, "anchor messages per class");
  sweep->add_option("--sigma-sh", sw.sigma_sh, "shadowing std-dev, dB");
  sweep->add_option("--trees", sw.trees, "forest size");
  sweep->add_option("--k", sw.k, "kNN neighbor count");
  sweep->add_option("--sigma2", sw.sigma2, "RBF kernel width (default M/2)");

  std::string rep_sweep, rep_errors, rep_out = "out";
  auto* report = app.add_subcommand("report", "Render sweep tables and error CDFs");
  report->add_option("--sweep", rep_sweep, "sweep JSON to print as a table");
  report->add_option("--errors", rep_errors, "per-message error file, one per line");
  report->add_option("--out", rep_out, "output directory for cdf.csv");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return cmd_simulate(sim);
    if (ingest->parsed()) return cmd_ingest(ingest_data, ingest_partition, ingest_out);
    if (train->parsed()) return cmd_train(tr);
    if (localize->parsed()) return cmd_localize(loc);
    if (sweep->parsed()) return cmd_sweep(sw);
    if (report->parsed()) return cmd_report(rep_sweep, rep_errors, rep_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
