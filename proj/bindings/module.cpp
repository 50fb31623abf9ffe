#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "lrloc/channel.hpp"
#include "lrloc/classify.hpp"
#include "lrloc/dataset.hpp"
#include "lrloc/evaluate.hpp"
#include "lrloc/geo.hpp"
#include "lrloc/locate.hpp"
#include "lrloc/random.hpp"
#include "lrloc/ranging.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

lrloc::TrainConfig make_train_config(const std::string& algorithm, int k, double sigma2,
                                     int trees, std::uint64_t seed) {
  lrloc::TrainConfig cfg;
  cfg.algorithm = lrloc::algorithm_from_string(algorithm);
  cfg.knn.k = k;
  cfg.svm.sigma2 = sigma2;
  cfg.forest.n_trees = trees;
  cfg.forest.rng_seed = seed;
  return cfg;
}

std::vector<lrloc::RangingSample> to_samples(
    const std::vector<std::pair<double, double>>& pairs) {
  std::vector<lrloc::RangingSample> s;
  s.reserve(pairs.size());
  for (const auto& [d, rssi] : pairs) s.push_back({d, rssi});
  return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "RSSI fingerprinting localization core";

  py::class_<lrloc::GeoPoint>(m, "GeoPoint")
      .def(py::init<double, double>(), py::arg("lat"), py::arg("lon"))
      .def_readwrite("lat", &lrloc::GeoPoint::lat)
      .def_readwrite("lon", &lrloc::GeoPoint::lon)
      .def("__repr__", [](const lrloc::GeoPoint& p) {
        return "GeoPoint(lat=" + std::to_string(p.lat) + ", lon=" + std::to_string(p.lon) +
               ")";
      });

  py::class_<lrloc::PlanarPoint>(m, "PlanarPoint")
      .def(py::init<double, double>(), py::arg("x"), py::arg("y"))
      .def_readwrite("x", &lrloc::PlanarPoint::x)
      .def_readwrite("y", &lrloc::PlanarPoint::y)
      .def("__repr__", [](const lrloc::PlanarPoint& p) {
        return "PlanarPoint(x=" + std::to_string(p.x) + ", y=" + std::to_string(p.y) + ")";
      });

  m.def("distance", py::overload_cast<lrloc::PlanarPoint, lrloc::PlanarPoint>(
                        &lrloc::distance),
        py::arg("a"), py::arg("b"));
  m.def("project", &lrloc::project, py::arg("origin"), py::arg("p"));
  m.def("unproject", &lrloc::unproject, py::arg("origin"), py::arg("p"));

  py::class_<lrloc::ClassPartition>(m, "ClassPartition")
      .def_property_readonly("origin", &lrloc::ClassPartition::origin)
      .def_property_readonly("centers", &lrloc::ClassPartition::centers)
      .def("center", &lrloc::ClassPartition::center, py::arg("class_id"))
      .def_property_readonly("class_count", &lrloc::ClassPartition::class_count)
      .def_property_readonly("spacing_d", &lrloc::ClassPartition::spacing_d)
      .def_property_readonly("radius_r", &lrloc::ClassPartition::radius_r)
      .def_property_readonly("gap_x", &lrloc::ClassPartition::gap_x)
      .def("to_json", [](const lrloc::ClassPartition& p) { return p.to_json().dump(); })
      .def_static("from_json", [](const std::string& s) {
        return lrloc::ClassPartition::from_json(json::parse(s));
      });

  m.def("make_partition", &lrloc::make_partition, py::arg("origin"),
        py::arg("class_count"), py::arg("spacing_d"), py::arg("radius_r"));
  m.def("assign_class", &lrloc::assign_class, py::arg("partition"), py::arg("p"));

  py::class_<lrloc::ChannelModel>(m, "ChannelModel")
      .def(py::init<>())
      .def_readwrite("pl0_db", &lrloc::ChannelModel::pl0_db)
      .def_readwrite("d0", &lrloc::ChannelModel::d0)
      .def_readwrite("n_p", &lrloc::ChannelModel::n_p)
      .def_readwrite("sigma_sh", &lrloc::ChannelModel::sigma_sh)
      .def_readwrite("rssi_floor", &lrloc::ChannelModel::rssi_floor)
      .def_readwrite("rng_seed", &lrloc::ChannelModel::rng_seed);

  m.def("rssi_mean", &lrloc::rssi_mean, py::arg("model"), py::arg("tx_dbm"),
        py::arg("d"));
  m.def(
      "crlb_toa",
      [](double snr, double beta_hz) { return lrloc::crlb_toa({snr, beta_hz}); },
      py::arg("snr"), py::arg("beta_hz"));
  m.def("crlb_rssi", &lrloc::crlb_rssi, py::arg("sigma_sh"), py::arg("n_p"),
        py::arg("d"));

  m.def(
      "rbf_kernel",
      [](const std::vector<double>& a, const std::vector<double>& b, double sigma2) {
        return lrloc::rbf_kernel(a, b, sigma2);
      },
      py::arg("a"), py::arg("b"), py::arg("sigma2"));

  py::class_<lrloc::TrainedClassifier>(m, "TrainedClassifier")
      .def("predict",
           [](const lrloc::TrainedClassifier& c, const std::vector<double>& row) {
             return c.predict(row);
           })
      .def("predict_proba",
           [](const lrloc::TrainedClassifier& c, const std::vector<double>& row) {
             return c.predict_proba(row);
           })
      .def_property_readonly("algorithm",
                             [](const lrloc::TrainedClassifier& c) {
                               return lrloc::to_string(c.algorithm());
                             })
      .def_property_readonly("feature_count", &lrloc::TrainedClassifier::feature_count)
      .def_property_readonly("classes", &lrloc::TrainedClassifier::classes)
      .def("to_json", [](const lrloc::TrainedClassifier& c) { return c.to_json().dump(); })
      .def_static("from_json", [](const std::string& s) {
        return lrloc::TrainedClassifier::from_json(json::parse(s));
      });

  m.def(
      "train",
      [](const std::string& algorithm, const std::vector<std::vector<double>>& rows,
         const std::vector<lrloc::ClassId>& labels, int k, double sigma2, int trees,
         std::uint64_t seed) {
        return lrloc::train_rows(make_train_config(algorithm, k, sigma2, trees, seed),
                                 rows, labels);
      },
      py::arg("algorithm"), py::arg("rows"), py::arg("labels"), py::arg("k") = 11,
      py::arg("sigma2") = 0.0, py::arg("trees") = 100, py::arg("seed") = 0);

  py::class_<lrloc::RangingCurve>(m, "RangingCurve")
      .def_property_readonly("kind",
                             [](const lrloc::RangingCurve& c) {
                               return c.kind() == lrloc::CurveKind::Polynomial
                                          ? "polynomial"
                                          : "power_series";
                             })
      .def_property_readonly("coefficients", &lrloc::RangingCurve::coefficients)
      .def_property_readonly("domain_min", &lrloc::RangingCurve::domain_min)
      .def_property_readonly("domain_max", &lrloc::RangingCurve::domain_max)
      .def_property_readonly("residual_rmse", &lrloc::RangingCurve::residual_rmse)
      .def("rssi_at", &lrloc::RangingCurve::rssi_at, py::arg("d"))
      .def("distance_at", &lrloc::RangingCurve::distance_at, py::arg("rssi"))
      .def("to_json", [](const lrloc::RangingCurve& c) { return c.to_json().dump(); })
      .def_static("from_json", [](const std::string& s) {
        return lrloc::RangingCurve::from_json(json::parse(s));
      });

  m.def(
      "fit_polynomial",
      [](const std::vector<std::pair<double, double>>& samples, int degree) {
        return lrloc::fit_polynomial(to_samples(samples), degree);
      },
      py::arg("samples"), py::arg("degree"),
      "samples are (distance_m, rssi_dbm) pairs");
  m.def(
      "fit_power",
      [](const std::vector<std::pair<double, double>>& samples) {
        return lrloc::fit_power(to_samples(samples));
      },
      py::arg("samples"), "samples are (distance_m, rssi_dbm) pairs");
  m.def("invert_distance", &lrloc::invert_distance, py::arg("curve"), py::arg("rssi"));

  py::class_<lrloc::Anchor>(m, "Anchor")
      .def(py::init<lrloc::ClassId, lrloc::PlanarPoint, lrloc::RangingCurve>(),
           py::arg("class_id"), py::arg("position"), py::arg("curve"))
      .def_readwrite("class_id", &lrloc::Anchor::class_id)
      .def_readwrite("position", &lrloc::Anchor::position)
      .def_readonly("curve", &lrloc::Anchor::curve);

  py::class_<lrloc::LocalizationResult>(m, "LocalizationResult")
      .def_property_readonly("mode",
                             [](const lrloc::LocalizationResult& r) {
                               return r.mode == lrloc::LocMode::Refined ? "refined"
                                                                        : "class_only";
                             })
      .def_readonly("class_id", &lrloc::LocalizationResult::class_id)
      .def_readonly("position", &lrloc::LocalizationResult::position)
      .def_readonly("anchors_used", &lrloc::LocalizationResult::anchors_used)
      .def_readonly("per_anchor_distances",
                    &lrloc::LocalizationResult::per_anchor_distances);

  m.def(
      "multilaterate",
      [](const std::vector<std::pair<double, double>>& anchors,
         const std::vector<double>& distances) {
        std::vector<lrloc::PlanarPoint> pts;
        for (const auto& [x, y] : anchors) pts.push_back({x, y});
        const auto p = lrloc::multilaterate(pts, distances);
        return std::make_pair(p.x, p.y);
      },
      py::arg("anchors"), py::arg("distances"));
  m.def("localize", &lrloc::localize, py::arg("sn_rssi"), py::arg("class_model"),
        py::arg("partition"), py::arg("anchors"), py::arg("d2d_readings"),
        py::arg("threshold_dbm") = lrloc::kDefaultD2dThresholdDbm);

  m.def("error_cdf", &lrloc::error_cdf, py::arg("errors"));

  py::class_<lrloc::CampaignConfig>(m, "CampaignConfig")
      .def(py::init<>())
      .def_readwrite("class_count", &lrloc::CampaignConfig::class_count)
      .def_readwrite("spacing_d", &lrloc::CampaignConfig::spacing_d)
      .def_readwrite("radius_r", &lrloc::CampaignConfig::radius_r)
      .def_readwrite("bs_count", &lrloc::CampaignConfig::bs_count)
      .def_readwrite("bs_ring_radius", &lrloc::CampaignConfig::bs_ring_radius)
      .def_readwrite("train_msgs_per_class", &lrloc::CampaignConfig::train_msgs_per_class)
      .def_readwrite("test_nodes_per_class", &lrloc::CampaignConfig::test_nodes_per_class)
      .def_readwrite("test_msgs_per_node", &lrloc::CampaignConfig::test_msgs_per_node)
      .def_readwrite("anchor_radius", &lrloc::CampaignConfig::anchor_radius)
      .def_readwrite("tx_dbm", &lrloc::CampaignConfig::tx_dbm)
      .def_readwrite("channel", &lrloc::CampaignConfig::channel)
      .def("to_json",
           [](const lrloc::CampaignConfig& c) { return c.to_json().dump(); })
      .def_static("from_json", [](const std::string& s) {
        return lrloc::CampaignConfig::from_json(json::parse(s));
      });

  m.def(
      "run_sweep",
      [](const std::string& kind, const lrloc::CampaignConfig& cfg,
         const std::vector<double>& x_values, const std::vector<std::string>& algorithms,
         const std::vector<std::uint64_t>& seeds, int k, double sigma2, int trees) {
        std::vector<lrloc::TrainConfig> algs;
        for (const auto& name : algorithms) {
          algs.push_back(make_train_config(name, k, sigma2, trees, 0));
        }
        const auto res = lrloc::run_sweep(lrloc::sweep_kind_from_string(kind), cfg,
                                          x_values, algs, seeds);
        return res.to_json().dump();
      },
      py::arg("kind"), py::arg("config"), py::arg("x_values"), py::arg("algorithms"),
      py::arg("seeds"), py::arg("k") = 11, py::arg("sigma2") = 0.0,
      py::arg("trees") = 100, "returns the sweep result as a JSON string");

  m.def("derive_seed", &lrloc::derive_seed, py::arg("root"), py::arg("stream"));

  m.attr("MISSING_FILL_DBM") = lrloc::kMissingFill;
  m.attr("DEFAULT_D2D_THRESHOLD_DBM") = lrloc::kDefaultD2dThresholdDbm;
  m.attr("SPEED_OF_LIGHT") = lrloc::kSpeedOfLight;
  m.attr("EARTH_RADIUS_M") = lrloc::kEarthRadiusM;
}
