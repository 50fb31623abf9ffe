#include "lrloc/locate.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include <Eigen/Dense>

namespace lrloc {

bool in_range(std::optional<double> rssi_dbm, double threshold_dbm) {
  return rssi_dbm.has_value() && *rssi_dbm >= threshold_dbm;
}

PlanarPoint multilaterate(const std::vector<PlanarPoint>& anchors,
                          const std::vector<double>& distances) {
  const std::size_t k = anchors.size();
  if (k < 3) throw std::invalid_argument("multilateration needs at least 3 anchors");
  if (distances.size() != k) throw std::invalid_argument("anchor/distance count mismatch");

  // Subtract the first circle equation from the rest:
  // 2 (c_i - c_0) . p = d_0^2 - d_i^2 + |c_i|^2 - |c_0|^2
  Eigen::MatrixXd a(k - 1, 2);
  Eigen::VectorXd rhs(k - 1);
  const auto& c0 = anchors[0];
  const double n0 = c0.x * c0.x + c0.y * c0.y;
  for (std::size_t i = 1; i < k; ++i) {
    const auto& ci = anchors[i];
    a(i - 1, 0) = 2.0 * (ci.x - c0.x);
    a(i - 1, 1) = 2.0 * (ci.y - c0.y);
    rhs(i - 1) = distances[0] * distances[0] - distances[i] * distances[i] +
                 ci.x * ci.x + ci.y * ci.y - n0;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sing = svd.singularValues();
  if (sing(1) <= 1e-9 * sing(0)) {
    throw std::runtime_error("ill-conditioned multilateration: collinear anchors");
  }
  Eigen::Vector2d p = svd.solve(rhs);

  // one Gauss-Newton polish pass on the nonlinear range residuals
  Eigen::Matrix2d jtj = Eigen::Matrix2d::Zero();
  Eigen::Vector2d jtr = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < k; ++i) {
    const double dx = p(0) - anchors[i].x;
    const double dy = p(1) - anchors[i].y;
    const double range = std::hypot(dx, dy);
    if (range < 1e-12) continue;  // at an anchor: zero residual direction undefined
    const Eigen::Vector2d grad(dx / range, dy / range);
    jtj += grad * grad.transpose();
    jtr += grad * (range - distances[i]);
  }
  const Eigen::Vector2d step = jtj.ldlt().solve(-jtr);
  if (step.allFinite()) p += step;
  return {p(0), p(1)};
}

LocalizationResult localize(const std::vector<double>& sn_rssi,
                            const TrainedClassifier& class_model,
                            const ClassPartition& part,
                            const std::vector<Anchor>& anchors,
                            const std::map<ClassId, double>& d2d_readings,
                            double threshold_dbm) {
  LocalizationResult result;
  result.class_id = class_model.predict(sn_rssi);
  result.position = part.center(result.class_id);
  result.mode = LocMode::ClassOnly;

  std::vector<PlanarPoint> positions;
  std::vector<double> distances;
  for (const auto& anchor : anchors) {
    const auto it = d2d_readings.find(anchor.class_id);
    const std::optional<double> reading =
        it == d2d_readings.end() ? std::nullopt : std::optional<double>(it->second);
    if (!in_range(reading, threshold_dbm)) continue;
    positions.push_back(anchor.position);
    distances.push_back(invert_distance(anchor.curve, *reading));
  }
  result.anchors_used = static_cast<int>(positions.size());
  result.per_anchor_distances = distances;
  if (positions.size() < 3) return result;

  try {
    result.position = multilaterate(positions, distances);
    result.mode = LocMode::Refined;
  } catch (const std::exception& e) {
    std::cerr << "warning: refinement failed (" << e.what() << "); using class center\n";
    result.position = part.center(result.class_id);
    result.mode = LocMode::ClassOnly;
  }
  return result;
}

}  // namespace lrloc
