#include "lrloc/geo.hpp"

#include <algorithm>
#include <limits>

#include <nlohmann/json.hpp>

namespace lrloc {

void validate(GeoPoint p) {
  if (!(p.lat >= -90.0 && p.lat <= 90.0)) {
    throw std::invalid_argument("latitude out of [-90, 90]: " + std::to_string(p.lat));
  }
  if (!(p.lon >= -180.0 && p.lon <= 180.0)) {
    throw std::invalid_argument("longitude out of [-180, 180]: " + std::to_string(p.lon));
  }
}

PlanarPoint project(GeoPoint origin, GeoPoint p) {
  validate(origin);
  validate(p);
  const double dlat = p.lat - origin.lat;
  const double dlon = p.lon - origin.lon;
  if (std::abs(dlat) >= 1.0 || std::abs(dlon) >= 1.0) {
    throw std::invalid_argument("point outside the 1-degree local frame");
  }
  return {kEarthRadiusM * std::cos(origin.lat * kDegToRad) * dlon * kDegToRad,
          kEarthRadiusM * dlat * kDegToRad};
}

GeoPoint unproject(GeoPoint origin, PlanarPoint p) {
  validate(origin);
  GeoPoint out;
  out.lat = origin.lat + p.y / kEarthRadiusM / kDegToRad;
  out.lon = origin.lon +
            p.x / (kEarthRadiusM * std::cos(origin.lat * kDegToRad)) / kDegToRad;
  return out;
}

ClassPartition::ClassPartition(GeoPoint origin, std::vector<PlanarPoint> centers,
                               double spacing_d, double radius_r)
    : origin_(origin),
      centers_(std::move(centers)),
      spacing_d_(spacing_d),
      radius_r_(radius_r) {
  validate(origin_);
  if (centers_.empty()) throw std::invalid_argument("partition needs at least one class");
  if (radius_r_ <= 0.0 || spacing_d_ <= 0.0) {
    throw std::invalid_argument("spacing and radius must be positive");
  }
  if (spacing_d_ < std::sqrt(3.0) * radius_r_ - 1e-9 * spacing_d_) {
    throw std::invalid_argument("geometry violation: D < sqrt(3) * r");
  }
}

namespace {

// Walks hexagonal rings outward. Ring k starts at k steps east and is traced
// by six sides of k steps each.
std::vector<PlanarPoint> hex_ring_centers(int count, double spacing) {
  std::vector<PlanarPoint> centers;
  centers.reserve(count);
  centers.push_back({0.0, 0.0});
  const double s3 = std::sqrt(3.0) / 2.0;
  const PlanarPoint dirs[6] = {{1.0, 0.0}, {0.5, s3},  {-0.5, s3},
                               {-1.0, 0.0}, {-0.5, -s3}, {0.5, -s3}};
  for (int ring = 1; static_cast<int>(centers.size()) < count; ++ring) {
    PlanarPoint pos{ring * spacing, 0.0};
    for (int side = 0; side < 6 && static_cast<int>(centers.size()) < count; ++side) {
      const PlanarPoint step = dirs[(side + 2) % 6];
      for (int i = 0; i < ring && static_cast<int>(centers.size()) < count; ++i) {
        centers.push_back(pos);
        pos.x += step.x * spacing;
        pos.y += step.y * spacing;
      }
    }
  }
  return centers;
}

}  // namespace

ClassPartition make_partition(GeoPoint origin, int class_count, double spacing_d,
                              double radius_r) {
  if (class_count < 1) throw std::invalid_argument("class count must be >= 1");
  return ClassPartition(origin, hex_ring_centers(class_count, spacing_d), spacing_d,
                        radius_r);
}

std::optional<ClassId> assign_class(const ClassPartition& part, PlanarPoint p) {
  ClassId best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (ClassId i = 0; i < part.class_count(); ++i) {
    const double d = distance(part.center(i), p);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  if (best_d <= part.radius_r()) return best;
  return std::nullopt;
}

nlohmann::json ClassPartition::to_json() const {
  nlohmann::json centers = nlohmann::json::array();
  for (const auto& c : centers_) centers.push_back({{"x", c.x}, {"y", c.y}});
  return {{"origin", {{"lat", origin_.lat}, {"lon", origin_.lon}}},
          {"D_m", spacing_d_},
          {"r_m", radius_r_},
          {"centers", centers}};
}

ClassPartition ClassPartition::from_json(const nlohmann::json& j) {
  GeoPoint origin{j.at("origin").at("lat").get<double>(),
                  j.at("origin").at("lon").get<double>()};
  std::vector<PlanarPoint> centers;
  for (const auto& c : j.at("centers")) {
    centers.push_back({c.at("x").get<double>(), c.at("y").get<double>()});
  }
  return ClassPartition(origin, std::move(centers), j.at("D_m").get<double>(),
                        j.at("r_m").get<double>());
}

}  // namespace lrloc
