#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace lrloc {

using ClassId = int;

inline constexpr double kEarthRadiusM = 6371000.0;
inline constexpr double kDegToRad = M_PI / 180.0;

/// WGS-84 coordinates in degrees.
struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
};

/// Local east/north frame in meters.
struct PlanarPoint {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(PlanarPoint a, PlanarPoint b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

void validate(GeoPoint p);

/// Equirectangular projection into the local frame anchored at `origin`.
/// Valid for city-scale frames only; inputs more than 1 degree away are
/// rejected.
PlanarPoint project(GeoPoint origin, GeoPoint p);

/// Inverse of project, used for writing node positions back out.
GeoPoint unproject(GeoPoint origin, PlanarPoint p);

/// L classes of radius r centered on a hexagonal lattice with spacing D.
/// Requires D >= sqrt(3) * r so adjacent classes do not overlap.
class ClassPartition {
 public:
  ClassPartition(GeoPoint origin, std::vector<PlanarPoint> centers,
                 double spacing_d, double radius_r);

  GeoPoint origin() const { return origin_; }
  const std::vector<PlanarPoint>& centers() const { return centers_; }
  PlanarPoint center(ClassId id) const { return centers_.at(id); }
  int class_count() const { return static_cast<int>(centers_.size()); }
  double spacing_d() const { return spacing_d_; }
  double radius_r() const { return radius_r_; }
  /// Gap between adjacent class boundaries: x = D - sqrt(3) * r.
  double gap_x() const { return spacing_d_ - std::sqrt(3.0) * radius_r_; }

  nlohmann::json to_json() const;
  static ClassPartition from_json(const nlohmann::json& j);

 private:
  GeoPoint origin_;
  std::vector<PlanarPoint> centers_;
  double spacing_d_ = 0.0;
  double radius_r_ = 0.0;
};

/// Lays out L class centers on a hexagonal ring lattice around the origin:
/// center first, then the 6 nearest lattice sites, then the next ring.
ClassPartition make_partition(GeoPoint origin, int class_count, double spacing_d,
                              double radius_r);

/// Index of the class disk containing p, lowest index on ties; nullopt when
/// p lies in the gap between classes.
std::optional<ClassId> assign_class(const ClassPartition& part, PlanarPoint p);

}  // namespace lrloc
