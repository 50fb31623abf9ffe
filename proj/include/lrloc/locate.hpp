#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lrloc/classify.hpp"
#include "lrloc/geo.hpp"
#include "lrloc/ranging.hpp"

namespace lrloc {

/// GPS-enabled anchor at its class center with a fitted ranging curve for
/// device-to-device RSSI readings.
struct Anchor {
  ClassId class_id = 0;
  PlanarPoint position;
  RangingCurve curve;
};

enum class LocMode { ClassOnly, Refined };

struct LocalizationResult {
  LocMode mode = LocMode::ClassOnly;
  ClassId class_id = 0;
  PlanarPoint position;  // class center in ClassOnly mode
  int anchors_used = 0;
  std::vector<double> per_anchor_distances;
};

/// True iff a D2D reading exists and is at or above the threshold
/// (inclusive boundary).
bool in_range(std::optional<double> rssi_dbm, double threshold_dbm);

/// Position from >= 3 anchor distances: linearized least squares (first
/// circle subtracted from the rest) followed by one Gauss-Newton pass on the
/// nonlinear range residuals. Throws on K < 3 or collinear anchors.
PlanarPoint multilaterate(const std::vector<PlanarPoint>& anchors,
                          const std::vector<double>& distances);

inline constexpr double kDefaultD2dThresholdDbm = -110.0;

/// The two-step pipeline: classify from the uplink fingerprint, then refine
/// by ranging multilateration when at least 3 anchors are in D2D range.
/// Degenerate refinement geometry falls back to the class-only result.
LocalizationResult localize(const std::vector<double>& sn_rssi,
                            const TrainedClassifier& class_model,
                            const ClassPartition& part,
                            const std::vector<Anchor>& anchors,
                            const std::map<ClassId, double>& d2d_readings,
                            double threshold_dbm = kDefaultD2dThresholdDbm);

}  // namespace lrloc
