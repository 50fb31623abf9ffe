#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace lrloc {

struct RangingSample {
  double distance = 0.0;  // meters
  double rssi = 0.0;      // dBm
};

enum class CurveKind { Polynomial, PowerSeries };

/// Fitted RSSI-distance relationship with numeric inversion.
/// Polynomial: distance = a0 + a1*rssi + ... + an*rssi^n.
/// PowerSeries: rssi = a * d^b + c.
class RangingCurve {
 public:
  RangingCurve(CurveKind kind, std::vector<double> coefficients, double d_min,
               double d_max, double residual_rmse);

  CurveKind kind() const { return kind_; }
  const std::vector<double>& coefficients() const { return coefficients_; }
  double domain_min() const { return d_min_; }
  double domain_max() const { return d_max_; }
  double residual_rmse() const { return residual_rmse_; }

  /// RSSI bracket observed during fitting; bounds the numeric inversion.
  void set_rssi_span(double lo, double hi);
  double rssi_span_min() const { return rssi_min_; }
  double rssi_span_max() const { return rssi_max_; }

  /// RSSI the curve predicts at distance d (numeric inversion for the
  /// polynomial kind).
  double rssi_at(double d) const;

  /// Estimated distance for an RSSI reading, clamped to the fit domain.
  double distance_at(double rssi) const;

  nlohmann::json to_json() const;
  static RangingCurve from_json(const nlohmann::json& j);

 private:
  double eval_poly(double rssi) const;

  CurveKind kind_;
  std::vector<double> coefficients_;
  double d_min_;
  double d_max_;
  double residual_rmse_;
  double rssi_min_ = -250.0;
  double rssi_max_ = 50.0;
};

/// Least-squares polynomial distance = P(rssi) via column-scaled normal
/// equations. Degree capped at 5 for conditioning.
RangingCurve fit_polynomial(const std::vector<RangingSample>& samples, int degree);

/// Two-term power series rssi = a * d^b + c. The exponent is found by
/// variable projection (grid plus golden section over b with (a, c) solved
/// in closed form), then all three parameters get a Gauss-Newton polish.
RangingCurve fit_power(const std::vector<RangingSample>& samples);

/// Distance estimate for an RSSI reading, clamped to the curve's fit domain.
double invert_distance(const RangingCurve& curve, double rssi);

/// sqrt(mean squared distance error) over a T_s x K estimate matrix.
double ranging_rmse(const std::vector<std::vector<double>>& estimates,
                    const std::vector<std::vector<double>>& truths);

}  // namespace lrloc
