#include "lrloc/ranging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace lrloc {

RangingCurve::RangingCurve(CurveKind kind, std::vector<double> coefficients,
                           double d_min, double d_max, double residual_rmse)
    : kind_(kind),
      coefficients_(std::move(coefficients)),
      d_min_(d_min),
      d_max_(d_max),
      residual_rmse_(residual_rmse) {
  if (coefficients_.size() < 2) throw std::invalid_argument("curve needs >= 2 coefficients");
  if (!(d_min_ > 0.0) || !(d_max_ > d_min_)) {
    throw std::invalid_argument("fit domain must satisfy 0 < d_min < d_max");
  }
  if (kind_ == CurveKind::PowerSeries && coefficients_.size() != 3) {
    throw std::invalid_argument("power-series curve takes exactly (a, b, c)");
  }
}

void RangingCurve::set_rssi_span(double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("rssi span must satisfy lo < hi");
  rssi_min_ = lo;
  rssi_max_ = hi;
}

double RangingCurve::eval_poly(double rssi) const {
  double acc = 0.0;
  for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it) {
    acc = acc * rssi + *it;
  }
  return acc;
}

namespace {

double golden_section(double lo, double hi, const auto& objective) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = objective(c), fd = objective(d);
  for (int it = 0; it < 200 && (b - a) > 1e-12 * (std::abs(a) + std::abs(b)); ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = objective(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

double RangingCurve::rssi_at(double d) const {
  d = std::clamp(d, d_min_, d_max_);
  if (kind_ == CurveKind::PowerSeries) {
    return coefficients_[0] * std::pow(d, coefficients_[1]) + coefficients_[2];
  }
  // Polynomial maps rssi -> distance; invert numerically over the fitted
  // rssi span.
  double lo = rssi_min_, hi = rssi_max_;
  auto f = [&](double rssi) { return eval_poly(rssi); };
  // monotone on the bracket?
  bool increasing = true, decreasing = true;
  double prev = f(lo);
  for (int i = 1; i <= 64; ++i) {
    const double cur = f(lo + (hi - lo) * i / 64.0);
    if (cur < prev) increasing = false;
    if (cur > prev) decreasing = false;
    prev = cur;
  }
  if (increasing || decreasing) {
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      const bool below = increasing ? f(mid) < d : f(mid) > d;
      (below ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }
  return golden_section(lo, hi, [&](double rssi) {
    const double e = f(rssi) - d;
    return e * e;
  });
}

double RangingCurve::distance_at(double rssi) const {
  if (kind_ == CurveKind::Polynomial) {
    return std::clamp(eval_poly(rssi), d_min_, d_max_);
  }
  const double a = coefficients_[0], b = coefficients_[1], c = coefficients_[2];
  const double t = (rssi - c) / a;
  if (b != 0.0 && t > 0.0) {
    return std::clamp(std::pow(t, 1.0 / b), d_min_, d_max_);
  }
  // Outside the invertible branch: pick the domain edge closest in rssi.
  const double at_min = coefficients_[0] * std::pow(d_min_, b) + c;
  const double at_max = coefficients_[0] * std::pow(d_max_, b) + c;
  return std::abs(rssi - at_min) <= std::abs(rssi - at_max) ? d_min_ : d_max_;
}

double invert_distance(const RangingCurve& curve, double rssi) {
  return curve.distance_at(rssi);
}

RangingCurve fit_polynomial(const std::vector<RangingSample>& samples, int degree) {
  if (degree < 1 || degree > 5) throw std::invalid_argument("degree must be in [1, 5]");
  if (static_cast<int>(samples.size()) < degree + 1) {
    throw std::invalid_argument("need at least degree + 1 samples");
  }
  std::set<double> distinct;
  double d_min = std::numeric_limits<double>::infinity(), d_max = 0.0;
  for (const auto& s : samples) {
    if (!(s.distance > 0.0)) throw std::invalid_argument("sample distances must be > 0");
    distinct.insert(s.rssi);
    d_min = std::min(d_min, s.distance);
    d_max = std::max(d_max, s.distance);
  }
  if (static_cast<int>(distinct.size()) < degree + 1) {
    throw std::invalid_argument("rank deficiency: not enough distinct RSSI values");
  }

  const int n = static_cast<int>(samples.size());
  Eigen::MatrixXd a(n, degree + 1);
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) {
    double p = 1.0;
    for (int j = 0; j <= degree; ++j) {
      a(i, j) = p;
      p *= samples[i].rssi;
    }
    d(i) = samples[i].distance;
  }
  // normal equations with per-column scaling: raw RSSI powers span many
  // orders of magnitude at degree 3
  Eigen::VectorXd scale(degree + 1);
  for (int j = 0; j <= degree; ++j) {
    scale(j) = a.col(j).norm();
    if (scale(j) < 1e-300) scale(j) = 1.0;
    a.col(j) /= scale(j);
  }
  const Eigen::MatrixXd ata = a.transpose() * a;
  const Eigen::VectorXd atd = a.transpose() * d;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(ata);
  if (!lu.isInvertible()) throw std::invalid_argument("rank deficiency in normal equations");
  Eigen::VectorXd w = lu.solve(atd);

  const double sse = (a * w - d).squaredNorm();
  std::vector<double> coef(degree + 1);
  for (int j = 0; j <= degree; ++j) coef[j] = w(j) / scale(j);
  if (d_max <= d_min) d_max = d_min + 1.0;
  RangingCurve curve(CurveKind::Polynomial, std::move(coef), d_min, d_max,
                     std::sqrt(sse / n));
  curve.set_rssi_span(*distinct.begin(), *distinct.rbegin());
  return curve;
}

RangingCurve fit_power(const std::vector<RangingSample>& samples) {
  if (samples.size() < 3) throw std::invalid_argument("need at least 3 samples");
  double d_min = std::numeric_limits<double>::infinity(), d_max = 0.0;
  double rssi_min = std::numeric_limits<double>::infinity(), rssi_max = -rssi_min;
  for (const auto& s : samples) {
    if (!(s.distance > 0.0)) throw std::invalid_argument("sample distances must be > 0");
    d_min = std::min(d_min, s.distance);
    d_max = std::max(d_max, s.distance);
    rssi_min = std::min(rssi_min, s.rssi);
    rssi_max = std::max(rssi_max, s.rssi);
  }
  if (rssi_max - rssi_min < 1e-9 || d_max - d_min < 1e-12) {
    throw std::invalid_argument("rank deficiency: flat data cannot determine a power law");
  }

  // Variable projection: for a fixed exponent b the remaining pair (a, c)
  // is an ordinary 2x2 linear least-squares problem, so search b alone.
  const int n = static_cast<int>(samples.size());
  auto solve_ac = [&](double pb, double& pa, double& pc) {
    double spp = 0, sp = 0, spy = 0, sy1 = 0;
    for (const auto& s : samples) {
      const double p = std::pow(s.distance, pb);
      spp += p * p;
      sp += p;
      spy += p * s.rssi;
      sy1 += s.rssi;
    }
    const double det = spp * n - sp * sp;
    if (!(std::abs(det) > 1e-12 * (spp * n + 1e-300))) return false;
    pa = (spy * n - sp * sy1) / det;
    pc = (spp * sy1 - sp * spy) / det;
    return std::isfinite(pa) && std::isfinite(pc);
  };

  auto sse = [&](double pa, double pb, double pc) {
    double acc = 0.0;
    for (const auto& s : samples) {
      const double r = pa * std::pow(s.distance, pb) + pc - s.rssi;
      acc += r * r;
    }
    return acc;
  };
  auto sse_b = [&](double pb) {
    double pa, pc;
    if (!solve_ac(pb, pa, pc)) return std::numeric_limits<double>::infinity();
    return sse(pa, pb, pc);
  };

  // coarse log-spaced grid over the exponent, then golden-section refinement
  const double b_lo = 1e-3, b_hi = 8.0;
  double b = b_lo;
  double best_val = std::numeric_limits<double>::infinity();
  constexpr int kGrid = 96;
  for (int i = 0; i <= kGrid; ++i) {
    const double cand =
        std::exp(std::log(b_lo) + (std::log(b_hi) - std::log(b_lo)) * i / kGrid);
    const double v = sse_b(cand);
    if (v < best_val) {
      best_val = v;
      b = cand;
    }
  }
  if (!std::isfinite(best_val)) {
    throw std::invalid_argument("rank deficiency: degenerate distances");
  }
  {
    const double ratio = std::exp((std::log(b_hi) - std::log(b_lo)) / kGrid);
    double lo = std::max(b_lo, b / ratio), hi = std::min(b_hi, b * ratio);
    constexpr double kInvPhi = 0.6180339887498949;
    double x1 = hi - kInvPhi * (hi - lo), x2 = lo + kInvPhi * (hi - lo);
    double f1 = sse_b(x1), f2 = sse_b(x2);
    for (int it = 0; it < 120; ++it) {
      if (f1 <= f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - kInvPhi * (hi - lo);
        f1 = sse_b(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + kInvPhi * (hi - lo);
        f2 = sse_b(x2);
      }
    }
    b = 0.5 * (lo + hi);
  }
  double a = 0.0, c = 0.0;
  if (!solve_ac(b, a, c)) {
    throw std::invalid_argument("rank deficiency: degenerate distances");
  }

  // short Gauss-Newton polish of all three parameters together
  double cur = sse(a, b, c);
  for (int it = 0; it < 100; ++it) {
    Eigen::Matrix3d jtj = Eigen::Matrix3d::Zero();
    Eigen::Vector3d jtr = Eigen::Vector3d::Zero();
    for (const auto& s : samples) {
      const double p = std::pow(s.distance, b);
      const double r = a * p + c - s.rssi;
      Eigen::Vector3d row(p, a * p * std::log(s.distance), 1.0);
      jtj += row * row.transpose();
      jtr += row * r;
    }
    Eigen::Vector3d step = jtj.ldlt().solve(-jtr);
    if (!step.allFinite()) break;

    double scale = 1.0;
    bool accepted = false;
    bool done = false;
    for (int half = 0; half < 30; ++half) {
      const double next =
          sse(a + scale * step(0), b + scale * step(1), c + scale * step(2));
      if (next < cur) {
        a += scale * step(0);
        b += scale * step(1);
        c += scale * step(2);
        if (cur - next < 1e-14 * (cur + 1e-14)) done = true;
        cur = next;
        accepted = true;
        break;
      }
      scale *= 0.5;
    }
    if (!accepted || done) break;
  }

  RangingCurve curve(CurveKind::PowerSeries, {a, b, c}, d_min, d_max, 0.0);
  curve.set_rssi_span(rssi_min - 1.0, rssi_max + 1.0);
  double dist_sse = 0.0;
  for (const auto& s : samples) {
    const double e = curve.distance_at(s.rssi) - s.distance;
    dist_sse += e * e;
  }
  RangingCurve out(CurveKind::PowerSeries, {a, b, c}, d_min, d_max,
                   std::sqrt(dist_sse / n));
  out.set_rssi_span(rssi_min - 1.0, rssi_max + 1.0);
  return out;
}

double ranging_rmse(const std::vector<std::vector<double>>& estimates,
                    const std::vector<std::vector<double>>& truths) {
  if (estimates.empty() || estimates.size() != truths.size()) {
    throw std::invalid_argument("ranging_rmse: shape mismatch");
  }
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < estimates.size(); ++t) {
    if (estimates[t].empty() || estimates[t].size() != truths[t].size()) {
      throw std::invalid_argument("ranging_rmse: shape mismatch");
    }
    for (std::size_t k = 0; k < estimates[t].size(); ++k) {
      const double e = estimates[t][k] - truths[t][k];
      acc += e * e;
      ++count;
    }
  }
  return std::sqrt(acc / static_cast<double>(count));
}

namespace {
std::string kind_name(CurveKind k) {
  return k == CurveKind::Polynomial ? "polynomial" : "power_series";
}
}  // namespace

nlohmann::json RangingCurve::to_json() const {
  return {{"kind", kind_name(kind_)},
          {"coefficients", coefficients_},
          {"domain", {{"d_min_m", d_min_}, {"d_max_m", d_max_}}},
          {"rssi_span", {{"min_dbm", rssi_min_}, {"max_dbm", rssi_max_}}},
          {"residual_rmse_m", residual_rmse_}};
}

RangingCurve RangingCurve::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  CurveKind k;
  if (kind == "polynomial") {
    k = CurveKind::Polynomial;
  } else if (kind == "power_series") {
    k = CurveKind::PowerSeries;
  } else {
    throw std::runtime_error("unknown curve kind '" + kind + "'");
  }
  RangingCurve curve(k, j.at("coefficients").get<std::vector<double>>(),
                     j.at("domain").at("d_min_m").get<double>(),
                     j.at("domain").at("d_max_m").get<double>(),
                     j.value("residual_rmse_m", 0.0));
  if (j.contains("rssi_span")) {
    curve.set_rssi_span(j.at("rssi_span").at("min_dbm").get<double>(),
                        j.at("rssi_span").at("max_dbm").get<double>());
  }
  return curve;
}

}  // namespace lrloc
