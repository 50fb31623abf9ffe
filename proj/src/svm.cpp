#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "classify_internal.hpp"

namespace lrloc {

double rbf_kernel(std::span<const double> a, std::span<const double> b, double sigma2) {
  if (a.size() != b.size()) throw std::invalid_argument("rbf_kernel: length mismatch");
  if (sigma2 <= 0.0) throw std::invalid_argument("rbf_kernel: sigma2 must be > 0");
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sq += d * d;
  }
  return std::exp(-sq / (2.0 * sigma2));
}

namespace detail {
namespace {

// Sequential minimal optimization on the dual of one binary subproblem.
// Deterministic: the partner index is chosen by the max |E_i - E_j|
// heuristic with lowest-index tie-break.
struct SmoSolver {
  const std::vector<std::vector<double>>& x;
  const std::vector<double>& y;
  double sigma2;
  double c;
  double tol;
  int max_passes;

  std::vector<double> alpha;
  std::vector<double> errors;  // f(x_i) - y_i, kept incrementally
  double bias = 0.0;
  std::vector<std::vector<double>> gram;

  void solve() {
    const std::size_t n = x.size();
    alpha.assign(n, 0.0);
    errors.assign(n, 0.0);
    gram.assign(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        gram[i][j] = gram[j][i] = rbf_kernel(x[i], x[j], sigma2);
      }
    }
    for (std::size_t i = 0; i < n; ++i) errors[i] = -y[i];

    int quiet_passes = 0;
    for (int pass = 0; pass < max_passes && quiet_passes < 3; ++pass) {
      int changed = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double r = errors[i] * y[i];
        if ((r < -tol && alpha[i] < c) || (r > tol && alpha[i] > 0.0)) {
          const std::size_t j = pick_partner(i);
          if (j != i && take_step(i, j)) ++changed;
        }
      }
      quiet_passes = changed == 0 ? quiet_passes + 1 : 0;
    }
  }

  std::size_t pick_partner(std::size_t i) const {
    std::size_t best = i;
    double best_gap = -1.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (j == i) continue;
      const double gap = std::abs(errors[i] - errors[j]);
      if (gap > best_gap) {
        best_gap = gap;
        best = j;
      }
    }
    return best;
  }

  bool take_step(std::size_t i, std::size_t j) {
    const double ai_old = alpha[i];
    const double aj_old = alpha[j];
    double lo, hi;
    if (y[i] != y[j]) {
      lo = std::max(0.0, aj_old - ai_old);
      hi = std::min(c, c + aj_old - ai_old);
    } else {
      lo = std::max(0.0, ai_old + aj_old - c);
      hi = std::min(c, ai_old + aj_old);
    }
    if (hi - lo < 1e-12) return false;
    const double eta = 2.0 * gram[i][j] - gram[i][i] - gram[j][j];
    if (eta >= -1e-12) return false;
    double aj = aj_old - y[j] * (errors[i] - errors[j]) / eta;
    aj = std::clamp(aj, lo, hi);
    if (std::abs(aj - aj_old) < 1e-7 * (aj + aj_old + 1e-7)) return false;
    const double ai = ai_old + y[i] * y[j] * (aj_old - aj);
    alpha[i] = ai;
    alpha[j] = aj;

    const double b1 = bias - errors[i] - y[i] * (ai - ai_old) * gram[i][i] -
                      y[j] * (aj - aj_old) * gram[i][j];
    const double b2 = bias - errors[j] - y[i] * (ai - ai_old) * gram[i][j] -
                      y[j] * (aj - aj_old) * gram[j][j];
    double new_bias;
    if (ai > 0.0 && ai < c) {
      new_bias = b1;
    } else if (aj > 0.0 && aj < c) {
      new_bias = b2;
    } else {
      new_bias = 0.5 * (b1 + b2);
    }
    const double db = new_bias - bias;
    bias = new_bias;
    for (std::size_t k = 0; k < x.size(); ++k) {
      errors[k] += y[i] * (ai - ai_old) * gram[i][k] +
                   y[j] * (aj - aj_old) * gram[j][k] + db;
    }
    return true;
  }
};

std::vector<double> standardize_row(const SvmModel& m, std::span<const double> x) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = (x[i] - m.feature_mean[i]) / m.feature_scale[i];
  }
  return out;
}

}  // namespace

SvmModel train_svm(const SvmConfig& cfg, const std::vector<std::vector<double>>& rows,
                   const std::vector<int>& label_idx, const std::vector<ClassId>& classes) {
  const std::size_t m = rows.front().size();
  SvmModel model;
  model.sigma2 = cfg.sigma2 > 0.0 ? cfg.sigma2 : static_cast<double>(m) / 2.0;
  if (cfg.c_penalty <= 0.0) throw std::invalid_argument("SVM penalty C must be > 0");

  // Per-feature z-score so sigma2 is comparable across datasets; parameters
  // are part of the model.
  model.feature_mean.assign(m, 0.0);
  model.feature_scale.assign(m, 0.0);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < m; ++i) model.feature_mean[i] += row[i];
  }
  for (double& v : model.feature_mean) v /= static_cast<double>(rows.size());
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < m; ++i) {
      const double d = row[i] - model.feature_mean[i];
      model.feature_scale[i] += d * d;
    }
  }
  for (double& v : model.feature_scale) {
    v = std::sqrt(v / static_cast<double>(rows.size()));
    if (v < 1e-12) v = 1.0;
  }

  std::vector<std::vector<double>> scaled(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) scaled[i] = standardize_row(model, rows[i]);

  // One-vs-one: one SMO subproblem per class pair.
  const int l = static_cast<int>(classes.size());
  for (int a = 0; a < l; ++a) {
    for (int b = a + 1; b < l; ++b) {
      std::vector<std::vector<double>> x;
      std::vector<double> y;
      for (std::size_t i = 0; i < scaled.size(); ++i) {
        if (label_idx[i] == a) {
          x.push_back(scaled[i]);
          y.push_back(1.0);
        } else if (label_idx[i] == b) {
          x.push_back(scaled[i]);
          y.push_back(-1.0);
        }
      }
      const int passes = cfg.max_passes > 0 ? cfg.max_passes
                                            : 10 * static_cast<int>(x.size());
      SmoSolver solver{x, y, model.sigma2, cfg.c_penalty, cfg.tol, passes};
      solver.solve();

      SvmBinary bin;
      bin.pos = classes[a];
      bin.neg = classes[b];
      bin.bias = solver.bias;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (solver.alpha[i] > 1e-12) {
          bin.support_vectors.push_back(x[i]);
          bin.coef.push_back(solver.alpha[i] * y[i]);
        }
      }
      model.machines.push_back(std::move(bin));
    }
  }
  return model;
}

int svm_vote(const SvmModel& model, std::span<const double> x,
             const std::vector<ClassId>& classes, std::vector<double>* proba) {
  const std::vector<double> z = standardize_row(model, x);
  std::vector<int> votes(classes.size(), 0);
  for (const auto& bin : model.machines) {
    double f = bin.bias;
    for (std::size_t i = 0; i < bin.support_vectors.size(); ++i) {
      f += bin.coef[i] * rbf_kernel(bin.support_vectors[i], z, model.sigma2);
    }
    const ClassId winner = f >= 0.0 ? bin.pos : bin.neg;
    const auto it = std::lower_bound(classes.begin(), classes.end(), winner);
    ++votes[static_cast<std::size_t>(it - classes.begin())];
  }
  int best = 0;
  for (std::size_t i = 1; i < votes.size(); ++i) {
    if (votes[i] > votes[best]) best = static_cast<int>(i);
  }
  if (proba) {
    proba->assign(votes.size(), 0.0);
    const double total = std::accumulate(votes.begin(), votes.end(), 0.0);
    for (std::size_t i = 0; i < votes.size(); ++i) (*proba)[i] = votes[i] / total;
  }
  return best;
}

}  // namespace detail
}  // namespace lrloc
