#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "classify_internal.hpp"
#include "lrloc/random.hpp"

namespace lrloc::detail {
namespace {

struct TreeBuilder {
  const std::vector<std::vector<double>>& rows;
  const std::vector<int>& labels;
  int n_classes;
  int max_features;
  std::mt19937_64 rng;
  std::vector<TreeNode> nodes;

  int build(std::vector<std::size_t> idx) {
    std::vector<double> dist(n_classes, 0.0);
    for (std::size_t i : idx) dist[labels[i]] += 1.0;
    const double total = static_cast<double>(idx.size());

    bool pure = false;
    for (double v : dist) {
      if (v == total) pure = true;
    }
    if (pure || idx.size() < 2) return make_leaf(dist, total);

    // sample candidate features without replacement
    const int m = static_cast<int>(rows.front().size());
    std::vector<int> feats(m);
    std::iota(feats.begin(), feats.end(), 0);
    for (int i = 0; i < std::min(max_features, m); ++i) {
      std::uniform_int_distribution<int> pick(i, m - 1);
      std::swap(feats[i], feats[pick(rng)]);
    }
    feats.resize(std::min(max_features, m));

    int best_feat = -1;
    double best_thresh = 0.0;
    double best_gini = gini(dist, total);
    for (int f : feats) {
      std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return rows[a][f] < rows[b][f];
      });
      std::vector<double> left(n_classes, 0.0);
      std::vector<double> right = dist;
      for (std::size_t i = 0; i + 1 < idx.size(); ++i) {
        const int lab = labels[idx[i]];
        left[lab] += 1.0;
        right[lab] -= 1.0;
        if (rows[idx[i]][f] == rows[idx[i + 1]][f]) continue;
        const double nl = static_cast<double>(i + 1);
        const double nr = total - nl;
        const double g = (nl * gini(left, nl) + nr * gini(right, nr)) / total;
        if (g < best_gini - 1e-12) {
          best_gini = g;
          best_feat = f;
          best_thresh = 0.5 * (rows[idx[i]][f] + rows[idx[i + 1]][f]);
        }
      }
    }
    if (best_feat < 0) return make_leaf(dist, total);

    std::vector<std::size_t> left_idx, right_idx;
    for (std::size_t i : idx) {
      (rows[i][best_feat] <= best_thresh ? left_idx : right_idx).push_back(i);
    }
    if (left_idx.empty() || right_idx.empty()) return make_leaf(dist, total);

    const int node_id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes[node_id].feature = best_feat;
    nodes[node_id].threshold = best_thresh;
    const int left = build(std::move(left_idx));
    const int right = build(std::move(right_idx));
    nodes[node_id].left = left;
    nodes[node_id].right = right;
    return node_id;
  }

  int make_leaf(std::vector<double> dist, double total) {
    for (double& v : dist) v /= total;
    const int node_id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes[node_id].class_dist = std::move(dist);
    return node_id;
  }

  static double gini(const std::vector<double>& dist, double total) {
    double g = 1.0;
    for (double v : dist) {
      const double p = v / total;
      g -= p * p;
    }
    return g;
  }
};

}  // namespace

ForestModel train_forest(const ForestConfig& cfg,
                         const std::vector<std::vector<double>>& rows,
                         const std::vector<int>& label_idx, int n_classes) {
  if (cfg.n_trees < 1) throw std::invalid_argument("forest needs >= 1 tree");
  const int m = static_cast<int>(rows.front().size());
  const int max_features =
      cfg.max_features > 0 ? cfg.max_features
                           : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(m))));

  ForestModel model;
  model.trees.reserve(cfg.n_trees);
  for (int t = 0; t < cfg.n_trees; ++t) {
    // per-tree derived seed: growing more trees never changes earlier ones
    TreeBuilder builder{rows, label_idx, n_classes, max_features,
                        make_rng(cfg.rng_seed, static_cast<std::uint64_t>(t)), {}};
    std::vector<std::size_t> bootstrap(rows.size());
    std::uniform_int_distribution<std::size_t> pick(0, rows.size() - 1);
    for (auto& i : bootstrap) i = pick(builder.rng);
    builder.build(std::move(bootstrap));
    model.trees.push_back(std::move(builder.nodes));
  }
  return model;
}

std::vector<double> forest_proba(const ForestModel& model, std::span<const double> x,
                                 int n_classes) {
  std::vector<double> proba(n_classes, 0.0);
  for (const auto& tree : model.trees) {
    int node = 0;
    while (tree[node].feature >= 0) {
      node = x[tree[node].feature] <= tree[node].threshold ? tree[node].left
                                                           : tree[node].right;
    }
    for (int c = 0; c < n_classes; ++c) proba[c] += tree[node].class_dist[c];
  }
  for (double& v : proba) v /= static_cast<double>(model.trees.size());
  return proba;
}

}  // namespace lrloc::detail
