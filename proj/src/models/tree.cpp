#include "stepcast/models/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace stepcast {

void TreeConfig::validate() const {
  if (max_depth == 0 || (max_depth > 0 && max_depth < 1)) {
    throw std::invalid_argument("max_depth must be >= 1 or unlimited (< 0)");
  }
  if (min_samples_split < 2) throw std::invalid_argument("min_samples_split must be >= 2");
  if (min_samples_leaf < 1) throw std::invalid_argument("min_samples_leaf must be >= 1");
}

double TreeModel::predict_one(const double* x) const {
  int i = 0;
  while (!nodes[i].is_leaf) {
    i = x[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
  }
  return nodes[i].value;
}

std::vector<double> TreeModel::predict(const Matrix& X) const {
  std::vector<double> out(X.rows);
  for (size_t i = 0; i < X.rows; ++i) out[i] = predict_one(X.row(i));
  return out;
}

int TreeModel::depth() const {
  // Iterative depth over the flattened layout.
  std::vector<std::pair<int, int>> stack{{0, 0}};
  int best = 0;
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (!nodes[i].is_leaf) {
      stack.push_back({nodes[i].left, d + 1});
      stack.push_back({nodes[i].right, d + 1});
    }
  }
  return best;
}

namespace {

struct BestSplit {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double children_sse = 0.0;
  size_t left_count = 0;
};

struct Builder {
  const Matrix& X;
  const std::vector<double>& y;
  const TreeConfig& config;
  std::vector<TreeNode> nodes;
  std::vector<size_t> index;       // row indices, partitioned in place
  std::vector<size_t> sorted_buf;  // per-node scratch
  std::vector<double> prefix_sum;
  std::vector<double> prefix_sq;

  // Exact SSE of a node via the two-pass formula (stable near zero
  // variance, where the stopping rule depends on it).
  double node_sse(size_t begin, size_t end, double mean) const {
    double sse = 0.0;
    for (size_t k = begin; k < end; ++k) {
      const double d = y[index[k]] - mean;
      sse += d * d;
    }
    return sse;
  }

  // Scans features in ascending order with strict improvement, which
  // realizes the (lowest feature, lowest threshold) tie-break.
  BestSplit find_best_split(size_t begin, size_t end) {
    const size_t n = end - begin;
    BestSplit best;
    best.children_sse = std::numeric_limits<double>::infinity();
    const size_t msl = static_cast<size_t>(config.min_samples_leaf);

    for (size_t f = 0; f < X.cols; ++f) {
      sorted_buf.assign(index.begin() + static_cast<long>(begin),
                        index.begin() + static_cast<long>(end));
      std::sort(sorted_buf.begin(), sorted_buf.end(), [&](size_t a, size_t b) {
        return X(a, f) < X(b, f);
      });

      prefix_sum.assign(n + 1, 0.0);
      prefix_sq.assign(n + 1, 0.0);
      for (size_t k = 0; k < n; ++k) {
        prefix_sum[k + 1] = prefix_sum[k] + y[sorted_buf[k]];
        prefix_sq[k + 1] = prefix_sq[k] + y[sorted_buf[k]] * y[sorted_buf[k]];
      }

      for (size_t k = msl; k + msl <= n; ++k) {
        const double lo = X(sorted_buf[k - 1], f);
        const double hi = X(sorted_buf[k], f);
        if (!(lo < hi)) continue;  // split only between distinct values
        const double nl = static_cast<double>(k);
        const double nr = static_cast<double>(n - k);
        const double sse_l = prefix_sq[k] - prefix_sum[k] * prefix_sum[k] / nl;
        const double sum_r = prefix_sum[n] - prefix_sum[k];
        const double sq_r = prefix_sq[n] - prefix_sq[k];
        const double sse_r = sq_r - sum_r * sum_r / nr;
        const double sse = sse_l + sse_r;
        if (sse < best.children_sse) {
          best.found = true;
          best.feature = static_cast<int>(f);
          best.threshold = (lo + hi) / 2.0;
          best.children_sse = sse;
          best.left_count = k;
        }
      }
    }
    return best;
  }

  int build(size_t begin, size_t end, int depth) {
    const size_t n = end - begin;
    double sum = 0.0;
    for (size_t k = begin; k < end; ++k) sum += y[index[k]];
    const double mean = sum / static_cast<double>(n);

    const int node_id = static_cast<int>(nodes.size());
    nodes.push_back(TreeNode{});
    nodes[node_id].value = mean;
    nodes[node_id].n_samples = static_cast<int64_t>(n);

    const bool depth_ok = config.depth_unlimited() || depth < config.max_depth;
    if (!depth_ok || n < static_cast<size_t>(config.min_samples_split)) return node_id;
    if (node_sse(begin, end, mean) <= 0.0) return node_id;  // zero-variance node

    BestSplit split = find_best_split(begin, end);
    if (!split.found) return node_id;

    auto mid = std::stable_partition(
        index.begin() + static_cast<long>(begin), index.begin() + static_cast<long>(end),
        [&](size_t row) { return X(row, static_cast<size_t>(split.feature)) <= split.threshold; });
    const size_t split_at = static_cast<size_t>(mid - index.begin());

    nodes[node_id].is_leaf = false;
    nodes[node_id].feature = split.feature;
    nodes[node_id].threshold = split.threshold;
    const int left = build(begin, split_at, depth + 1);
    const int right = build(split_at, end, depth + 1);
    nodes[node_id].left = left;
    nodes[node_id].right = right;
    return node_id;
  }
};

}  // namespace

TreeModel tree_fit_subset(const Matrix& X, const std::vector<double>& y,
                          const std::vector<size_t>& rows, const TreeConfig& config) {
  config.validate();
  if (rows.empty()) throw std::invalid_argument("tree_fit: empty training set");
  if (y.size() != X.rows) throw std::invalid_argument("tree_fit: X/y size mismatch");

  Builder b{X, y, config, {}, rows, {}, {}, {}};
  b.build(0, rows.size(), 0);
  TreeModel model;
  model.nodes = std::move(b.nodes);
  return model;
}

TreeModel tree_fit(const Matrix& X, const std::vector<double>& y, const TreeConfig& config) {
  std::vector<size_t> rows(X.rows);
  std::iota(rows.begin(), rows.end(), 0);
  return tree_fit_subset(X, y, rows, config);
}

}  // namespace stepcast
