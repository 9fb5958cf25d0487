#pragma once

#include <cstdint>
#include <vector>

#include "stepcast/linalg.hpp"

namespace stepcast {

struct TreeConfig {
  int max_depth = -1;         // -1 = unlimited, otherwise >= 1
  int min_samples_split = 2;  // node size needed to consider a split
  int min_samples_leaf = 1;

  bool depth_unlimited() const { return max_depth < 0; }
  void validate() const;
};

// Flattened regression tree; node 0 is the root. Leaves predict the mean
// of their training targets.
struct TreeNode {
  bool is_leaf = true;
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;   // leaf prediction
  int64_t n_samples = 0;
};

struct TreeModel {
  std::vector<TreeNode> nodes;

  double predict_one(const double* x) const;
  std::vector<double> predict(const Matrix& X) const;
  int depth() const;
};

// Greedy CART-style fit minimizing the summed squared error of the split
// children; thresholds are midpoints between consecutive distinct sorted
// values; ties break toward the lowest feature index, then threshold.
TreeModel tree_fit(const Matrix& X, const std::vector<double>& y, const TreeConfig& config);

// Fit on a subset of rows (used by boosting); indices must be valid rows.
TreeModel tree_fit_subset(const Matrix& X, const std::vector<double>& y,
                          const std::vector<size_t>& rows, const TreeConfig& config);

}  // namespace stepcast
