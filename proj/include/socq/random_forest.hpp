#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace socq::ml {

struct ForestOptions {
  int n_trees = 100;
  int max_depth = 16;
  int min_samples_leaf = 1;
  int max_features = 0;  // 0 -> round(sqrt(n_features))
  std::uint64_t seed = 17;
};

// Binary random forest of CART trees (Gini impurity, bootstrap samples,
// random feature subsets per split). Probabilities are the mean of the
// per-tree leaf class-1 fractions.
class RandomForest {
 public:
  void fit(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
           const ForestOptions& options = {});
  double predict_proba(std::span<const double> row) const;
  bool trained() const { return !trees_.empty(); }

  // Line-oriented text encoding, one tree per line.
  std::string serialize() const;
  static RandomForest deserialize(const std::string& data);

  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1, right = -1;
    double p1 = 0.0;
  };
  using Tree = std::vector<Node>;

 private:

  std::vector<Tree> trees_;
};

}  // namespace socq::ml
