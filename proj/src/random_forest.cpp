#include "socq/random_forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace socq::ml {

namespace {

struct Builder {
  const std::vector<std::vector<double>>& x;
  const std::vector<int>& y;
  const ForestOptions& opt;
  int n_features;
  int max_features;
  std::mt19937_64& rng;

  static double gini(double pos, double n) {
    if (n == 0) return 0.0;
    double p = pos / n;
    return 2.0 * p * (1.0 - p);
  }

  int build(std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi, int depth,
            std::vector<RandomForest::Node>& tree) {
    const double n = static_cast<double>(hi - lo);
    double pos = 0;
    for (auto i = lo; i < hi; ++i) pos += y[idx[i]];
    int id = static_cast<int>(tree.size());
    tree.push_back({});
    tree[id].p1 = pos / n;
    if (pos == 0 || pos == n || depth >= opt.max_depth ||
        hi - lo < 2 * static_cast<std::size_t>(opt.min_samples_leaf))
      return id;

    std::vector<int> feats(static_cast<std::size_t>(n_features));
    std::iota(feats.begin(), feats.end(), 0);
    std::shuffle(feats.begin(), feats.end(), rng);
    feats.resize(static_cast<std::size_t>(max_features));

    double best_score = gini(pos, n);
    int best_f = -1;
    double best_t = 0;
    std::vector<std::pair<double, int>> vals(hi - lo);
    for (int f : feats) {
      for (auto i = lo; i < hi; ++i) vals[i - lo] = {x[idx[i]][f], y[idx[i]]};
      std::sort(vals.begin(), vals.end());
      double left_pos = 0;
      for (std::size_t k = 0; k + 1 < vals.size(); ++k) {
        left_pos += vals[k].second;
        if (vals[k].first == vals[k + 1].first) continue;
        double nl = static_cast<double>(k + 1), nr = n - nl;
        if (nl < opt.min_samples_leaf || nr < opt.min_samples_leaf) continue;
        double score = (nl * gini(left_pos, nl) + nr * gini(pos - left_pos, nr)) / n;
        if (score < best_score - 1e-12) {
          best_score = score;
          best_f = f;
          best_t = 0.5 * (vals[k].first + vals[k + 1].first);
        }
      }
    }
    if (best_f < 0) return id;
    auto mid = std::partition(idx.begin() + static_cast<long>(lo), idx.begin() + static_cast<long>(hi),
                              [&](std::size_t i) { return x[i][best_f] <= best_t; });
    auto m = static_cast<std::size_t>(mid - idx.begin());
    int l = build(idx, lo, m, depth + 1, tree);
    int r = build(idx, m, hi, depth + 1, tree);
    tree[id].feature = best_f;
    tree[id].threshold = best_t;
    tree[id].left = l;
    tree[id].right = r;
    return id;
  }
};

}  // namespace

void RandomForest::fit(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                       const ForestOptions& options) {
  if (x.empty() || x.size() != y.size()) throw std::invalid_argument("forest: bad training shape");
  const int n_features = static_cast<int>(x.front().size());
  int max_features = options.max_features > 0
                         ? options.max_features
                         : std::max(1, static_cast<int>(std::lround(std::sqrt(n_features))));
  max_features = std::min(std::max(max_features, 1), std::max(n_features, 1));
  std::mt19937_64 rng(options.seed);
  trees_.clear();
  std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
  for (int t = 0; t < options.n_trees; ++t) {
    std::vector<std::size_t> idx(x.size());
    for (auto& i : idx) i = pick(rng);
    Tree tree;
    if (n_features == 0) {
      double pos = 0;
      for (auto i : idx) pos += y[i];
      tree.push_back({-1, 0, -1, -1, pos / static_cast<double>(idx.size())});
    } else {
      Builder b{x, y, options, n_features, max_features, rng};
      b.build(idx, 0, idx.size(), 0, tree);
    }
    trees_.push_back(std::move(tree));
  }
}

double RandomForest::predict_proba(std::span<const double> row) const {
  if (trees_.empty()) throw std::logic_error("forest not trained");
  double s = 0;
  for (const auto& tree : trees_) {
    int n = 0;
    while (tree[n].feature >= 0)
      n = row[tree[n].feature] <= tree[n].threshold ? tree[n].left : tree[n].right;
    s += tree[n].p1;
  }
  return s / static_cast<double>(trees_.size());
}

std::string RandomForest::serialize() const {
  std::ostringstream out;
  out.precision(17);
  out << trees_.size() << "\n";
  for (const auto& tree : trees_) {
    out << tree.size();
    for (const auto& n : tree)
      out << ' ' << n.feature << ' ' << n.threshold << ' ' << n.left << ' ' << n.right << ' ' << n.p1;
    out << "\n";
  }
  return out.str();
}

RandomForest RandomForest::deserialize(const std::string& data) {
  std::istringstream in(data);
  RandomForest f;
  std::size_t n_trees = 0;
  if (!(in >> n_trees)) throw std::runtime_error("forest: bad header");
  f.trees_.resize(n_trees);
  for (auto& tree : f.trees_) {
    std::size_t n = 0;
    if (!(in >> n)) throw std::runtime_error("forest: truncated");
    tree.resize(n);
    for (auto& node : tree)
      if (!(in >> node.feature >> node.threshold >> node.left >> node.right >> node.p1))
        throw std::runtime_error("forest: truncated node");
  }
  return f;
}

}  // namespace socq::ml
