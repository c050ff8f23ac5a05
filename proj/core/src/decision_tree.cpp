#include <algorithm>
#include <cstdint>
#include <numeric>

#include "nvmfp/classifiers.hpp"
#include "nvmfp/error.hpp"

namespace nvmfp {

double gini_impurity(std::span<const int> counts, int total) noexcept {
  if (total <= 0) return 0.0;
  double sum_sq = 0.0;
  for (int c : counts) {
    const double p = static_cast<double>(c) / total;
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

namespace {

double midpoint(double lo, double hi) noexcept {
  const double m = lo + (hi - lo) / 2.0;
  return m < hi ? m : lo;
}

__extension__ typedef __int128 Wide;

// Minimizing the weighted child impurity is maximizing
//   sum_c l_c^2 / nl + sum_c r_c^2 / nr,
// kept as an exact fraction so equal splits compare equal.
struct SplitScore {
  Wide num = 0;
  Wide den = 1;

  bool better_than(const SplitScore& o) const noexcept { return num * o.den > o.num * den; }
};

std::int64_t sum_squares(const std::vector<int>& counts) noexcept {
  std::int64_t s = 0;
  for (int c : counts) s += static_cast<std::int64_t>(c) * c;
  return s;
}

}  // namespace

std::optional<SplitChoice> best_split(const Matrix& x, std::span<const int> class_index, int num_classes,
                                      std::span<const std::size_t> rows, int min_leaf) {
  const int n = static_cast<int>(rows.size());
  if (n < 2) return std::nullopt;
  std::vector<int> total(num_classes, 0);
  for (std::size_t r : rows) ++total[class_index[r]];
  const double parent = gini_impurity(total, n);

  std::optional<SplitChoice> best;
  SplitScore best_score;
  std::vector<std::size_t> order(rows.begin(), rows.end());
  std::vector<int> left(num_classes);
  std::vector<int> right(num_classes);
  for (Eigen::Index f = 0; f < x.cols(); ++f) {
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return x(a, f) < x(b, f) || (x(a, f) == x(b, f) && a < b);
    });
    std::fill(left.begin(), left.end(), 0);
    right = total;
    for (int i = 0; i + 1 < n; ++i) {
      const int c = class_index[order[i]];
      ++left[c];
      --right[c];
      const double v = x(order[i], f);
      const double next = x(order[i + 1], f);
      if (!(v < next)) continue;
      const int nl = i + 1;
      const int nr = n - nl;
      if (nl < min_leaf || nr < min_leaf) continue;
      const SplitScore score{static_cast<Wide>(sum_squares(left)) * nr + static_cast<Wide>(sum_squares(right)) * nl,
                             static_cast<Wide>(nl) * nr};
      if (!best || score.better_than(best_score)) {
        const double decrease = parent - (static_cast<double>(nl) / n) * gini_impurity(left, nl) -
                                (static_cast<double>(nr) / n) * gini_impurity(right, nr);
        best = SplitChoice{static_cast<int>(f), midpoint(v, next), decrease};
        best_score = score;
      }
    }
  }
  return best;
}

TreeParams fit_tree(const Matrix& x, const std::vector<int>& labels, const TreeOptions& options) {
  if (x.rows() == 0) throw ValidationError("decision tree: empty training set");
  if (static_cast<std::size_t>(x.rows()) != labels.size()) throw ValidationError("decision tree: label count mismatch");
  if (options.max_depth < 0) throw ValidationError("decision tree: max_depth must be >= 0");
  if (options.min_leaf < 1) throw ValidationError("decision tree: min_leaf must be >= 1");

  TreeParams tree;
  tree.options = options;
  tree.classes = labels;
  std::sort(tree.classes.begin(), tree.classes.end());
  tree.classes.erase(std::unique(tree.classes.begin(), tree.classes.end()), tree.classes.end());
  const int num_classes = static_cast<int>(tree.classes.size());
  std::vector<int> class_index(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    class_index[i] = static_cast<int>(std::lower_bound(tree.classes.begin(), tree.classes.end(), labels[i]) -
                                      tree.classes.begin());
  }

  struct Pending {
    int node;
    std::vector<std::size_t> rows;
  };
  std::vector<std::size_t> all(labels.size());
  std::iota(all.begin(), all.end(), 0);
  tree.nodes.push_back(TreeNode{});
  std::vector<Pending> stack;
  stack.push_back({0, std::move(all)});

  while (!stack.empty()) {
    Pending job = std::move(stack.back());
    stack.pop_back();
    TreeNode& node = tree.nodes[job.node];
    node.counts.assign(num_classes, 0);
    for (std::size_t r : job.rows) ++node.counts[class_index[r]];
    const bool pure = std::count_if(node.counts.begin(), node.counts.end(), [](int c) { return c > 0; }) <= 1;
    if (pure || node.depth >= options.max_depth) continue;
    const auto split = best_split(x, class_index, num_classes, job.rows, options.min_leaf);
    if (!split) continue;

    std::vector<std::size_t> lrows;
    std::vector<std::size_t> rrows;
    for (std::size_t r : job.rows) (x(r, split->feature) <= split->threshold ? lrows : rrows).push_back(r);
    const int depth = node.depth;
    node.feature = split->feature;
    node.threshold = split->threshold;
    const int li = static_cast<int>(tree.nodes.size());
    node.left = li;
    node.right = li + 1;
    // `node` is invalidated by the push_backs below.
    TreeNode child;
    child.depth = depth + 1;
    tree.nodes.push_back(child);
    tree.nodes.push_back(child);
    stack.push_back({li + 1, std::move(rrows)});
    stack.push_back({li, std::move(lrows)});
  }
  return tree;
}

int tree_leaf(const TreeParams& t, std::span<const double> query) {
  int i = 0;
  while (!t.nodes[i].is_leaf()) {
    const auto& n = t.nodes[i];
    if (static_cast<std::size_t>(n.feature) >= query.size()) throw ValidationError("decision tree: query arity mismatch");
    i = query[n.feature] <= n.threshold ? n.left : n.right;
  }
  return i;
}

int tree_predict(const TreeParams& t, std::span<const double> query, std::map<int, double>* leaf_counts) {
  const auto& leaf = t.nodes[tree_leaf(t, query)];
  std::size_t best = 0;
  for (std::size_t c = 1; c < leaf.counts.size(); ++c) {
    if (leaf.counts[c] > leaf.counts[best]) best = c;
  }
  if (leaf_counts) {
    leaf_counts->clear();
    for (std::size_t c = 0; c < leaf.counts.size(); ++c) (*leaf_counts)[t.classes[c]] = leaf.counts[c];
  }
  return t.classes[best];
}

}  // namespace nvmfp
