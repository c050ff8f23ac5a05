#include <algorithm>
#include <limits>

#include "nvmfp/classifiers.hpp"
#include "nvmfp/error.hpp"

namespace nvmfp {

KnnParams fit_knn(Matrix x, std::vector<int> labels, int k) {
  if (static_cast<std::size_t>(x.rows()) != labels.size()) throw ValidationError("KNN: label count mismatch");
  if (k < 1) throw ValidationError("KNN: k must be >= 1");
  if (static_cast<std::size_t>(k) > labels.size()) {
    throw ValidationError("KNN: k=" + std::to_string(k) + " exceeds training size " +
                          std::to_string(labels.size()));
  }
  return KnnParams{k, std::move(x), std::move(labels)};
}

std::vector<Neighbour> knn_neighbours(const KnnParams& m, std::span<const double> query) {
  if (static_cast<Eigen::Index>(query.size()) != m.train.cols()) throw ValidationError("KNN: query arity mismatch");
  Eigen::Map<const Eigen::RowVectorXd> q(query.data(), static_cast<Eigen::Index>(query.size()));
  const Vector d2 = (m.train.rowwise() - q).rowwise().squaredNorm();

  std::vector<Neighbour> all(static_cast<std::size_t>(d2.size()));
  for (Eigen::Index i = 0; i < d2.size(); ++i) all[i] = {static_cast<std::size_t>(i), d2(i)};
  const auto by_distance = [](const Neighbour& a, const Neighbour& b) {
    return a.sq_distance < b.sq_distance || (a.sq_distance == b.sq_distance && a.index < b.index);
  };
  const auto k = static_cast<std::size_t>(m.k);
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), by_distance);
  all.resize(k);
  return all;
}

int knn_vote(const KnnParams& m, std::span<const double> query, std::map<int, double>* votes) {
  const auto nn = knn_neighbours(m, query);
  std::map<int, int> count;
  std::map<int, double> closest;
  for (const auto& n : nn) {
    const int label = m.labels[n.index];
    ++count[label];
    closest.try_emplace(label, n.sq_distance);  // neighbours arrive nearest first
  }
  int best = 0;
  int best_count = -1;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const auto& [label, c] : count) {
    const double d = closest[label];
    if (c > best_count || (c == best_count && d < best_dist)) {
      best = label;
      best_count = c;
      best_dist = d;
    }
  }
  if (votes) {
    votes->clear();
    for (const auto& [label, c] : count) (*votes)[label] = c;
  }
  return best;
}

}  // namespace nvmfp
