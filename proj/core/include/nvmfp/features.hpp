#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "nvmfp/matrix.hpp"
#include "nvmfp/protocol.hpp"

namespace nvmfp {

// ---------------------------------------------------------------------------
// Standardization

struct StandardizationStats {
  std::vector<double> mean;
  std::vector<double> stdev;  // population stdev; exactly 0 for constant columns

  std::size_t arity() const noexcept { return mean.size(); }
  // Mean 0 / stdev 1 on every feature.
  static StandardizationStats identity(std::size_t arity);

  bool operator==(const StandardizationStats&) const = default;
};

StandardizationStats fit_standardizer(const Dataset& train);
StandardizationStats fit_standardizer(const Matrix& x);
Dataset apply_standardizer(const StandardizationStats& stats, const Dataset& ds);
Matrix apply_standardizer(const StandardizationStats& stats, const Matrix& x);

inline double standardize_value(const StandardizationStats& s, std::size_t j, double v) noexcept {
  return s.stdev[j] > 0.0 ? (v - s.mean[j]) / s.stdev[j] : 0.0;
}

// ---------------------------------------------------------------------------
// Mutual information

// Equal-width bins over [min, max] of the column; a constant column maps to
// bin 0. Values at max fall in the last bin.
std::vector<int> discretize(std::span<const double> values, int bins);

// MI in nats between two discrete variables given as codes.
double mutual_information_codes(std::span<const int> a, std::span<const int> b);

// MI between an equal-width-discretized feature and class labels.
double mutual_information(std::span<const double> feature, std::span<const int> labels,
                          int bins = 16);

// MI between two features, each discretized independently.
double mutual_information(std::span<const double> a, std::span<const double> b, int bins = 16);

// Shannon entropy (nats) of discrete codes.
double entropy_codes(std::span<const int> codes);

// ---------------------------------------------------------------------------
// Feature selection

enum class SelectorKind { None, Mrmr, Nca };
std::string_view to_string(SelectorKind k) noexcept;
SelectorKind parse_selector(std::string_view s);

struct FeatureRanking {
  SelectorKind method = SelectorKind::None;
  std::vector<int> indices;
  std::vector<double> scores;

  std::size_t size() const noexcept { return indices.size(); }
  bool operator==(const FeatureRanking&) const = default;
};

// Greedy forward selection: first the feature with the highest label MI,
// then repeatedly the feature maximizing
//   MI(f; label) - mean_{s in selected} MI(f; s).
// Ties go to the lowest index. Scores are the objective at selection time.
FeatureRanking mrmr_select(const Dataset& train, int k = 25, int bins = 16);

struct NcaOptions {
  int k = 25;
  int iters = 200;
  double learning_rate = 0.01;
  // When non-zero and the training set is larger, a seeded subsample of
  // this many points is used for fitting.
  std::size_t max_samples = 0;
  std::uint64_t seed = 1;
};

struct NcaFit {
  std::vector<double> weights;
  std::vector<double> objective_history;  // objective before each step, then final
};

// Diagonal NCA. With d_w(x, y) = sum_m w_m^2 (x_m - y_m)^2 and
// p_ij = exp(-d_ij) / sum_{k != i} exp(-d_ik), the objective is the mean
// leave-one-out probability of choosing a same-class neighbour:
//   f(w) = (1/n) sum_i sum_{j : y_j = y_i, j != i} p_ij.
double nca_objective(const Matrix& x, std::span<const int> labels, std::span<const double> w);
double nca_gradient(const Matrix& x, std::span<const int> labels, std::span<const double> w,
                    std::vector<double>& grad);

// Full-batch gradient ascent from w = 1.
NcaFit nca_fit(const Matrix& x, std::span<const int> labels, int iters, double learning_rate);

// Ranks features by |w_m| * stdev_m (the scale a feature contributes to the
// learned metric; equal to |w_m| on standardized data). Ties by lowest index.
FeatureRanking nca_select(const Dataset& train, const NcaOptions& options = {});

// Projects every sample onto the ranking's indices, in ranking order.
Dataset select_features(const Dataset& ds, const FeatureRanking& ranking);

}  // namespace nvmfp
