#include "nvmfp/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "nvmfp/error.hpp"

namespace nvmfp {

Matrix to_matrix(const Dataset& ds) {
  const std::size_t d = ds.arity();
  Matrix x(static_cast<Eigen::Index>(ds.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& f = ds.samples[i].features;
    if (f.size() != d) throw ValidationError("ragged dataset");
    for (std::size_t j = 0; j < d; ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = f[j];
  }
  return x;
}

Matrix select_columns(const Matrix& x, std::span<const int> columns) {
  Matrix out(x.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] < 0 || columns[c] >= x.cols()) throw RangeError("feature index out of range");
    out.col(static_cast<Eigen::Index>(c)) = x.col(columns[c]);
  }
  return out;
}

// ---------------------------------------------------------------------------

StandardizationStats StandardizationStats::identity(std::size_t arity) {
  return {std::vector<double>(arity, 0.0), std::vector<double>(arity, 1.0)};
}

StandardizationStats fit_standardizer(const Matrix& x) {
  if (x.rows() == 0) throw ValidationError("cannot fit a standardizer on an empty dataset");
  const auto d = static_cast<std::size_t>(x.cols());
  StandardizationStats s{std::vector<double>(d), std::vector<double>(d)};
  const double n = static_cast<double>(x.rows());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const auto col = x.col(j);
    const double mean = col.sum() / n;
    s.mean[j] = mean;
    if (col.maxCoeff() == col.minCoeff()) {
      s.mean[j] = col(0);
      s.stdev[j] = 0.0;
      continue;
    }
    s.stdev[j] = std::sqrt((col.array() - mean).square().sum() / n);
  }
  return s;
}

StandardizationStats fit_standardizer(const Dataset& train) {
  if (train.empty()) throw ValidationError("cannot fit a standardizer on an empty dataset");
  return fit_standardizer(to_matrix(train));
}

Matrix apply_standardizer(const StandardizationStats& stats, const Matrix& x) {
  if (static_cast<std::size_t>(x.cols()) != stats.arity()) {
    throw ValidationError("standardizer arity " + std::to_string(stats.arity()) +
                          " does not match data arity " + std::to_string(x.cols()));
  }
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      out(i, j) = standardize_value(stats, static_cast<std::size_t>(j), x(i, j));
    }
  }
  return out;
}

Dataset apply_standardizer(const StandardizationStats& stats, const Dataset& ds) {
  Dataset out = ds;
  for (auto& s : out.samples) {
    if (s.features.size() != stats.arity()) {
      throw ValidationError("standardizer arity " + std::to_string(stats.arity()) +
                            " does not match data arity " + std::to_string(s.features.size()));
    }
    for (std::size_t j = 0; j < s.features.size(); ++j) s.features[j] = standardize_value(stats, j, s.features[j]);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<int> discretize(std::span<const double> values, int bins) {
  if (bins < 2) throw ValidationError("bins must be >= 2");
  std::vector<int> codes(values.size(), 0);
  if (values.empty()) return codes;
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo)) return codes;
  const double width = (hi - lo) / bins;
  for (std::size_t i = 0; i < values.size(); ++i) {
    int b = static_cast<int>(std::floor((values[i] - lo) / width));
    codes[i] = std::clamp(b, 0, bins - 1);
  }
  return codes;
}

namespace {

// Maps arbitrary integer codes to 0..k-1 in ascending code order.
std::vector<int> densify(std::span<const int> codes, int& levels) {
  std::map<int, int> index;
  for (int c : codes) index.emplace(c, 0);
  int next = 0;
  for (auto& [c, i] : index) i = next++;
  levels = next;
  std::vector<int> out(codes.size());
  for (std::size_t i = 0; i < codes.size(); ++i) out[i] = index[codes[i]];
  return out;
}

}  // namespace

double mutual_information_codes(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) {
    throw ValidationError("mutual information needs equal-length inputs (" + std::to_string(a.size()) +
                          " vs " + std::to_string(b.size()) + ")");
  }
  if (a.empty()) return 0.0;
  int na = 0;
  int nb = 0;
  const auto da = densify(a, na);
  const auto db = densify(b, nb);
  std::vector<double> joint(static_cast<std::size_t>(na) * nb, 0.0);
  std::vector<double> ca(na, 0.0);
  std::vector<double> cb(nb, 0.0);
  for (std::size_t i = 0; i < da.size(); ++i) {
    joint[static_cast<std::size_t>(da[i]) * nb + db[i]] += 1.0;
    ca[da[i]] += 1.0;
    cb[db[i]] += 1.0;
  }
  const double n = static_cast<double>(a.size());
  double mi = 0.0;
  for (int x = 0; x < na; ++x) {
    for (int y = 0; y < nb; ++y) {
      const double c = joint[static_cast<std::size_t>(x) * nb + y];
      if (c > 0.0) mi += (c / n) * std::log(c * n / (ca[x] * cb[y]));
    }
  }
  return std::max(0.0, mi);
}

double entropy_codes(std::span<const int> codes) {
  if (codes.empty()) return 0.0;
  std::map<int, double> counts;
  for (int c : codes) counts[c] += 1.0;
  const double n = static_cast<double>(codes.size());
  double h = 0.0;
  for (const auto& [c, k] : counts) h -= (k / n) * std::log(k / n);
  return h;
}

double mutual_information(std::span<const double> feature, std::span<const int> labels, int bins) {
  if (feature.size() != labels.size()) {
    throw ValidationError("feature and label lengths differ (" + std::to_string(feature.size()) +
                          " vs " + std::to_string(labels.size()) + ")");
  }
  const auto codes = discretize(feature, bins);
  return mutual_information_codes(codes, labels);
}

double mutual_information(std::span<const double> a, std::span<const double> b, int bins) {
  if (a.size() != b.size()) throw ValidationError("feature lengths differ");
  const auto ca = discretize(a, bins);
  const auto cb = discretize(b, bins);
  return mutual_information_codes(ca, cb);
}

// ---------------------------------------------------------------------------

std::string_view to_string(SelectorKind k) noexcept {
  switch (k) {
    case SelectorKind::None: return "NONE";
    case SelectorKind::Mrmr: return "MRMR";
    case SelectorKind::Nca: return "NCA";
  }
  return "?";
}

SelectorKind parse_selector(std::string_view s) {
  if (s == "NONE" || s == "none" || s == "all") return SelectorKind::None;
  if (s == "MRMR" || s == "mrmr") return SelectorKind::Mrmr;
  if (s == "NCA" || s == "nca") return SelectorKind::Nca;
  throw ValidationError("unknown feature selector '" + std::string(s) + "'");
}

FeatureRanking mrmr_select(const Dataset& train, int k, int bins) {
  const int d = static_cast<int>(train.arity());
  if (train.empty()) throw ValidationError("mrmr_select: empty training set");
  if (k < 1 || k > d) {
    throw ValidationError("mrmr_select: k=" + std::to_string(k) + " out of range 1.." + std::to_string(d));
  }
  const Matrix x = to_matrix(train);
  const auto labels = train.labels();

  std::vector<std::vector<int>> codes(d);
  std::vector<double> relevance(d);
  for (int j = 0; j < d; ++j) {
    std::vector<double> col(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) col[i] = x(i, j);
    codes[j] = discretize(col, bins);
    relevance[j] = mutual_information_codes(codes[j], labels);
  }

  FeatureRanking ranking{SelectorKind::Mrmr, {}, {}};
  std::vector<bool> chosen(d, false);
  std::vector<double> redundancy_sum(d, 0.0);
  for (int step = 0; step < k; ++step) {
    int best = -1;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < d; ++j) {
      if (chosen[j]) continue;
      const double score = step == 0 ? relevance[j] : relevance[j] - redundancy_sum[j] / step;
      if (score > best_score) {
        best_score = score;
        best = j;
      }
    }
    chosen[best] = true;
    ranking.indices.push_back(best);
    ranking.scores.push_back(best_score);
    for (int j = 0; j < d; ++j) {
      if (!chosen[j]) redundancy_sum[j] += mutual_information_codes(codes[j], codes[best]);
    }
  }
  return ranking;
}

Dataset select_features(const Dataset& ds, const FeatureRanking& ranking) {
  Dataset out;
  out.class_names = ds.class_names;
  out.samples.reserve(ds.size());
  for (const auto& s : ds.samples) {
    FeatureVector fv;
    fv.label = s.label;
    fv.meta = s.meta;
    fv.features.reserve(ranking.size());
    for (int j : ranking.indices) {
      if (j < 0 || static_cast<std::size_t>(j) >= s.features.size()) throw RangeError("feature index out of range");
      fv.features.push_back(s.features[j]);
    }
    out.samples.push_back(std::move(fv));
  }
  return out;
}

}  // namespace nvmfp
