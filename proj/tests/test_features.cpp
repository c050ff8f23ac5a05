#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "doctest.h"
#include "nvmfp/error.hpp"
#include "nvmfp/features.hpp"
#include "oracles.hpp"

using namespace nvmfp;

namespace {

Dataset make_dataset(const oracle::Rows& rows, const std::vector<int>& labels) {
  Dataset ds;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ds.samples.push_back({rows[i], labels[i], {}});
    ds.class_names[labels[i]] = default_class_name(labels[i]);
  }
  return ds;
}

oracle::Rows columns_of(const oracle::Rows& rows) {
  oracle::Rows cols(rows[0].size(), std::vector<double>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) cols[j][i] = rows[i][j];
  }
  return cols;
}

Matrix to_eigen(const oracle::Rows& rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

// Random labelled toy data where some columns carry class information.
struct Toy {
  oracle::Rows rows;
  std::vector<int> labels;
};

Toy random_toy(std::mt19937_64& gen, int n, int d, int classes) {
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_int_distribution<int> cls(0, classes - 1);
  Toy t;
  for (int i = 0; i < n; ++i) {
    const int y = i < classes ? i : cls(gen);
    std::vector<double> row(d);
    for (int j = 0; j < d; ++j) row[j] = noise(gen) + (j % 2 == 0 ? 0.8 * j * y / d : 0.0);
    t.rows.push_back(row);
    t.labels.push_back(y);
  }
  return t;
}

}  // namespace

TEST_CASE("standardizer") {
  const Dataset ds = make_dataset({{1.0, 5.0}, {3.0, 5.0}}, {0, 1});
  const auto s = fit_standardizer(ds);
  const auto z = apply_standardizer(s, ds);
  CHECK(z.samples[0].features[0] == doctest::Approx(-1.0));
  CHECK(z.samples[1].features[0] == doctest::Approx(1.0));
  CHECK(z.samples[0].features[1] == 0.0);
  CHECK(z.samples[1].features[1] == 0.0);
  CHECK(s.stdev[1] == 0.0);

  std::mt19937_64 gen(3);
  const auto toy = random_toy(gen, 40, 5, 3);
  const Dataset train = make_dataset(toy.rows, toy.labels);
  const auto zs = apply_standardizer(fit_standardizer(train), train);
  for (std::size_t j = 0; j < 5; ++j) {
    double m = 0, v = 0;
    for (const auto& r : zs.samples) m += r.features[j];
    m /= zs.size();
    for (const auto& r : zs.samples) v += (r.features[j] - m) * (r.features[j] - m);
    CHECK(std::abs(m) < 1e-9);
    CHECK(std::abs(std::sqrt(v / zs.size()) - 1.0) < 1e-9);
  }

  // Statistics come from train only; a shifted test set keeps its offset.
  auto shifted = toy;
  for (auto& r : shifted.rows) r[0] += 10.0;
  const auto zt = apply_standardizer(fit_standardizer(train), make_dataset(shifted.rows, shifted.labels));
  double m0 = 0;
  for (const auto& r : zt.samples) m0 += r.features[0];
  CHECK(m0 / zt.size() > 1.0);

  CHECK_THROWS_AS(fit_standardizer(Dataset{}), ValidationError);
  CHECK_THROWS_AS(apply_standardizer(StandardizationStats::identity(3), train), ValidationError);
}

TEST_CASE("mutual information analytic cases") {
  const std::vector<double> constant(10, 2.5);
  const std::vector<int> labels = {0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
  CHECK(mutual_information(constant, labels) == 0.0);

  std::vector<double> perfect;
  for (int y : labels) perfect.push_back(y);
  CHECK(mutual_information(perfect, labels) == doctest::Approx(std::log(2.0)).epsilon(1e-14));

  CHECK_THROWS_AS(mutual_information(perfect, std::vector<int>{0, 1}), ValidationError);
  CHECK_THROWS_AS(discretize(perfect, 1), ValidationError);

  const auto codes = discretize(std::vector<double>{0.0, 0.5, 1.0}, 4);
  CHECK(codes == std::vector<int>{0, 2, 3});
}

TEST_CASE("mutual information matches the joint-histogram oracle") {
  std::mt19937_64 gen(11);
  std::uniform_int_distribution<int> len(2, 80);
  std::uniform_int_distribution<int> nb(2, 20);
  std::uniform_int_distribution<int> ncls(2, 9);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = len(gen), bins = nb(gen), k = ncls(gen);
    std::uniform_int_distribution<int> cls(0, k - 1);
    std::vector<double> f(n), g(n);
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) {
      y[i] = cls(gen);
      f[i] = normal(gen) + 0.5 * y[i];
      g[i] = 0.7 * f[i] + normal(gen);
    }
    CHECK(std::abs(mutual_information(f, y, bins) - oracle::mutual_information(f, y, bins)) <= 1e-12);
    const double ab = mutual_information(f, g, bins);
    const double ref = oracle::mutual_information(oracle::bin_codes(f, bins), oracle::bin_codes(g, bins));
    CHECK(std::abs(ab - ref) <= 1e-12);
    CHECK(std::abs(ab - mutual_information(g, f, bins)) <= 1e-12);

    const auto fc = discretize(f, bins);
    CHECK(fc == oracle::bin_codes(f, bins));
    const double mi = mutual_information_codes(fc, y);
    CHECK(mi >= 0.0);
    CHECK(mi <= std::min(entropy_codes(fc), entropy_codes(y)) + 1e-12);
  }
}

TEST_CASE("mrmr matches the recompute-from-scratch greedy oracle") {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 3 + trial % 6;
    const auto toy = random_toy(gen, 60, d, 3);
    const Dataset ds = make_dataset(toy.rows, toy.labels);
    std::vector<double> ref_scores;
    const auto ref = oracle::mrmr(columns_of(toy.rows), toy.labels, d, 8, &ref_scores);
    const auto got = mrmr_select(ds, d, 8);
    CHECK(got.method == SelectorKind::Mrmr);
    CHECK(got.indices == ref);
    REQUIRE(got.scores.size() == ref_scores.size());
    for (std::size_t i = 0; i < ref_scores.size(); ++i) CHECK(got.scores[i] == doctest::Approx(ref_scores[i]));

    std::set<int> unique(got.indices.begin(), got.indices.end());
    CHECK(unique.size() == static_cast<std::size_t>(d));
    for (int k = 1; k <= d; ++k) {
      const auto prefix = mrmr_select(ds, k, 8);
      CHECK(std::equal(prefix.indices.begin(), prefix.indices.end(), got.indices.begin()));
    }
  }
}

TEST_CASE("mrmr edge cases") {
  std::mt19937_64 gen(8);
  const auto toy = random_toy(gen, 30, 4, 2);
  const Dataset ds = make_dataset(toy.rows, toy.labels);
  const auto first = mrmr_select(ds, 1);
  int best = 0;
  for (int j = 1; j < 4; ++j) {
    if (oracle::mutual_information(columns_of(toy.rows)[j], toy.labels, 16) >
        oracle::mutual_information(columns_of(toy.rows)[best], toy.labels, 16) + 1e-12) {
      best = j;
    }
  }
  CHECK(first.indices == std::vector<int>{best});
  CHECK_THROWS_AS(mrmr_select(ds, 0), ValidationError);
  CHECK_THROWS_AS(mrmr_select(ds, 5), ValidationError);

  // Duplicate columns tie on relevance; the lower index goes first.
  oracle::Rows dup;
  for (const auto& r : toy.rows) dup.push_back({r[0], r[0]});
  CHECK(mrmr_select(make_dataset(dup, toy.labels), 2).indices == std::vector<int>{0, 1});
}

TEST_CASE("nca objective and gradient against direct evaluation") {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> wdist(0.5, 1.5);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 2 + trial % 4;
    const auto toy = random_toy(gen, 12 + trial, d, 2 + trial % 3);
    const Matrix x = to_eigen(toy.rows);
    for (bool at_init : {true, false}) {
      std::vector<double> w(d, 1.0);
      if (!at_init) {
        for (auto& v : w) v = wdist(gen);
      }
      CHECK(nca_objective(x, toy.labels, w) == doctest::Approx(oracle::nca_objective(toy.rows, toy.labels, w)));
      std::vector<double> grad;
      const double f = nca_gradient(x, toy.labels, w, grad);
      CHECK(f == doctest::Approx(oracle::nca_objective(toy.rows, toy.labels, w)));
      const auto fd = oracle::nca_gradient_fd(toy.rows, toy.labels, w, 1e-5);
      double scale = 0.0;
      for (double g : fd) scale = std::max(scale, std::abs(g));
      for (int m = 0; m < d; ++m) CHECK(std::abs(grad[m] - fd[m]) <= 1e-5 * std::max(scale, 1e-3));
    }
  }
}

TEST_CASE("nca ascent is monotone with a small rate") {
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 5; ++trial) {
    const auto toy = random_toy(gen, 20, 3, 2);
    const auto fit = nca_fit(to_eigen(toy.rows), toy.labels, 50, 1e-3);
    REQUIRE(fit.objective_history.size() == 51);
    for (std::size_t i = 1; i < fit.objective_history.size(); ++i) {
      CHECK(fit.objective_history[i] >= fit.objective_history[i - 1] - 1e-12);
    }
  }
}

TEST_CASE("nca ranking on constructed sets") {
  // Feature 0 separates the classes, feature 1 is noise, feature 2 is constant.
  std::mt19937_64 gen(6);
  std::normal_distribution<double> noise(0.0, 1.0);
  oracle::Rows rows;
  std::vector<int> labels;
  for (int i = 0; i < 40; ++i) {
    const int y = i % 2;
    rows.push_back({3.0 * y + 0.3 * noise(gen), noise(gen), 7.0});
    labels.push_back(y);
  }
  NcaOptions opt;
  opt.k = 3;
  opt.iters = 50;
  const auto r = nca_select(make_dataset(rows, labels), opt);
  CHECK(r.method == SelectorKind::Nca);
  CHECK(r.indices == std::vector<int>{0, 1, 2});
  CHECK(r.scores[2] == 0.0);

  oracle::Rows two;
  for (const auto& row : rows) two.push_back({row[0], row[1]});
  opt.k = 1;
  CHECK(nca_select(make_dataset(two, labels), opt).indices == std::vector<int>{0});

  opt.k = 4;
  CHECK_THROWS_AS(nca_select(make_dataset(rows, labels), opt), ValidationError);
  opt.k = 1;
  CHECK_THROWS_AS(nca_select(make_dataset(rows, std::vector<int>(40, 0)), opt), ValidationError);
}

TEST_CASE("select_features projects in ranking order") {
  const Dataset ds = make_dataset({{1, 2, 3}, {4, 5, 6}}, {0, 1});
  FeatureRanking r{SelectorKind::Mrmr, {2, 0}, {0.5, 0.1}};
  const auto out = select_features(ds, r);
  CHECK(out.samples[0].features == std::vector<double>{3, 1});
  CHECK(out.samples[1].features == std::vector<double>{6, 4});
  CHECK(out.samples[1].label == 1);
  FeatureRanking bad{SelectorKind::Mrmr, {3}, {0.0}};
  CHECK_THROWS_AS(select_features(ds, bad), RangeError);
}
