#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "nvmfp/error.hpp"
#include "nvmfp/features.hpp"
#include "nvmfp/random.hpp"

namespace nvmfp {

namespace {

// Row-stochastic neighbour probabilities with p_ii = 0, computed in a
// numerically stable way (row minimum subtracted before exponentiation).
Matrix neighbour_probabilities(const Matrix& x, std::span<const double> w) {
  const Eigen::Index n = x.rows();
  Eigen::Map<const Vector> wv(w.data(), static_cast<Eigen::Index>(w.size()));
  // Centering does not change distances but limits cancellation in the
  // Gram-matrix expansion below.
  Matrix xw = x.rowwise() - x.colwise().mean();
  xw = xw * wv.asDiagonal();
  const Vector sq = xw.rowwise().squaredNorm();
  Matrix dist = -2.0 * (xw * xw.transpose());
  dist.colwise() += sq;
  dist.rowwise() += sq.transpose();

  Matrix p(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double row_min = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k != i) row_min = std::min(row_min, std::max(0.0, dist(i, k)));
    }
    double z = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      const double e = k == i ? 0.0 : std::exp(-(std::max(0.0, dist(i, k)) - row_min));
      p(i, k) = e;
      z += e;
    }
    p.row(i) /= z;
  }
  return p;
}

void check_inputs(const Matrix& x, std::span<const int> labels, std::span<const double> w) {
  if (static_cast<std::size_t>(x.rows()) != labels.size()) throw ValidationError("NCA: label count mismatch");
  if (static_cast<std::size_t>(x.cols()) != w.size()) throw ValidationError("NCA: weight count mismatch");
  if (x.rows() < 2) throw ValidationError("NCA: need at least 2 samples");
}

}  // namespace

double nca_objective(const Matrix& x, std::span<const int> labels, std::span<const double> w) {
  check_inputs(x, labels, w);
  const Matrix p = neighbour_probabilities(x, w);
  const Eigen::Index n = x.rows();
  double f = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k != i && labels[k] == labels[i]) f += p(i, k);
    }
  }
  return f / static_cast<double>(n);
}

double nca_gradient(const Matrix& x, std::span<const int> labels, std::span<const double> w,
                    std::vector<double>& grad) {
  check_inputs(x, labels, w);
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  const Matrix p = neighbour_probabilities(x, w);

  // W_ik = p_i p_ik - [y_k == y_i] p_ik; the gradient is
  //   df/dw_m = (2 w_m / n) sum_i sum_k W_ik (x_im - x_km)^2.
  Matrix wm(n, n);
  double f = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double pi = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k != i && labels[k] == labels[i]) pi += p(i, k);
    }
    f += pi;
    for (Eigen::Index k = 0; k < n; ++k) {
      wm(i, k) = pi * p(i, k) - (labels[k] == labels[i] ? p(i, k) : 0.0);
    }
  }

  const Matrix xc = x.rowwise() - x.colwise().mean();
  const Matrix x2 = xc.array().square().matrix();
  const Vector row_sum = wm.rowwise().sum();
  const Vector col_sum = wm.colwise().sum().transpose();
  const Matrix wx = wm * xc;
  const Eigen::RowVectorXd term =
      (x2.transpose() * row_sum).transpose() + (x2.transpose() * col_sum).transpose() -
      2.0 * (xc.array() * wx.array()).colwise().sum().matrix();

  grad.assign(static_cast<std::size_t>(d), 0.0);
  for (Eigen::Index m = 0; m < d; ++m) {
    grad[m] = 2.0 * w[m] * term(m) / static_cast<double>(n);
  }
  return f / static_cast<double>(n);
}

NcaFit nca_fit(const Matrix& x, std::span<const int> labels, int iters, double learning_rate) {
  if (iters < 0) throw ValidationError("NCA: iters must be >= 0");
  NcaFit fit;
  fit.weights.assign(static_cast<std::size_t>(x.cols()), 1.0);
  std::vector<double> grad;
  for (int it = 0; it < iters; ++it) {
    const double f = nca_gradient(x, labels, fit.weights, grad);
    if (!std::isfinite(f) ||
        !std::all_of(grad.begin(), grad.end(), [](double g) { return std::isfinite(g); })) {
      throw NumericError("NCA: non-finite objective or gradient at iteration " + std::to_string(it));
    }
    fit.objective_history.push_back(f);
    for (std::size_t m = 0; m < grad.size(); ++m) fit.weights[m] += learning_rate * grad[m];
  }
  fit.objective_history.push_back(nca_objective(x, labels, fit.weights));
  return fit;
}

FeatureRanking nca_select(const Dataset& train, const NcaOptions& opt) {
  const int d = static_cast<int>(train.arity());
  if (opt.k < 1 || opt.k > d) {
    throw ValidationError("nca_select: k=" + std::to_string(opt.k) + " out of range 1.." + std::to_string(d));
  }
  if (train.classes().size() < 2) throw ValidationError("nca_select: need at least 2 classes");

  Dataset fit_set = train;
  if (opt.max_samples > 0 && train.size() > opt.max_samples) {
    std::vector<std::size_t> idx(train.size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(derive_seed({opt.seed, 0x9ca5ULL}));
    rng.shuffle(idx);
    idx.resize(opt.max_samples);
    std::sort(idx.begin(), idx.end());
    fit_set = train.subset(idx);
  }

  const Matrix x = to_matrix(fit_set);
  const auto labels = fit_set.labels();
  const NcaFit fit = nca_fit(x, labels, opt.iters, opt.learning_rate);
  const StandardizationStats spread = fit_standardizer(x);

  std::vector<double> score(d);
  for (int m = 0; m < d; ++m) score[m] = std::abs(fit.weights[m]) * spread.stdev[m];
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return score[a] > score[b]; });

  FeatureRanking ranking{SelectorKind::Nca, {}, {}};
  for (int i = 0; i < opt.k; ++i) {
    ranking.indices.push_back(order[i]);
    ranking.scores.push_back(score[order[i]]);
  }
  return ranking;
}

}  // namespace nvmfp
