#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

namespace oracle {

double latency_formula(const nvmfp::ChipClassSpec& s, double chip_factor, double loc_factor, std::uint64_t wear) {
  double m = 1.0 + s.drift_amplitude * std::pow(static_cast<double>(wear) / static_cast<double>(s.drift_ref_cycles),
                                                s.drift_exponent);
  if (s.step_cycles && wear >= *s.step_cycles) m *= s.step_factor.value_or(1.0);
  return s.base_latency_us * chip_factor * loc_factor * m;
}

std::vector<int> bin_codes(const std::vector<double>& v, int bins) {
  std::vector<int> out(v.size(), 0);
  if (v.empty()) return out;
  const double lo = *std::min_element(v.begin(), v.end());
  const double hi = *std::max_element(v.begin(), v.end());
  if (hi == lo) return out;
  const double width = (hi - lo) / bins;
  for (std::size_t i = 0; i < v.size(); ++i) {
    int b = static_cast<int>(std::floor((v[i] - lo) / width));
    if (b >= bins) b = bins - 1;
    if (b < 0) b = 0;
    out[i] = b;
  }
  return out;
}

double mutual_information(const std::vector<int>& a, const std::vector<int>& b) {
  const int amin = *std::min_element(a.begin(), a.end());
  const int bmin = *std::min_element(b.begin(), b.end());
  const int na = *std::max_element(a.begin(), a.end()) - amin + 1;
  const int nb = *std::max_element(b.begin(), b.end()) - bmin + 1;
  std::vector<std::vector<double>> joint(na, std::vector<double>(nb, 0.0));
  for (std::size_t i = 0; i < a.size(); ++i) joint[a[i] - amin][b[i] - bmin] += 1.0;
  const double n = static_cast<double>(a.size());
  std::vector<double> pa(na, 0.0), pb(nb, 0.0);
  for (int i = 0; i < na; ++i) {
    for (int j = 0; j < nb; ++j) {
      pa[i] += joint[i][j] / n;
      pb[j] += joint[i][j] / n;
    }
  }
  double mi = 0.0;
  for (int i = 0; i < na; ++i) {
    for (int j = 0; j < nb; ++j) {
      const double p = joint[i][j] / n;
      if (p > 0.0) mi += p * std::log(p / (pa[i] * pb[j]));
    }
  }
  return std::max(0.0, mi);
}

double mutual_information(const std::vector<double>& f, const std::vector<int>& labels, int bins) {
  return mutual_information(bin_codes(f, bins), labels);
}

std::vector<int> mrmr(const Rows& columns, const std::vector<int>& labels, int k, int bins,
                      std::vector<double>* scores) {
  const int d = static_cast<int>(columns.size());
  std::vector<std::vector<int>> codes;
  for (const auto& c : columns) codes.push_back(bin_codes(c, bins));
  std::vector<int> chosen;
  if (scores) scores->clear();
  for (int step = 0; step < k; ++step) {
    int best = -1;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < d; ++j) {
      if (std::find(chosen.begin(), chosen.end(), j) != chosen.end()) continue;
      double score = mutual_information(codes[j], labels);
      if (!chosen.empty()) {
        double red = 0.0;
        for (int s : chosen) red += mutual_information(codes[j], codes[s]);
        score -= red / static_cast<double>(chosen.size());
      }
      if (score > best_score + 1e-12) {
        best_score = score;
        best = j;
      }
    }
    chosen.push_back(best);
    if (scores) scores->push_back(best_score);
  }
  return chosen;
}

namespace {

double weighted_sq_distance(const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& w) {
  double s = 0.0;
  for (std::size_t m = 0; m < a.size(); ++m) s += w[m] * w[m] * (a[m] - b[m]) * (a[m] - b[m]);
  return s;
}

}  // namespace

double nca_objective(const Rows& x, const std::vector<int>& labels, const std::vector<double>& w) {
  const std::size_t n = x.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> d(n, 0.0);
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      d[j] = weighted_sq_distance(x[i], x[j], w);
      dmin = std::min(dmin, d[j]);
    }
    double z = 0.0, same = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double e = std::exp(-(d[j] - dmin));
      z += e;
      if (labels[j] == labels[i]) same += e;
    }
    total += same / z;
  }
  return total / static_cast<double>(n);
}

std::vector<double> nca_gradient_fd(const Rows& x, const std::vector<int>& labels, const std::vector<double>& w,
                                    double h) {
  std::vector<double> g(w.size());
  for (std::size_t m = 0; m < w.size(); ++m) {
    auto up = w, down = w;
    up[m] += h;
    down[m] -= h;
    g[m] = (nca_objective(x, labels, up) - nca_objective(x, labels, down)) / (2.0 * h);
  }
  return g;
}

namespace {

double sq_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t m = 0; m < a.size(); ++m) s += (a[m] - b[m]) * (a[m] - b[m]);
  return s;
}

}  // namespace

int knn_predict(const Rows& train, const std::vector<int>& labels, const std::vector<double>& query, int k) {
  std::vector<std::pair<double, std::size_t>> all;
  for (std::size_t i = 0; i < train.size(); ++i) all.emplace_back(sq_distance(train[i], query), i);
  std::sort(all.begin(), all.end());
  std::map<int, int> votes;
  std::map<int, double> nearest;
  for (int r = 0; r < k; ++r) {
    const int c = labels[all[r].second];
    votes[c] += 1;
    if (!nearest.count(c)) nearest[c] = all[r].first;
  }
  int top = 0;
  for (const auto& [c, v] : votes) top = std::max(top, v);
  int best = -1;
  for (const auto& [c, v] : votes) {
    if (v != top) continue;
    if (best < 0 || nearest[c] < nearest[best]) best = c;
  }
  return best;
}

double loo_1nn_accuracy(const Rows& x, const std::vector<int>& labels) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (j == i) continue;
      const double d = sq_distance(x[i], x[j]);
      if (d < best) {
        best = d;
        arg = j;
      }
    }
    correct += labels[arg] == labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(x.size());
}

namespace {

double gini(const std::vector<int>& labels, const std::vector<std::size_t>& members) {
  if (members.empty()) return 0.0;
  std::map<int, double> count;
  for (std::size_t i : members) count[labels[i]] += 1.0;
  double g = 1.0;
  for (const auto& [c, v] : count) {
    const double p = v / static_cast<double>(members.size());
    g -= p * p;
  }
  return g;
}

}  // namespace

std::optional<Split> best_gini_split(const Rows& x, const std::vector<int>& labels, int min_leaf) {
  const std::size_t n = x.size();
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  const double parent = gini(labels, all);
  std::vector<Split> candidates;
  for (std::size_t f = 0; f < x[0].size(); ++f) {
    std::vector<double> values;
    for (const auto& row : x) values.push_back(row[f]);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t t = 0; t + 1 < values.size(); ++t) {
      double threshold = values[t] + (values[t + 1] - values[t]) / 2.0;
      if (!(threshold < values[t + 1])) threshold = values[t];
      std::vector<std::size_t> left, right;
      for (std::size_t i = 0; i < n; ++i) (x[i][f] <= threshold ? left : right).push_back(i);
      if (static_cast<int>(left.size()) < min_leaf || static_cast<int>(right.size()) < min_leaf) continue;
      const double child = (static_cast<double>(left.size()) * gini(labels, left) +
                            static_cast<double>(right.size()) * gini(labels, right)) /
                           static_cast<double>(n);
      candidates.push_back({static_cast<int>(f), threshold, parent - child});
    }
  }
  if (candidates.empty()) return std::nullopt;
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& c : candidates) top = std::max(top, c.decrease);
  // Candidates are generated in (feature, threshold) order, so the first one
  // within rounding of the best is the tie-break winner.
  for (const auto& c : candidates) {
    if (c.decrease >= top - 1e-12) return c;
  }
  return std::nullopt;
}

double rbf(const std::vector<double>& a, const std::vector<double>& b, double gamma) {
  return std::exp(-gamma * sq_distance(a, b));
}

double dual_objective(const Rows& x, const std::vector<int>& y, const std::vector<double>& alpha, double gamma) {
  double lin = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    lin += alpha[i];
    for (std::size_t j = 0; j < x.size(); ++j) quad += alpha[i] * alpha[j] * y[i] * y[j] * rbf(x[i], x[j], gamma);
  }
  return lin - 0.5 * quad;
}

namespace {

// Gaussian elimination with partial pivoting; false if singular.
bool solve_linear(std::vector<std::vector<double>> a, std::vector<double> b, std::vector<double>& out) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    if (std::abs(a[piv][c]) < 1e-13) return false;
    std::swap(a[piv], a[c]);
    std::swap(b[piv], b[c]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  out.assign(n, 0.0);
  for (std::size_t r = n; r-- > 0;) {
    double s = b[r];
    for (std::size_t k = r + 1; k < n; ++k) s -= a[r][k] * out[k];
    out[r] = s / a[r][r];
  }
  return true;
}

}  // namespace

QpSolution svm_dual_exact(const Rows& x, const std::vector<int>& y, double C, double gamma) {
  const std::size_t n = x.size();
  std::vector<std::vector<double>> q(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) q[i][j] = y[i] * y[j] * rbf(x[i], x[j], gamma);
  }
  QpSolution best;
  best.objective = -std::numeric_limits<double>::infinity();
  std::size_t combos = 1;
  for (std::size_t i = 0; i < n; ++i) combos *= 3;
  for (std::size_t code = 0; code < combos; ++code) {
    // status per variable: 0 -> alpha = 0, 1 -> alpha = C, 2 -> free
    std::vector<int> status(n);
    std::size_t c = code;
    for (std::size_t i = 0; i < n; ++i) {
      status[i] = static_cast<int>(c % 3);
      c /= 3;
    }
    std::vector<double> alpha(n, 0.0);
    std::vector<std::size_t> free;
    for (std::size_t i = 0; i < n; ++i) {
      if (status[i] == 1) alpha[i] = C;
      if (status[i] == 2) free.push_back(i);
    }
    if (free.empty()) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += alpha[i] * y[i];
      if (std::abs(s) > 1e-12) continue;
    } else {
      // [Q_FF  y_F] [a_F]   [1 - Q_FB a_B]
      // [y_F'   0 ] [ b ] = [   -y_B' a_B ]
      const std::size_t m = free.size();
      std::vector<std::vector<double>> a(m + 1, std::vector<double>(m + 1, 0.0));
      std::vector<double> rhs(m + 1, 0.0);
      for (std::size_t r = 0; r < m; ++r) {
        const std::size_t i = free[r];
        for (std::size_t s = 0; s < m; ++s) a[r][s] = q[i][free[s]];
        a[r][m] = y[i];
        a[m][r] = y[i];
        double fixed = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          if (status[j] == 1) fixed += q[i][j] * alpha[j];
        }
        rhs[r] = 1.0 - fixed;
      }
      double fixed_sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) fixed_sum += alpha[j] * y[j];
      rhs[m] = -fixed_sum;
      std::vector<double> sol;
      if (!solve_linear(a, rhs, sol)) continue;
      bool feasible = true;
      for (std::size_t r = 0; r < m; ++r) {
        if (sol[r] < -1e-12 || sol[r] > C + 1e-12) feasible = false;
        alpha[free[r]] = std::clamp(sol[r], 0.0, C);
      }
      if (!feasible) continue;
    }
    const double obj = dual_objective(x, y, alpha, gamma);
    if (obj > best.objective) {
      best.objective = obj;
      best.alpha = alpha;
    }
  }
  return best;
}

double svm_dual_grid(const Rows& x, const std::vector<int>& y, double C, double gamma, int steps) {
  const std::size_t n = x.size();
  std::vector<std::vector<double>> q(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) q[i][j] = y[i] * y[j] * rbf(x[i], x[j], gamma);
  }
  std::vector<int> idx(n - 1, 0);
  std::vector<double> alpha(n);
  double best = -std::numeric_limits<double>::infinity();
  for (;;) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      alpha[i] = C * idx[i] / steps;
      s += alpha[i] * y[i];
    }
    alpha[n - 1] = -s * y[n - 1];
    if (alpha[n - 1] >= -1e-12 && alpha[n - 1] <= C + 1e-12) {
      alpha[n - 1] = std::clamp(alpha[n - 1], 0.0, C);
      double lin = 0.0, quad = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        lin += alpha[i];
        for (std::size_t j = 0; j < n; ++j) quad += alpha[i] * alpha[j] * q[i][j];
      }
      best = std::max(best, lin - 0.5 * quad);
    }
    std::size_t p = 0;
    while (p < idx.size() && ++idx[p] > steps) idx[p++] = 0;
    if (p == idx.size()) break;
  }
  return best;
}

std::string report_violation(const nvmfp::EvalReport& r, const std::vector<int>& truth) {
  const std::size_t k = r.classes.size();
  if (r.confusion.size() != k) return "confusion has wrong row count";
  if (r.tpr.size() != k || r.fnr.size() != k) return "tpr/fnr have wrong length";
  std::size_t total = 0, trace = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (r.confusion[i].size() != k) return "confusion row " + std::to_string(i) + " has wrong length";
    std::size_t row = 0;
    for (auto v : r.confusion[i]) row += v;
    const auto expected = static_cast<std::size_t>(std::count(truth.begin(), truth.end(), r.classes[i]));
    if (row != expected) return "row sum mismatch for class " + std::to_string(r.classes[i]);
    if (std::abs(r.tpr[i] + r.fnr[i] - 1.0) > 1e-12) return "tpr + fnr != 1 for class " + std::to_string(r.classes[i]);
    if (row > 0 && std::abs(r.tpr[i] - static_cast<double>(r.confusion[i][i]) / row) > 1e-15) {
      return "tpr mismatch for class " + std::to_string(r.classes[i]);
    }
    total += row;
    trace += r.confusion[i][i];
  }
  if (total != r.total || total != truth.size()) return "total mismatch";
  if (total > 0 && std::abs(r.accuracy - static_cast<double>(trace) / total) > 1e-15) return "accuracy != trace / total";
  return {};
}

}  // namespace oracle
