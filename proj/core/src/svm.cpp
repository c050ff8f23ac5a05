#include <algorithm>
#include <cmath>
#include <limits>

#include "nvmfp/classifiers.hpp"
#include "nvmfp/error.hpp"
#include "nvmfp/parallel.hpp"

namespace nvmfp {

namespace {

constexpr double kTau = 1e-12;

Matrix kernel_matrix(const Matrix& x, double gamma) {
  const Vector sq = x.rowwise().squaredNorm();
  Matrix k = -2.0 * (x * x.transpose());
  k.colwise() += sq;
  k.rowwise() += sq.transpose();
  for (Eigen::Index i = 0; i < k.rows(); ++i) {
    for (Eigen::Index j = 0; j < k.cols(); ++j) {
      const double v = std::exp(-gamma * std::max(0.0, k(i, j)));
      if (!std::isfinite(v)) throw NumericError("SVM: non-finite kernel value");
      k(i, j) = v;
    }
    k(i, i) = 1.0;
  }
  return k;
}

}  // namespace

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::exp(-gamma * s);
}

double auto_gamma(const Matrix& x) {
  if (x.cols() == 0 || x.rows() == 0) return 1.0;
  const auto mean = x.colwise().mean();
  const double mean_var = (x.rowwise() - mean).array().square().colwise().mean().mean();
  return mean_var > 0.0 ? 1.0 / (static_cast<double>(x.cols()) * mean_var) : 1.0 / static_cast<double>(x.cols());
}

BinarySvmSolution solve_binary_svm(const Matrix& x, std::span<const int> y, double C, double gamma,
                                   double tol, int max_passes) {
  const Eigen::Index n = x.rows();
  if (static_cast<std::size_t>(n) != y.size()) throw ValidationError("SVM: label count mismatch");
  if (!(C > 0.0)) throw ValidationError("SVM: C must be > 0");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw NumericError("SVM: gamma must be finite and > 0");
  for (int v : y) {
    if (v != 1 && v != -1) throw ValidationError("SVM: binary labels must be +1/-1");
  }

  const Matrix k = kernel_matrix(x, gamma);
  BinarySvmSolution sol;
  sol.alpha.assign(static_cast<std::size_t>(n), 0.0);
  std::vector<double>& alpha = sol.alpha;
  // Gradient of 1/2 a'Qa - e'a with Q_ij = y_i y_j K_ij.
  std::vector<double> grad(static_cast<std::size_t>(n), -1.0);

  const std::size_t max_iter = static_cast<std::size_t>(std::max(1, max_passes)) *
                               std::max<std::size_t>(10000, 100 * static_cast<std::size_t>(n));
  for (;;) {
    // i: maximal violator in I_up.
    double gmax = -std::numeric_limits<double>::infinity();
    Eigen::Index i = -1;
    for (Eigen::Index t = 0; t < n; ++t) {
      if (y[t] == 1 ? alpha[t] < C : alpha[t] > 0.0) {
        const double v = -y[t] * grad[t];
        if (v >= gmax) {
          gmax = v;
          i = t;
        }
      }
    }
    // j: second-order choice in I_low; gmax2 tracks max over I_low of y_t G_t.
    double gmax2 = -std::numeric_limits<double>::infinity();
    Eigen::Index j = -1;
    double best_obj = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      if (!(y[t] == 1 ? alpha[t] > 0.0 : alpha[t] < C)) continue;
      const double yg = y[t] * grad[t];
      gmax2 = std::max(gmax2, yg);
      if (i < 0) continue;
      const double diff = gmax + yg;
      if (diff > 0.0) {
        double quad = k(i, i) + k(t, t) - 2.0 * k(i, t);
        if (quad <= 0.0) quad = kTau;
        const double obj = -(diff * diff) / quad;
        if (obj <= best_obj) {
          best_obj = obj;
          j = t;
        }
      }
    }
    if (i < 0 || j < 0 || gmax + gmax2 < tol) {
      sol.converged = true;
      break;
    }
    if (sol.iterations >= max_iter) {
      sol.converged = false;
      break;
    }
    ++sol.iterations;

    const double ai_old = alpha[i];
    const double aj_old = alpha[j];
    if (y[i] != y[j]) {
      double quad = k(i, i) + k(j, j) + 2.0 * (y[i] * y[j] * k(i, j));
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = C - diff;
        }
      } else if (alpha[j] > C) {
        alpha[j] = C;
        alpha[i] = C + diff;
      }
    } else {
      double quad = k(i, i) + k(j, j) - 2.0 * (y[i] * y[j] * k(i, j));
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = sum - C;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > C) {
        if (alpha[j] > C) {
          alpha[j] = C;
          alpha[i] = sum - C;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }

    const double dai = alpha[i] - ai_old;
    const double daj = alpha[j] - aj_old;
    for (Eigen::Index t = 0; t < n; ++t) {
      grad[t] += y[t] * (y[i] * k(i, t) * dai + y[j] * k(j, t) * daj);
    }
  }

  // Bias: average over free vectors, else the middle of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  int n_free = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (alpha[t] >= C) {
      if (y[t] == -1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0.0) {
      if (y[t] == 1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  double rho = 0.0;
  if (n_free > 0) rho = sum_free / n_free;
  else if (std::isfinite(ub) && std::isfinite(lb)) rho = (ub + lb) / 2.0;
  else if (std::isfinite(ub)) rho = ub;
  else if (std::isfinite(lb)) rho = lb;
  sol.bias = -rho;
  return sol;
}

double svm_dual_objective(const Matrix& x, std::span<const int> y, std::span<const double> alpha, double gamma) {
  const Eigen::Index n = x.rows();
  double linear = 0.0;
  double quad = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    linear += alpha[i];
    for (Eigen::Index j = 0; j < n; ++j) {
      const std::span<const double> xi(x.row(i).data(), static_cast<std::size_t>(x.cols()));
      const std::span<const double> xj(x.row(j).data(), static_cast<std::size_t>(x.cols()));
      quad += alpha[i] * alpha[j] * y[i] * y[j] * rbf_kernel(xi, xj, gamma);
    }
  }
  return linear - 0.5 * quad;
}

double svm_decision(const BinarySvm& m, double gamma, std::span<const double> query) {
  if (static_cast<Eigen::Index>(query.size()) != m.support.cols()) throw ValidationError("SVM: query arity mismatch");
  Eigen::Map<const Eigen::RowVectorXd> q(query.data(), static_cast<Eigen::Index>(query.size()));
  double f = m.bias;
  for (Eigen::Index s = 0; s < m.support.rows(); ++s) {
    f += m.alpha[s] * m.y[s] * std::exp(-gamma * (m.support.row(s) - q).squaredNorm());
  }
  return f;
}

SvmParams fit_svm(const Matrix& x, const std::vector<int>& labels, const SvmOptions& options) {
  if (static_cast<std::size_t>(x.rows()) != labels.size()) throw ValidationError("SVM: label count mismatch");
  SvmParams p;
  p.C = options.C;
  p.tol = options.tol;
  p.max_passes = options.max_passes;
  p.gamma = options.gamma ? *options.gamma : auto_gamma(x);
  if (!(p.gamma > 0.0) || !std::isfinite(p.gamma)) throw NumericError("SVM: invalid gamma");
  p.classes = labels;
  std::sort(p.classes.begin(), p.classes.end());
  p.classes.erase(std::unique(p.classes.begin(), p.classes.end()), p.classes.end());
  if (p.classes.size() < 2) throw ValidationError("SVM: need at least 2 classes");

  std::vector<std::pair<int, int>> pairs;
  for (std::size_t a = 0; a < p.classes.size(); ++a) {
    for (std::size_t b = a + 1; b < p.classes.size(); ++b) pairs.emplace_back(p.classes[a], p.classes[b]);
  }
  p.machines.resize(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t m) {
    const auto [pos, neg] = pairs[m];
    std::vector<Eigen::Index> rows;
    std::vector<int> y;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == pos || labels[i] == neg) {
        rows.push_back(static_cast<Eigen::Index>(i));
        y.push_back(labels[i] == pos ? 1 : -1);
      }
    }
    Matrix sub(static_cast<Eigen::Index>(rows.size()), x.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) sub.row(static_cast<Eigen::Index>(r)) = x.row(rows[r]);
    const auto sol = solve_binary_svm(sub, y, p.C, p.gamma, p.tol, p.max_passes);

    BinarySvm& machine = p.machines[m];
    machine.positive_class = pos;
    machine.negative_class = neg;
    machine.bias = sol.bias;
    machine.iterations = sol.iterations;
    machine.converged = sol.converged;
    std::vector<Eigen::Index> sv;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (sol.alpha[r] > 0.0) sv.push_back(static_cast<Eigen::Index>(r));
    }
    machine.support.resize(static_cast<Eigen::Index>(sv.size()), x.cols());
    for (std::size_t s = 0; s < sv.size(); ++s) {
      machine.support.row(static_cast<Eigen::Index>(s)) = sub.row(sv[s]);
      machine.alpha.push_back(sol.alpha[sv[s]]);
      machine.y.push_back(y[sv[s]]);
    }
  });
  return p;
}

int svm_predict(const SvmParams& m, std::span<const double> query, std::map<int, double>* votes) {
  std::map<int, int> tally;
  for (int c : m.classes) tally[c] = 0;
  for (const auto& machine : m.machines) {
    const double f = svm_decision(machine, m.gamma, query);
    if (!std::isfinite(f)) throw NumericError("SVM: non-finite decision value");
    ++tally[f > 0.0 ? machine.positive_class : machine.negative_class];
  }
  int best = m.classes.front();
  for (const auto& [c, v] : tally) {
    if (v > tally[best]) best = c;
  }
  if (votes) {
    votes->clear();
    for (const auto& [c, v] : tally) (*votes)[c] = v;
  }
  return best;
}

}  // namespace nvmfp
