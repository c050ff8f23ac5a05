#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nvmfp/features.hpp"
#include "nvmfp/matrix.hpp"
#include "nvmfp/protocol.hpp"

namespace nvmfp {

enum class ModelKind { Knn, DecisionTree, GaussianSvm };
std::string_view to_string(ModelKind k) noexcept;
ModelKind parse_model_kind(std::string_view s);

// ---------------------------------------------------------------------------
// k-nearest neighbours

struct KnnParams {
  int k = 5;
  Matrix train;
  std::vector<int> labels;
};

struct Neighbour {
  std::size_t index;
  double sq_distance;
};

KnnParams fit_knn(Matrix x, std::vector<int> labels, int k);
// The k nearest training rows ordered by (squared Euclidean distance, index).
std::vector<Neighbour> knn_neighbours(const KnnParams& m, std::span<const double> query);
// Majority vote; ties go to the class whose closest member is nearer, then
// to the lower class tag. `votes` receives per-class counts when non-null.
int knn_vote(const KnnParams& m, std::span<const double> query, std::map<int, double>* votes = nullptr);

// ---------------------------------------------------------------------------
// CART decision tree (Gini)

struct TreeOptions {
  int max_depth = 20;
  int min_leaf = 1;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // x[feature] <= threshold goes left
  int left = -1;
  int right = -1;
  int depth = 0;
  std::vector<int> counts;  // training members per class (TreeParams::classes order)

  bool is_leaf() const noexcept { return feature < 0; }
};

struct TreeParams {
  TreeOptions options;
  std::vector<int> classes;
  std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double impurity_decrease = 0.0;
};

double gini_impurity(std::span<const int> counts, int total) noexcept;
// Best split of the given rows: midpoints of sorted distinct values, ranked
// by impurity decrease; ties to the lowest feature, then lowest threshold.
std::optional<SplitChoice> best_split(const Matrix& x, std::span<const int> class_index,
                                      int num_classes, std::span<const std::size_t> rows,
                                      int min_leaf);

TreeParams fit_tree(const Matrix& x, const std::vector<int>& labels, const TreeOptions& options = {});
int tree_leaf(const TreeParams& t, std::span<const double> query);
// Majority label of the leaf reached by query; ties to the lowest tag.
int tree_predict(const TreeParams& t, std::span<const double> query,
                 std::map<int, double>* leaf_counts = nullptr);

// ---------------------------------------------------------------------------
// Gaussian-kernel SVM (SMO, one-vs-one)

struct SvmOptions {
  double C = 1.0;
  std::optional<double> gamma;  // empty = auto: 1 / (features * mean feature variance)
  double tol = 1e-3;
  int max_passes = 10;
};

// One binary machine: f(x) = sum_i alpha_i y_i K(sv_i, x) + bias, with
// f > 0 voting for positive_class.
struct BinarySvm {
  int positive_class = 0;
  int negative_class = 1;
  Matrix support;
  std::vector<double> alpha;
  std::vector<int> y;  // +1 / -1
  double bias = 0.0;
  // Diagnostics, not persisted.
  std::size_t iterations = 0;
  bool converged = true;
};

struct BinarySvmSolution {
  std::vector<double> alpha;  // one per training row, in [0, C]
  double bias = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma);
double auto_gamma(const Matrix& x);

// Solves the soft-margin dual on rows of x with labels y in {+1, -1}
// using maximal-violating-pair second-order working-set selection.
BinarySvmSolution solve_binary_svm(const Matrix& x, std::span<const int> y, double C, double gamma,
                                   double tol, int max_passes);
// Dual objective sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij.
double svm_dual_objective(const Matrix& x, std::span<const int> y, std::span<const double> alpha,
                          double gamma);
double svm_decision(const BinarySvm& m, double gamma, std::span<const double> query);

struct SvmParams {
  double C = 1.0;
  double gamma = 1.0;
  double tol = 1e-3;
  int max_passes = 10;
  std::vector<int> classes;
  std::vector<BinarySvm> machines;  // (a, b) for a < b, lexicographic
};

SvmParams fit_svm(const Matrix& x, const std::vector<int>& labels, const SvmOptions& options = {});
// Pairwise vote; ties go to the lowest class tag.
int svm_predict(const SvmParams& m, std::span<const double> query, std::map<int, double>* votes = nullptr);

// ---------------------------------------------------------------------------
// Trained pipeline: feature selection + standardization + classifier

struct TrainedModel {
  ModelKind kind = ModelKind::Knn;
  std::size_t input_arity = 0;
  std::vector<int> classes;
  std::map<int, std::string> class_names;
  std::optional<FeatureRanking> selection;
  // Covers the model's features (the selected ones, in ranking order).
  StandardizationStats standardizer;
  std::variant<KnnParams, TreeParams, SvmParams> params;

  // Raw input (input_arity values) -> classifier feature space.
  std::vector<double> prepare(std::span<const double> raw) const;
  std::size_t model_arity() const noexcept { return standardizer.arity(); }
};

struct PipelineConfig {
  ModelKind kind = ModelKind::Knn;
  int knn_k = 5;
  TreeOptions tree;
  SvmOptions svm;
  SelectorKind selector = SelectorKind::None;
  int select_k = 25;
  int mrmr_bins = 16;
  NcaOptions nca;
  bool standardize = true;
};

struct TrainTiming {
  double select_s = 0.0;  // feature selection, including its own standardization pass
  double train_s = 0.0;   // standardizer fit on model features + classifier fit
};

TrainedModel train_model(const Dataset& train, const PipelineConfig& config, TrainTiming* timing = nullptr);
// Runs only the selection stage of the pipeline (standardizing first for NCA).
FeatureRanking run_selection(const Dataset& train, const PipelineConfig& config);
// Same as train_model but reuses a ranking from run_selection on the same
// training set; timing->select_s is left at 0.
TrainedModel train_model_with_selection(const Dataset& train, const PipelineConfig& config,
                                        const FeatureRanking& selection, TrainTiming* timing = nullptr);
TrainedModel train_knn(const Dataset& train, int k = 5);
TrainedModel train_tree(const Dataset& train, const TreeOptions& options = {});
TrainedModel train_svm(const Dataset& train, const SvmOptions& options = {});

struct Prediction {
  int label = 0;
  std::map<int, double> scores;  // KNN votes, tree leaf counts, or SVM votes
};

Prediction predict_detail(const TrainedModel& model, std::span<const double> raw);
int predict(const TrainedModel& model, std::span<const double> raw);
int predict(const TrainedModel& model, const FeatureVector& sample);
std::vector<int> predict_all(const TrainedModel& model, const Dataset& ds);

// ---------------------------------------------------------------------------
// Evaluation

struct EvalReport {
  std::string model_kind;
  std::string selector;
  std::size_t num_features = 0;
  std::vector<int> classes;  // row/column order of `confusion`
  std::map<int, std::string> class_names;
  std::vector<std::vector<std::size_t>> confusion;  // rows = true class
  double accuracy = 0.0;
  std::vector<double> tpr;
  std::vector<double> fnr;
  std::size_t total = 0;
  double select_time_s = 0.0;
  double train_time_s = 0.0;
  double infer_time_s = 0.0;  // whole test set
  double infer_time_per_sample_s = 0.0;
};

// Builds the report from true/predicted labels. `classes` fixes the matrix
// axes; labels outside it are rejected.
EvalReport confusion_report(const std::vector<int>& classes, std::span<const int> truth,
                            std::span<const int> predicted);

// Classifies the test set (timed) and builds the report. Axes are the union
// of the model's classes and the test labels; a test class the model never
// saw contributes a row of errors.
EvalReport evaluate(const TrainedModel& model, const Dataset& test);

std::string format_report_text(const EvalReport& r);
std::string format_report_csv(const EvalReport& r);
std::string table_row_header();
std::string format_table_row(const EvalReport& r);

// ---------------------------------------------------------------------------
// Cross-validation

// Stratified: each class is shuffled and dealt round-robin into folds.
std::vector<std::vector<std::size_t>> stratified_folds(const Dataset& ds, int folds, std::uint64_t seed);

struct CrossValidationResult {
  std::vector<double> fold_accuracy;
  double mean_accuracy = 0.0;
  std::vector<std::vector<std::size_t>> folds;
};

// Standardizer and feature selection are refit inside every fold.
CrossValidationResult cross_validate(const PipelineConfig& config, const Dataset& ds, int folds = 8,
                                     std::uint64_t seed = 1);

// ---------------------------------------------------------------------------
// Persistence

std::string format_model(const TrainedModel& model);
TrainedModel parse_model(std::string_view text);
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace nvmfp
