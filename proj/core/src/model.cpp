#include <algorithm>
#include <chrono>
#include <set>

#include "nvmfp/classifiers.hpp"
#include "nvmfp/error.hpp"
#include "nvmfp/parallel.hpp"
#include "nvmfp/random.hpp"

namespace nvmfp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

constexpr std::uint64_t kFoldDomain = 0xf01dULL;

}  // namespace

std::string_view to_string(ModelKind k) noexcept {
  switch (k) {
    case ModelKind::Knn: return "KNN";
    case ModelKind::DecisionTree: return "DECISION_TREE";
    case ModelKind::GaussianSvm: return "GAUSSIAN_SVM";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view s) {
  if (s == "KNN" || s == "knn") return ModelKind::Knn;
  if (s == "DECISION_TREE" || s == "tree") return ModelKind::DecisionTree;
  if (s == "GAUSSIAN_SVM" || s == "svm") return ModelKind::GaussianSvm;
  throw ValidationError("unknown model kind '" + std::string(s) + "' (expected knn, tree or svm)");
}

std::vector<double> TrainedModel::prepare(std::span<const double> raw) const {
  if (raw.size() != input_arity) {
    throw ValidationError("expected " + std::to_string(input_arity) + " features, got " +
                          std::to_string(raw.size()));
  }
  std::vector<double> out(model_arity());
  if (selection) {
    for (std::size_t j = 0; j < out.size(); ++j) {
      out[j] = standardize_value(standardizer, j, raw[selection->indices[j]]);
    }
  } else {
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = standardize_value(standardizer, j, raw[j]);
  }
  return out;
}

namespace {

TrainedModel fit_pipeline(const Dataset& train, const PipelineConfig& config,
                          std::optional<FeatureRanking> selection, TrainTiming& t) {
  TrainedModel model;
  model.kind = config.kind;
  model.input_arity = train.arity();
  model.classes = train.classes();
  for (int c : model.classes) {
    auto it = train.class_names.find(c);
    model.class_names[c] = it != train.class_names.end() ? it->second : default_class_name(c);
  }
  model.selection = std::move(selection);

  const auto start = Clock::now();
  Matrix x = to_matrix(train);
  if (model.selection) x = select_columns(x, model.selection->indices);
  model.standardizer = config.standardize ? fit_standardizer(x)
                                          : StandardizationStats::identity(static_cast<std::size_t>(x.cols()));
  if (config.standardize) x = apply_standardizer(model.standardizer, x);
  const auto labels = train.labels();
  switch (config.kind) {
    case ModelKind::Knn:
      model.params = fit_knn(std::move(x), labels, config.knn_k);
      break;
    case ModelKind::DecisionTree:
      model.params = fit_tree(x, labels, config.tree);
      break;
    case ModelKind::GaussianSvm:
      model.params = fit_svm(x, labels, config.svm);
      break;
  }
  t.train_s = seconds_since(start);
  return model;
}

}  // namespace

FeatureRanking run_selection(const Dataset& train, const PipelineConfig& config) {
  if (config.selector == SelectorKind::Mrmr) return mrmr_select(train, config.select_k, config.mrmr_bins);
  if (config.selector == SelectorKind::Nca) {
    const Dataset scaled = config.standardize ? apply_standardizer(fit_standardizer(train), train) : train;
    NcaOptions nca = config.nca;
    nca.k = config.select_k;
    return nca_select(scaled, nca);
  }
  throw ValidationError("run_selection: no selector configured");
}

TrainedModel train_model(const Dataset& train, const PipelineConfig& config, TrainTiming* timing) {
  if (train.empty()) throw ValidationError("training set is empty");
  train.validate();
  TrainTiming t;
  std::optional<FeatureRanking> selection;
  if (config.selector != SelectorKind::None) {
    const auto start = Clock::now();
    selection = run_selection(train, config);
    t.select_s = seconds_since(start);
  }
  TrainedModel model = fit_pipeline(train, config, std::move(selection), t);
  if (timing) *timing = t;
  return model;
}

TrainedModel train_model_with_selection(const Dataset& train, const PipelineConfig& config,
                                        const FeatureRanking& selection, TrainTiming* timing) {
  if (train.empty()) throw ValidationError("training set is empty");
  train.validate();
  for (int j : selection.indices) {
    if (j < 0 || static_cast<std::size_t>(j) >= train.arity()) throw ValidationError("selection index out of range");
  }
  TrainTiming t;
  TrainedModel model = fit_pipeline(train, config, selection, t);
  if (timing) *timing = t;
  return model;
}

TrainedModel train_knn(const Dataset& train, int k) {
  PipelineConfig c;
  c.kind = ModelKind::Knn;
  c.knn_k = k;
  return train_model(train, c);
}

TrainedModel train_tree(const Dataset& train, const TreeOptions& options) {
  PipelineConfig c;
  c.kind = ModelKind::DecisionTree;
  c.tree = options;
  return train_model(train, c);
}

TrainedModel train_svm(const Dataset& train, const SvmOptions& options) {
  PipelineConfig c;
  c.kind = ModelKind::GaussianSvm;
  c.svm = options;
  return train_model(train, c);
}

Prediction predict_detail(const TrainedModel& model, std::span<const double> raw) {
  const auto x = model.prepare(raw);
  Prediction p;
  std::visit(
      [&](const auto& params) {
        using T = std::decay_t<decltype(params)>;
        if constexpr (std::is_same_v<T, KnnParams>) p.label = knn_vote(params, x, &p.scores);
        else if constexpr (std::is_same_v<T, TreeParams>) p.label = tree_predict(params, x, &p.scores);
        else p.label = svm_predict(params, x, &p.scores);
      },
      model.params);
  return p;
}

int predict(const TrainedModel& model, std::span<const double> raw) {
  const auto x = model.prepare(raw);
  return std::visit(
      [&](const auto& params) {
        using T = std::decay_t<decltype(params)>;
        if constexpr (std::is_same_v<T, KnnParams>) return knn_vote(params, x);
        else if constexpr (std::is_same_v<T, TreeParams>) return tree_predict(params, x);
        else return svm_predict(params, x);
      },
      model.params);
}

int predict(const TrainedModel& model, const FeatureVector& sample) { return predict(model, sample.features); }

std::vector<int> predict_all(const TrainedModel& model, const Dataset& ds) {
  std::vector<int> out(ds.size());
  parallel_for(ds.size(), [&](std::size_t i) { out[i] = predict(model, ds.samples[i].features); });
  return out;
}

std::vector<std::vector<std::size_t>> stratified_folds(const Dataset& ds, int folds, std::uint64_t seed) {
  if (folds < 2) throw ValidationError("folds must be >= 2");
  if (static_cast<std::size_t>(folds) > ds.size()) {
    throw ValidationError("cannot make " + std::to_string(folds) + " folds from " + std::to_string(ds.size()) +
                          " samples");
  }
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < ds.size(); ++i) by_class[ds.samples[i].label].push_back(i);
  std::vector<std::vector<std::size_t>> out(folds);
  // The deal position carries over between classes, so folds = n gives
  // leave-one-out and per-class fold sizes still differ by at most one.
  std::size_t next = 0;
  for (auto& [tag, idx] : by_class) {
    Rng rng(derive_seed({seed, kFoldDomain, static_cast<std::uint64_t>(tag)}));
    rng.shuffle(idx);
    for (std::size_t i : idx) out[next++ % folds].push_back(i);
  }
  for (auto& f : out) std::sort(f.begin(), f.end());
  return out;
}

CrossValidationResult cross_validate(const PipelineConfig& config, const Dataset& ds, int folds,
                                     std::uint64_t seed) {
  CrossValidationResult result;
  result.folds = stratified_folds(ds, folds, seed);
  result.fold_accuracy.assign(folds, 0.0);
  for (int f = 0; f < folds; ++f) {
    std::vector<std::size_t> train_idx;
    for (int g = 0; g < folds; ++g) {
      if (g != f) train_idx.insert(train_idx.end(), result.folds[g].begin(), result.folds[g].end());
    }
    std::sort(train_idx.begin(), train_idx.end());
    const Dataset train = ds.subset(train_idx);
    const Dataset held_out = ds.subset(result.folds[f]);
    const TrainedModel model = train_model(train, config);
    const auto pred = predict_all(model, held_out);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == held_out.samples[i].label;
    result.fold_accuracy[f] = held_out.empty() ? 0.0 : static_cast<double>(correct) / held_out.size();
  }
  double sum = 0.0;
  for (double a : result.fold_accuracy) sum += a;
  result.mean_accuracy = sum / folds;
  return result;
}

}  // namespace nvmfp
