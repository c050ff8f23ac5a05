#include <algorithm>
#include <chrono>
#include <set>
#include <sstream>

#include "nvmfp/classifiers.hpp"
#include "nvmfp/error.hpp"
#include "nvmfp/text_io.hpp"

namespace nvmfp {

EvalReport confusion_report(const std::vector<int>& classes, std::span<const int> truth,
                            std::span<const int> predicted) {
  if (truth.size() != predicted.size()) throw ValidationError("truth/prediction length mismatch");
  EvalReport r;
  r.classes = classes;
  const std::size_t k = classes.size();
  r.confusion.assign(k, std::vector<std::size_t>(k, 0));
  auto index_of = [&](int tag) {
    auto it = std::find(classes.begin(), classes.end(), tag);
    if (it == classes.end()) throw ValidationError("label " + std::to_string(tag) + " outside report classes");
    return static_cast<std::size_t>(it - classes.begin());
  };
  for (std::size_t i = 0; i < truth.size(); ++i) ++r.confusion[index_of(truth[i])][index_of(predicted[i])];

  r.total = truth.size();
  std::size_t trace = 0;
  r.tpr.assign(k, 0.0);
  r.fnr.assign(k, 1.0);
  for (std::size_t c = 0; c < k; ++c) {
    trace += r.confusion[c][c];
    std::size_t row = 0;
    for (std::size_t p = 0; p < k; ++p) row += r.confusion[c][p];
    // Classes without test samples report tpr 0 / fnr 1.
    if (row > 0) {
      r.tpr[c] = static_cast<double>(r.confusion[c][c]) / static_cast<double>(row);
      r.fnr[c] = 1.0 - r.tpr[c];
    }
  }
  r.accuracy = r.total > 0 ? static_cast<double>(trace) / static_cast<double>(r.total) : 0.0;
  return r;
}

EvalReport evaluate(const TrainedModel& model, const Dataset& test) {
  if (test.empty()) throw ValidationError("test set is empty");
  if (test.arity() != model.input_arity) {
    throw ValidationError("model expects " + std::to_string(model.input_arity) + " features, test set has " +
                          std::to_string(test.arity()));
  }
  std::set<int> axis(model.classes.begin(), model.classes.end());
  for (const auto& s : test.samples) axis.insert(s.label);

  const auto start = std::chrono::steady_clock::now();
  const auto predicted = predict_all(model, test);
  const double infer_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const auto truth = test.labels();
  EvalReport r = confusion_report({axis.begin(), axis.end()}, truth, predicted);
  r.model_kind = std::string(to_string(model.kind));
  r.selector = std::string(to_string(model.selection ? model.selection->method : SelectorKind::None));
  r.num_features = model.model_arity();
  for (int c : r.classes) {
    if (auto it = model.class_names.find(c); it != model.class_names.end()) r.class_names[c] = it->second;
    else if (auto jt = test.class_names.find(c); jt != test.class_names.end()) r.class_names[c] = jt->second;
    else r.class_names[c] = default_class_name(c);
  }
  r.infer_time_s = infer_s;
  r.infer_time_per_sample_s = infer_s / static_cast<double>(test.size());
  return r;
}

std::string format_report_text(const EvalReport& r) {
  std::ostringstream os;
  os << "model: " << r.model_kind << "  selector: " << r.selector << "  features: " << r.num_features << '\n';
  os << "test samples: " << r.total << "  accuracy: " << text::fixed(100.0 * r.accuracy, 2) << "%\n";
  os << "train time: " << text::fixed(r.train_time_s, 4) << " s  inference time: " << text::fixed(r.infer_time_s, 4)
     << " s (" << text::sig(r.infer_time_per_sample_s, 4) << " s/sample)";
  if (r.select_time_s > 0.0) os << "  selection time: " << text::fixed(r.select_time_s, 4) << " s";
  os << "\n\nconfusion matrix (rows = true, columns = predicted)\n";
  os << std::string(10, ' ');
  for (int c : r.classes) {
    std::string h = "c" + std::to_string(c);
    os << std::string(h.size() < 7 ? 7 - h.size() : 1, ' ') << h;
  }
  os << "      TPR      FNR\n";
  for (std::size_t i = 0; i < r.classes.size(); ++i) {
    std::string name = r.class_names.count(r.classes[i]) ? r.class_names.at(r.classes[i]) : std::to_string(r.classes[i]);
    name.resize(10, ' ');
    os << name;
    for (std::size_t j = 0; j < r.classes.size(); ++j) {
      std::string v = std::to_string(r.confusion[i][j]);
      os << std::string(v.size() < 7 ? 7 - v.size() : 1, ' ') << v;
    }
    os << "  " << text::fixed(100.0 * r.tpr[i], 1) << "%  " << text::fixed(100.0 * r.fnr[i], 1) << "%\n";
  }
  return os.str();
}

std::string format_report_csv(const EvalReport& r) {
  std::ostringstream os;
  os << "# confusion\n";
  os << "true\\predicted";
  for (int c : r.classes) os << ',' << c;
  os << '\n';
  for (std::size_t i = 0; i < r.classes.size(); ++i) {
    os << r.classes[i];
    for (std::size_t j = 0; j < r.classes.size(); ++j) os << ',' << r.confusion[i][j];
    os << '\n';
  }
  os << "# metrics\n";
  os << "metric,value\n";
  os << "model," << r.model_kind << '\n';
  os << "selector," << r.selector << '\n';
  os << "num_features," << r.num_features << '\n';
  os << "total," << r.total << '\n';
  os << "accuracy," << text::fixed(r.accuracy, 6) << '\n';
  os << "select_time_s," << text::fixed(r.select_time_s, 4) << '\n';
  os << "train_time_s," << text::fixed(r.train_time_s, 4) << '\n';
  os << "infer_time_s," << text::fixed(r.infer_time_s, 4) << '\n';
  os << "infer_time_per_sample_s," << text::sig(r.infer_time_per_sample_s, 6) << '\n';
  os << "# per_class\n";
  os << "class,tpr,fnr\n";
  for (std::size_t i = 0; i < r.classes.size(); ++i) {
    os << r.classes[i] << ',' << text::fixed(r.tpr[i], 6) << ',' << text::fixed(r.fnr[i], 6) << '\n';
  }
  return os.str();
}

std::string table_row_header() {
  return "model,selector,num_features,test_accuracy_pct,select_time_s,train_time_s,inference_time_s,"
         "inference_time_per_sample_s";
}

std::string format_table_row(const EvalReport& r) {
  std::ostringstream os;
  os << r.model_kind << ',' << r.selector << ',' << r.num_features << ',' << text::fixed(100.0 * r.accuracy, 1)
     << ',' << text::fixed(r.select_time_s, 4) << ',' << text::fixed(r.train_time_s, 4) << ','
     << text::fixed(r.infer_time_s, 4) << ',' << text::sig(r.infer_time_per_sample_s, 6);
  return os.str();
}

}  // namespace nvmfp
