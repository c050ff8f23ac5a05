#include "options.hpp"

#include <sstream>

#include "nvmfp/error.hpp"
#include "nvmfp/text_io.hpp"

namespace nvmfp::cli {

void add_pipeline_options(CLI::App* cmd, PipelineOptions& o, bool with_kind, bool grid) {
  if (with_kind) {
    cmd->add_option("--model", o.model, "Classifier: knn, tree or svm")
        ->check(CLI::IsMember({"knn", "tree", "svm"}));
    cmd->add_option("--selector", o.selector, "Feature selection: none, mrmr or nca")
        ->check(CLI::IsMember({"none", "mrmr", "nca"}));
  }
  cmd->add_option("--select-k", o.select_k, "Number of features kept by the selector")->check(CLI::PositiveNumber);
  const char* list_note = grid ? " (comma-separated list)" : "";
  auto* k = cmd->add_option("--k", o.knn_k, std::string("KNN neighbours") + list_note);
  auto* c = cmd->add_option("--C", o.svm_c, std::string("SVM box constraint") + list_note);
  auto* g = cmd->add_option("--gamma", o.svm_gamma, std::string("SVM RBF gamma or 'auto'") + list_note);
  auto* d = cmd->add_option("--max-depth", o.max_depth, std::string("Tree depth limit") + list_note);
  for (auto* opt : {k, c, g, d}) {
    opt->delimiter(',');
    if (!grid) opt->expected(1);
  }
  cmd->add_option("--tol", o.svm_tol, "SMO stopping tolerance");
  cmd->add_option("--max-passes", o.svm_max_passes, "SMO iteration budget multiplier");
  cmd->add_option("--min-leaf", o.min_leaf, "Minimum samples per tree leaf");
  cmd->add_option("--mrmr-bins", o.mrmr_bins, "Equal-width bins for mutual information");
  cmd->add_option("--nca-iters", o.nca_iters, "NCA gradient-ascent iterations");
  cmd->add_option("--nca-rate", o.nca_rate, "NCA learning rate");
  cmd->add_option("--nca-max-samples", o.nca_max_samples, "Subsample NCA fitting to this many rows (0 = all)");
  cmd->add_option("--nca-seed", o.nca_seed, "Seed for NCA subsampling");
  cmd->add_flag("--no-standardize", o.no_standardize, "Skip z-score standardization");
}

namespace {

template <class T>
const T& pick(const std::vector<T>& v, std::size_t i, const char* what) {
  if (v.empty()) throw ValidationError(std::string(what) + " list is empty");
  return v.at(i);
}

}  // namespace

PipelineConfig make_config(const PipelineOptions& o, std::size_t k_idx, std::size_t c_idx, std::size_t g_idx,
                           std::size_t d_idx) {
  PipelineConfig c;
  c.kind = parse_model_kind(o.model);
  c.selector = parse_selector(o.selector);
  c.select_k = o.select_k;
  c.knn_k = pick(o.knn_k, k_idx, "--k");
  c.svm.C = pick(o.svm_c, c_idx, "--C");
  const std::string& gamma = pick(o.svm_gamma, g_idx, "--gamma");
  if (gamma != "auto") c.svm.gamma = text::parse_double(gamma);
  c.svm.tol = o.svm_tol;
  c.svm.max_passes = o.svm_max_passes;
  c.tree.max_depth = pick(o.max_depth, d_idx, "--max-depth");
  c.tree.min_leaf = o.min_leaf;
  c.mrmr_bins = o.mrmr_bins;
  c.nca.iters = o.nca_iters;
  c.nca.learning_rate = o.nca_rate;
  c.nca.max_samples = o.nca_max_samples;
  c.nca.seed = o.nca_seed;
  c.standardize = !o.no_standardize;
  return c;
}

std::vector<PipelineConfig> expand_grid(const PipelineOptions& o) {
  const ModelKind kind = parse_model_kind(o.model);
  std::vector<PipelineConfig> out;
  switch (kind) {
    case ModelKind::Knn:
      for (std::size_t i = 0; i < o.knn_k.size(); ++i) out.push_back(make_config(o, i));
      break;
    case ModelKind::DecisionTree:
      for (std::size_t i = 0; i < o.max_depth.size(); ++i) out.push_back(make_config(o, 0, 0, 0, i));
      break;
    case ModelKind::GaussianSvm:
      for (std::size_t i = 0; i < o.svm_c.size(); ++i) {
        for (std::size_t j = 0; j < o.svm_gamma.size(); ++j) out.push_back(make_config(o, 0, i, j));
      }
      break;
  }
  return out;
}

std::string describe_hyperparameters(const PipelineConfig& c) {
  std::ostringstream os;
  switch (c.kind) {
    case ModelKind::Knn:
      os << "k=" << c.knn_k;
      break;
    case ModelKind::DecisionTree:
      os << "max_depth=" << c.tree.max_depth << ";min_leaf=" << c.tree.min_leaf;
      break;
    case ModelKind::GaussianSvm:
      os << "C=" << text::sig(c.svm.C, 6) << ";gamma=" << (c.svm.gamma ? text::sig(*c.svm.gamma, 6) : "auto");
      break;
  }
  return os.str();
}

std::filesystem::path resolve_output(const std::filesystem::path& out_dir, const std::string& name) {
  std::filesystem::path p(name);
  return p.is_absolute() ? p : out_dir / p;
}

std::filesystem::path with_suffix(const std::filesystem::path& p, const std::string& suffix,
                                  const std::string& extension) {
  return p.parent_path() / (p.stem().string() + suffix + extension);
}

std::string manifest_text(const CLI::App& app, const CLI::App& sub) {
  std::istringstream all(app.config_to_str(true, false));
  std::ostringstream out;
  out << "# nvmfp manifest; re-run with: nvmfp --config <this file> " << sub.get_name() << '\n';
  const std::string prefix = sub.get_name() + ".";
  std::string line;
  while (std::getline(all, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (value == "\"\"" || value == "[]") continue;
    const bool top_level = key.find('.') == std::string::npos;
    if (top_level ? (key == "out-dir") : key.rfind(prefix, 0) == 0) out << line << '\n';
  }
  return out.str();
}

std::vector<double> load_probe(const std::filesystem::path& path) {
  const auto rows = text::lines(text::read_file(path));
  if (rows.empty()) throw ParseError("probe file is empty");
  const std::string header(text::trim(rows[0]));
  std::size_t column = 0;
  if (header == "cycle,latency_us") column = 1;
  else if (header != "latency_us") throw ParseError("expected header 'cycle,latency_us' or 'latency_us'", 1);
  std::vector<double> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (text::trim(rows[i]).empty()) continue;
    const auto cells = text::split(rows[i], ',');
    if (cells.size() != column + 1) throw ParseError("wrong column count", i + 1);
    const double v = text::parse_double(cells[column], i + 1);
    if (!(v > 0.0)) throw ParseError("latency must be positive", i + 1);
    out.push_back(v);
  }
  return out;
}

}  // namespace nvmfp::cli
