// Model file: line-oriented, whitespace-separated, self-describing text.
//
//   nvmfp-model 1
//   kind <KNN|DECISION_TREE|GAUSSIAN_SVM>
//   input_arity <n>
//   classes <count>
//   class <tag> <name>                       (count lines)
//   selection <NONE|MRMR|NCA> <k>
//   indices ... / scores ...                 (only when selection != NONE)
//   standardizer <d>
//   mean ... / stdev ...
//   ...kind-specific block...
//   end
//
// Reals are written with 9 significant digits.
#include <sstream>

#include "nvmfp/classifiers.hpp"
#include "nvmfp/error.hpp"
#include "nvmfp/text_io.hpp"

namespace nvmfp {

namespace {

constexpr int kDigits = 9;

void put_reals(std::ostringstream& os, std::string_view key, std::span<const double> v) {
  os << key;
  for (double x : v) os << ' ' << text::sig(x, kDigits);
  os << '\n';
}

class Reader {
 public:
  explicit Reader(std::string_view content) : lines_(text::lines(content)) {}

  // Next non-empty line split into tokens; `key` must be the first token.
  std::vector<std::string_view> expect(std::string_view key) {
    while (pos_ < lines_.size() && text::trim(lines_[pos_]).empty()) ++pos_;
    if (pos_ >= lines_.size()) throw ParseError("unexpected end of model file, expected '" + std::string(key) + "'");
    ++pos_;
    std::vector<std::string_view> toks;
    for (auto t : text::split(text::trim(lines_[pos_ - 1]), ' ')) {
      if (!t.empty()) toks.push_back(t);
    }
    if (toks.empty() || toks[0] != key) {
      throw ParseError("expected '" + std::string(key) + "'", pos_);
    }
    return toks;
  }

  std::size_t line() const noexcept { return pos_; }

  double real(std::string_view s) const { return text::parse_double(s, pos_); }
  std::int64_t integer(std::string_view s) const { return text::parse_int(s, pos_); }

  std::vector<double> reals(std::string_view key, std::size_t count) {
    auto t = expect(key);
    if (t.size() != count + 1) {
      throw ParseError("'" + std::string(key) + "' expects " + std::to_string(count) + " values", pos_);
    }
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = real(t[i + 1]);
    return out;
  }

  void need(const std::vector<std::string_view>& t, std::size_t n) const {
    if (t.size() != n) throw ParseError("wrong field count for '" + std::string(t[0]) + "'", pos_);
  }

 private:
  std::vector<std::string> lines_;
  std::size_t pos_ = 0;
};

void put_matrix_rows(std::ostringstream& os, std::string_view key, const Matrix& m, std::span<const int> tags) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    os << key << ' ' << tags[r];
    for (Eigen::Index c = 0; c < m.cols(); ++c) os << ' ' << text::sig(m(r, c), kDigits);
    os << '\n';
  }
}

}  // namespace

std::string format_model(const TrainedModel& m) {
  std::ostringstream os;
  os << "nvmfp-model 1\n";
  os << "kind " << to_string(m.kind) << '\n';
  os << "input_arity " << m.input_arity << '\n';
  os << "classes " << m.classes.size() << '\n';
  for (int c : m.classes) {
    std::string name = m.class_names.count(c) ? m.class_names.at(c) : default_class_name(c);
    for (char& ch : name) {
      if (ch == ' ' || ch == '\t') ch = '_';
    }
    os << "class " << c << ' ' << name << '\n';
  }
  if (m.selection) {
    os << "selection " << to_string(m.selection->method) << ' ' << m.selection->size() << '\n';
    os << "indices";
    for (int i : m.selection->indices) os << ' ' << i;
    os << '\n';
    put_reals(os, "scores", m.selection->scores);
  } else {
    os << "selection NONE 0\n";
  }
  os << "standardizer " << m.standardizer.arity() << '\n';
  put_reals(os, "mean", m.standardizer.mean);
  put_reals(os, "stdev", m.standardizer.stdev);

  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, KnnParams>) {
          os << "knn " << p.k << ' ' << p.train.rows() << ' ' << p.train.cols() << '\n';
          put_matrix_rows(os, "row", p.train, p.labels);
        } else if constexpr (std::is_same_v<T, TreeParams>) {
          os << "tree " << p.options.max_depth << ' ' << p.options.min_leaf << ' ' << p.nodes.size() << '\n';
          os << "tree_classes";
          for (int c : p.classes) os << ' ' << c;
          os << '\n';
          for (const auto& n : p.nodes) {
            os << "node " << n.feature << ' ' << text::sig(n.threshold, 17) << ' ' << n.left << ' ' << n.right << ' '
               << n.depth;
            for (int c : n.counts) os << ' ' << c;
            os << '\n';
          }
        } else {
          os << "svm " << text::sig(p.C, kDigits) << ' ' << text::sig(p.gamma, kDigits) << ' '
             << text::sig(p.tol, kDigits) << ' ' << p.max_passes << ' ' << p.machines.size() << '\n';
          os << "svm_classes";
          for (int c : p.classes) os << ' ' << c;
          os << '\n';
          for (const auto& b : p.machines) {
            os << "machine " << b.positive_class << ' ' << b.negative_class << ' ' << text::sig(b.bias, kDigits) << ' '
               << b.support.rows() << '\n';
            for (Eigen::Index s = 0; s < b.support.rows(); ++s) {
              os << "sv " << text::sig(b.alpha[s], kDigits) << ' ' << b.y[s];
              for (Eigen::Index c = 0; c < b.support.cols(); ++c) os << ' ' << text::sig(b.support(s, c), kDigits);
              os << '\n';
            }
          }
        }
      },
      m.params);
  os << "end\n";
  return os.str();
}

TrainedModel parse_model(std::string_view content) {
  Reader rd(content);
  TrainedModel m;
  {
    auto t = rd.expect("nvmfp-model");
    rd.need(t, 2);
    if (t[1] != "1") throw ParseError("unsupported model version '" + std::string(t[1]) + "'", rd.line());
  }
  {
    auto t = rd.expect("kind");
    rd.need(t, 2);
    m.kind = parse_model_kind(t[1]);
  }
  {
    auto t = rd.expect("input_arity");
    rd.need(t, 2);
    m.input_arity = static_cast<std::size_t>(rd.integer(t[1]));
  }
  std::size_t n_classes = 0;
  {
    auto t = rd.expect("classes");
    rd.need(t, 2);
    n_classes = static_cast<std::size_t>(rd.integer(t[1]));
  }
  for (std::size_t i = 0; i < n_classes; ++i) {
    auto t = rd.expect("class");
    rd.need(t, 3);
    const int tag = static_cast<int>(rd.integer(t[1]));
    m.classes.push_back(tag);
    m.class_names[tag] = std::string(t[2]);
  }
  {
    auto t = rd.expect("selection");
    rd.need(t, 3);
    const SelectorKind kind = parse_selector(t[1]);
    const auto k = static_cast<std::size_t>(rd.integer(t[2]));
    if (kind != SelectorKind::None) {
      FeatureRanking fr{kind, {}, {}};
      auto idx = rd.expect("indices");
      rd.need(idx, k + 1);
      for (std::size_t i = 0; i < k; ++i) {
        const auto v = rd.integer(idx[i + 1]);
        if (v < 0 || static_cast<std::size_t>(v) >= m.input_arity) throw ParseError("feature index out of range", rd.line());
        fr.indices.push_back(static_cast<int>(v));
      }
      fr.scores = rd.reals("scores", k);
      m.selection = std::move(fr);
    }
  }
  {
    auto t = rd.expect("standardizer");
    rd.need(t, 2);
    const auto d = static_cast<std::size_t>(rd.integer(t[1]));
    m.standardizer.mean = rd.reals("mean", d);
    m.standardizer.stdev = rd.reals("stdev", d);
    const std::size_t expected = m.selection ? m.selection->size() : m.input_arity;
    if (d != expected) throw ParseError("standardizer arity does not match model features", rd.line());
  }
  const std::size_t d = m.standardizer.arity();

  switch (m.kind) {
    case ModelKind::Knn: {
      auto t = rd.expect("knn");
      rd.need(t, 4);
      KnnParams p;
      p.k = static_cast<int>(rd.integer(t[1]));
      const auto rows = rd.integer(t[2]);
      const auto cols = rd.integer(t[3]);
      if (static_cast<std::size_t>(cols) != d) throw ParseError("KNN column count mismatch", rd.line());
      p.train.resize(rows, cols);
      for (Eigen::Index r = 0; r < rows; ++r) {
        auto row = rd.expect("row");
        rd.need(row, static_cast<std::size_t>(cols) + 2);
        p.labels.push_back(static_cast<int>(rd.integer(row[1])));
        for (Eigen::Index c = 0; c < cols; ++c) p.train(r, c) = rd.real(row[c + 2]);
      }
      if (p.k < 1 || p.k > rows) throw ParseError("invalid KNN k", rd.line());
      m.params = std::move(p);
      break;
    }
    case ModelKind::DecisionTree: {
      auto t = rd.expect("tree");
      rd.need(t, 4);
      TreeParams p;
      p.options.max_depth = static_cast<int>(rd.integer(t[1]));
      p.options.min_leaf = static_cast<int>(rd.integer(t[2]));
      const auto n_nodes = static_cast<std::size_t>(rd.integer(t[3]));
      auto tc = rd.expect("tree_classes");
      for (std::size_t i = 1; i < tc.size(); ++i) p.classes.push_back(static_cast<int>(rd.integer(tc[i])));
      for (std::size_t i = 0; i < n_nodes; ++i) {
        auto nt = rd.expect("node");
        rd.need(nt, 6 + p.classes.size());
        TreeNode n;
        n.feature = static_cast<int>(rd.integer(nt[1]));
        n.threshold = rd.real(nt[2]);
        n.left = static_cast<int>(rd.integer(nt[3]));
        n.right = static_cast<int>(rd.integer(nt[4]));
        n.depth = static_cast<int>(rd.integer(nt[5]));
        for (std::size_t c = 0; c < p.classes.size(); ++c) n.counts.push_back(static_cast<int>(rd.integer(nt[6 + c])));
        const auto limit = static_cast<int>(n_nodes);
        if (n.feature >= static_cast<int>(d) ||
            (n.feature >= 0 && (n.left <= 0 || n.left >= limit || n.right <= 0 || n.right >= limit))) {
          throw ParseError("invalid tree node", rd.line());
        }
        p.nodes.push_back(std::move(n));
      }
      if (p.nodes.empty()) throw ParseError("tree has no nodes", rd.line());
      m.params = std::move(p);
      break;
    }
    case ModelKind::GaussianSvm: {
      auto t = rd.expect("svm");
      rd.need(t, 6);
      SvmParams p;
      p.C = rd.real(t[1]);
      p.gamma = rd.real(t[2]);
      p.tol = rd.real(t[3]);
      p.max_passes = static_cast<int>(rd.integer(t[4]));
      const auto n_machines = static_cast<std::size_t>(rd.integer(t[5]));
      auto sc = rd.expect("svm_classes");
      for (std::size_t i = 1; i < sc.size(); ++i) p.classes.push_back(static_cast<int>(rd.integer(sc[i])));
      for (std::size_t i = 0; i < n_machines; ++i) {
        auto mt = rd.expect("machine");
        rd.need(mt, 5);
        BinarySvm b;
        b.positive_class = static_cast<int>(rd.integer(mt[1]));
        b.negative_class = static_cast<int>(rd.integer(mt[2]));
        b.bias = rd.real(mt[3]);
        const auto n_sv = rd.integer(mt[4]);
        b.support.resize(n_sv, static_cast<Eigen::Index>(d));
        for (Eigen::Index s = 0; s < n_sv; ++s) {
          auto st = rd.expect("sv");
          rd.need(st, d + 3);
          b.alpha.push_back(rd.real(st[1]));
          b.y.push_back(static_cast<int>(rd.integer(st[2])));
          for (std::size_t c = 0; c < d; ++c) b.support(s, static_cast<Eigen::Index>(c)) = rd.real(st[3 + c]);
        }
        p.machines.push_back(std::move(b));
      }
      if (p.classes.size() < 2) throw ParseError("SVM needs at least two classes", rd.line());
      m.params = std::move(p);
      break;
    }
  }
  rd.expect("end");
  return m;
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  text::write_file_atomic(path, format_model(model));
}

TrainedModel load_model(const std::filesystem::path& path) { return parse_model(text::read_file(path)); }

}  // namespace nvmfp
