#include <filesystem>
#include <random>

#include "doctest.h"
#include "nvmfp/classifiers.hpp"
#include "nvmfp/error.hpp"
#include "nvmfp/parallel.hpp"
#include "nvmfp/text_io.hpp"

using namespace nvmfp;

namespace {

Dataset small_dataset() {
  DatasetParams p;
  p.chips_per_class = 2;
  p.locations_per_chip = 3;
  return build_dataset(builtin_catalog(), p);
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("nvmfp_test_io_" + name);
}

}  // namespace

TEST_CASE("model files round-trip for every kind") {
  const auto [train, test] = split(small_dataset(), 0.8, 2);
  for (auto kind : {ModelKind::Knn, ModelKind::DecisionTree, ModelKind::GaussianSvm}) {
    for (auto sel : {SelectorKind::None, SelectorKind::Mrmr, SelectorKind::Nca}) {
      PipelineConfig c;
      c.kind = kind;
      c.selector = sel;
      c.select_k = 10;
      c.nca.iters = 10;
      const TrainedModel m = train_model(train, c);
      const std::string text_form = format_model(m);
      const TrainedModel back = parse_model(text_form);
      CHECK(format_model(back) == text_form);
      CHECK(back.kind == m.kind);
      CHECK(back.classes == m.classes);
      CHECK(back.input_arity == m.input_arity);
      CHECK(back.selection.has_value() == m.selection.has_value());

      std::size_t agree = 0;
      for (const auto& s : test.samples) agree += predict(back, s) == predict(m, s);
      CHECK(agree >= test.size() - 1);

      const auto path = temp_path("model.txt");
      save_model(m, path);
      CHECK(format_model(load_model(path)) == text_form);
      std::filesystem::remove(path);
    }
  }
}

TEST_CASE("model parse errors") {
  CHECK_THROWS_AS(parse_model(""), ParseError);
  CHECK_THROWS_AS(parse_model("nvmfp-model 2\n"), ParseError);
  const auto [train, test] = split(small_dataset(), 0.8, 2);
  std::string good = format_model(train_knn(train, 3));
  std::string truncated = good.substr(0, good.size() / 2);
  CHECK_THROWS_AS(parse_model(truncated), ParseError);
  CHECK_THROWS_AS(load_model(temp_path("missing_model.txt")), IoError);
}

TEST_CASE("model arity mismatch on predict") {
  const auto [train, test] = split(small_dataset(), 0.8, 2);
  const auto m = train_tree(train);
  CHECK_THROWS_AS(predict(m, std::vector<double>(99, 1.0)), ValidationError);
}

TEST_CASE("results do not depend on the worker count") {
  const auto ds = small_dataset();
  const auto [train, test] = split(ds, 0.8, 4);
  PipelineConfig c;
  c.kind = ModelKind::GaussianSvm;
  set_max_jobs(1);
  const auto one = format_model(train_model(train, c));
  const auto ds_one = format_dataset_csv(build_dataset(builtin_catalog(), {}));
  set_max_jobs(4);
  const auto four = format_model(train_model(train, c));
  const auto ds_four = format_dataset_csv(build_dataset(builtin_catalog(), {}));
  set_max_jobs(0);
  CHECK(one == four);
  CHECK(ds_one == ds_four);
}

TEST_CASE("text helpers") {
  CHECK(text::fixed(1.23456, 2) == "1.23");
  CHECK(text::sig(0.1, 9) == "0.1");
  CHECK(text::parse_double("2.5") == 2.5);
  CHECK_THROWS_AS(text::parse_double("2.5x", 4), ParseError);
  CHECK(text::parse_uint("42") == 42u);
  CHECK_THROWS_AS(text::parse_uint("-1"), ParseError);
  CHECK(text::lines("a\r\nb\n").size() == 2);
  CHECK(text::split("a,,b", ',').size() == 3);
  CHECK(text::trim("  x \t") == "x");

  const auto path = temp_path("atomic.txt");
  text::write_file_atomic(path, "hello\n");
  CHECK(text::read_file(path) == "hello\n");
  std::filesystem::remove(path);
  CHECK_THROWS_AS(text::write_file_atomic("/nonexistent-dir/x.txt", "x"), IoError);
}
