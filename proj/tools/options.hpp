#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nvmfp/classifiers.hpp"

namespace nvmfp::cli {

// Hyperparameters shared by train / crossval / sweep. Grid-capable fields
// are lists; commands that train a single model take the first entry.
struct PipelineOptions {
  std::string model = "knn";
  std::string selector = "none";
  int select_k = 25;
  std::vector<int> knn_k = {5};
  std::vector<double> svm_c = {1.0};
  std::vector<std::string> svm_gamma = {"auto"};
  double svm_tol = 1e-3;
  int svm_max_passes = 10;
  std::vector<int> max_depth = {20};
  int min_leaf = 1;
  int mrmr_bins = 16;
  int nca_iters = 200;
  double nca_rate = 0.01;
  std::size_t nca_max_samples = 0;
  std::uint64_t nca_seed = 1;
  bool no_standardize = false;
};

void add_pipeline_options(CLI::App* cmd, PipelineOptions& o, bool with_kind, bool grid);

// One concrete configuration; grid entries index into the option lists.
PipelineConfig make_config(const PipelineOptions& o, std::size_t k_idx = 0, std::size_t c_idx = 0,
                           std::size_t g_idx = 0, std::size_t d_idx = 0);
std::vector<PipelineConfig> expand_grid(const PipelineOptions& o);

std::string describe_hyperparameters(const PipelineConfig& c);

// Output locations: relative paths resolve against the output directory.
std::filesystem::path resolve_output(const std::filesystem::path& out_dir, const std::string& name);
std::filesystem::path with_suffix(const std::filesystem::path& p, const std::string& suffix,
                                  const std::string& extension);

// The active subcommand's settings as a config file that `--config` accepts.
std::string manifest_text(const CLI::App& app, const CLI::App& sub);

// A probe file: `cycle,latency_us` trace CSV or a single `latency_us` column.
std::vector<double> load_probe(const std::filesystem::path& path);

}  // namespace nvmfp::cli
