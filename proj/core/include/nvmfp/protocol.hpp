#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nvmfp/chipsim.hpp"

namespace nvmfp {

// Number of consecutive latencies forming one classifier sample.
inline constexpr std::size_t kFeatureArity = 100;

struct TraceSample {
  std::uint64_t cycle_index = 0;  // 1-based: the n-th operation at the location
  double latency_us = 0.0;

  bool operator==(const TraceSample&) const = default;
};

struct LatencyTrace {
  int class_tag = 0;
  std::uint64_t chip_seed = 0;
  std::uint32_t addr = 0;
  std::vector<TraceSample> samples;

  bool operator==(const LatencyTrace&) const = default;
};

struct SampleMeta {
  std::uint64_t chip_seed = 0;
  std::uint32_t addr = 0;
  std::uint64_t checkpoint = 0;

  bool operator==(const SampleMeta&) const = default;
};

struct FeatureVector {
  std::vector<double> features;
  int label = 0;
  SampleMeta meta;

  bool operator==(const FeatureVector&) const = default;
};

struct Dataset {
  std::vector<FeatureVector> samples;
  std::map<int, std::string> class_names;

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }
  // Feature count of the first sample (0 when empty).
  std::size_t arity() const noexcept;
  std::vector<int> labels() const;
  // Distinct labels, ascending.
  std::vector<int> classes() const;
  std::map<int, std::size_t> class_counts() const;
  Dataset subset(const std::vector<std::size_t>& indices) const;

  // Throws ValidationError on ragged rows or labels missing from class_names.
  void validate() const;

  bool operator==(const Dataset&) const = default;
};

std::string default_class_name(int class_tag);

// Simulated WIP-polled trace: n_cycles advancing samples from a fresh chip.
LatencyTrace collect_trace(const ChipClassSpec& spec, std::uint64_t chip_seed,
                           std::uint32_t addr, std::uint64_t n_cycles);
std::string format_trace_csv(const LatencyTrace& trace);

struct DatasetParams {
  std::uint64_t seed = 1;
  std::uint32_t chips_per_class = 3;
  std::vector<std::uint64_t> checkpoints = {0, 1000, 5000, 10000, 15000, 30000, 50000};
  std::uint32_t group = static_cast<std::uint32_t>(kFeatureArity);
  // 9 classes x 3 chips x 12 locations x 7 checkpoints = 2268 samples.
  std::uint32_t locations_per_chip = 12;
};

// Seed of the chip_index-th chip of a class, derived from the root seed.
std::uint64_t dataset_chip_seed(std::uint64_t root_seed, int class_tag, std::uint32_t chip_index);
// Random locations probed on one chip.
std::vector<std::uint32_t> dataset_locations(const ChipClassSpec& spec, std::uint64_t chip_seed,
                                             std::uint32_t count);

// For every (class, chip, location, checkpoint), fast-forward the location
// to the checkpoint and record `group` consecutive advancing samples.
// Rows are ordered class, chip, location, checkpoint.
Dataset build_dataset(const std::vector<ChipClassSpec>& catalog, const DatasetParams& params);

// Stratified shuffle split; per-class train count = round(fraction * count).
std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction, std::uint64_t seed);

enum class WindowSide { Before, After };
std::string_view to_string(WindowSide s) noexcept;

struct WindowStats {
  int class_tag = 0;
  std::uint64_t checkpoint = 0;
  WindowSide side = WindowSide::Before;
  double mean = 0.0;
  double stdev = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t n = 0;
};

struct StatsParams {
  std::uint64_t seed = 1;
  std::uint32_t chips = 2;
  std::uint32_t locations = 5;
  std::vector<std::uint64_t> checkpoints = {1000, 6000, 16000, 36000};
  std::uint32_t span = 50;
};

// BEFORE covers cycles (c - span, c], AFTER covers (c, c + span]. A
// checkpoint of 0 has no BEFORE window. Windows of consecutive checkpoints
// must not overlap.
std::vector<WindowStats> latency_stats(const std::vector<ChipClassSpec>& specs,
                                       const StatsParams& params);
std::string format_stats_csv(const std::vector<WindowStats>& stats);

// Dataset CSV: header `class,chip_seed,addr,checkpoint,f000,...`.
std::string format_dataset_csv(const Dataset& ds);
Dataset parse_dataset_csv(std::string_view content,
                          std::optional<std::size_t> expected_arity = kFeatureArity);
void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path,
                     std::optional<std::size_t> expected_arity = kFeatureArity);

}  // namespace nvmfp
