#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nvmfp/chipsim.hpp"
#include "nvmfp/classifiers.hpp"
#include "nvmfp/protocol.hpp"
#include "nvmfp/spatial_map.hpp"

namespace nvmfp {

// ---------------------------------------------------------------------------
// Manufacturer identification

struct Identification {
  int class_tag = 0;
  std::string label;
  std::map<int, double> scores;  // KNN votes / tree leaf counts / SVM votes
};

// `probe` must hold exactly kFeatureArity consecutive latencies from one location.
Identification identify_manufacturer(std::span<const double> probe, const TrainedModel& model);

// ---------------------------------------------------------------------------
// Recycled-chip detection

enum class RecycleVerdict { Fresh, Used, Indeterminate };
std::string_view to_string(RecycleVerdict v) noexcept;

struct FreshBaseline {
  double mean_us = 0.0;
  double stdev_us = 0.0;
};
using BaselineTable = std::map<int, FreshBaseline>;

struct RecycleThresholds {
  double fresh_max = 1.1;  // ratio <= fresh_max -> FRESH
  double used_min = 1.3;   // ratio >= used_min  -> USED
};

struct RecycleResult {
  RecycleVerdict verdict = RecycleVerdict::Indeterminate;
  double elevation_ratio = 0.0;
};

RecycleVerdict classify_elevation(double ratio, const RecycleThresholds& t = {});

// elevation_ratio = median(probe) / fresh mean of the predicted class.
RecycleResult detect_recycled(std::span<const double> probe, int predicted_class, const BaselineTable& baseline,
                              const RecycleThresholds& thresholds = {});

// Fresh statistics from the class model: E[L(0)] = base * exp(noise^2 / 2),
// stdev from the combined chip, location and read-noise spread.
BaselineTable fresh_baseline_from_catalog(const std::vector<ChipClassSpec>& catalog);
// Fresh statistics from measured windows: the AFTER window at checkpoint 0.
BaselineTable fresh_baseline_from_stats(const std::vector<WindowStats>& stats);

double median(std::span<const double> values);

// ---------------------------------------------------------------------------
// Used-location localization

struct UsedRegion {
  std::uint32_t start_addr = 0;
  std::uint32_t end_addr = 0;  // inclusive
  double peak_ratio = 0.0;

  bool operator==(const UsedRegion&) const = default;
};

// Flags every address with latency >= flag_ratio * median(map) and merges
// runs of adjacent flagged addresses into regions.
std::vector<UsedRegion> locate_used_regions(const SpatialLatencyMap& map, double flag_ratio = 1.5);

// A simulated chip with artificially worn spots, for scan experiments.
struct UsedSpot {
  std::uint32_t addr = 0;
  std::uint64_t cycles = 0;
  double true_elevation = 0.0;  // noise-free latency over base * chip_factor
};

struct UsedChipScenario {
  ChipInstance chip;
  std::vector<UsedSpot> spots;
};

inline const std::vector<std::uint64_t> kDefaultUsedSpotCycles = {1000, 5000, 10000, 20000, 30000, 50000};

// Picks one seeded random address per entry of `cycles` (spots at least 3
// addresses apart) and fast-forwards each by its cycle count.
UsedChipScenario simulate_used_chip(const ChipClassSpec& spec, std::uint64_t chip_seed,
                                    const std::vector<std::uint64_t>& cycles = kDefaultUsedSpotCycles);

// ---------------------------------------------------------------------------
// Reports

struct DetectionReport {
  bool has_identification = false;
  Identification identification;
  bool has_recycle = false;
  RecycleResult recycle;
  std::vector<UsedRegion> used_regions;
  double flag_ratio = 1.5;
  std::size_t map_size = 0;
};

std::string format_detection_text(const DetectionReport& r);
std::string format_detection_csv(const DetectionReport& r);

}  // namespace nvmfp
