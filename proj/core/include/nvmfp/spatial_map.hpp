#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nvmfp {

// One latency (us) per address of a whole chip.
struct SpatialLatencyMap {
  std::optional<int> class_tag;
  std::vector<double> latencies;

  bool operator==(const SpatialLatencyMap&) const = default;
};

// Two-column CSV `addr,latency_us`; rows must cover addresses 0..n-1 in order.
std::string format_map_csv(const SpatialLatencyMap& map);
SpatialLatencyMap parse_map_csv(std::string_view text);
void save_map(const SpatialLatencyMap& map, const std::filesystem::path& path);
SpatialLatencyMap load_map(const std::filesystem::path& path);

}  // namespace nvmfp
