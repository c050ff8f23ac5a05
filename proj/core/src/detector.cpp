#include "nvmfp/detector.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nvmfp/error.hpp"
#include "nvmfp/random.hpp"
#include "nvmfp/text_io.hpp"

namespace nvmfp {

// ---------------------------------------------------------------------------
// Spatial map I/O

std::string format_map_csv(const SpatialLatencyMap& map) {
  std::string out = "addr,latency_us\n";
  for (std::size_t a = 0; a < map.latencies.size(); ++a) {
    out += std::to_string(a);
    out += ',';
    out += text::fixed(map.latencies[a], 6);
    out += '\n';
  }
  return out;
}

SpatialLatencyMap parse_map_csv(std::string_view content) {
  const auto all = text::lines(content);
  if (all.empty() || text::trim(all[0]) != "addr,latency_us") {
    throw ParseError("expected header 'addr,latency_us'", 1);
  }
  SpatialLatencyMap map;
  for (std::size_t i = 1; i < all.size(); ++i) {
    if (text::trim(all[i]).empty()) continue;
    const auto cells = text::split(all[i], ',');
    if (cells.size() != 2) throw ParseError("expected 2 columns", i + 1);
    const auto addr = text::parse_uint(cells[0], i + 1);
    if (addr != map.latencies.size()) {
      throw ParseError("addresses must be consecutive from 0 (expected " + std::to_string(map.latencies.size()) + ")",
                       i + 1);
    }
    const double v = text::parse_double(cells[1], i + 1);
    if (!(v > 0.0) || !std::isfinite(v)) throw ParseError("latency must be positive", i + 1);
    map.latencies.push_back(v);
  }
  if (map.latencies.empty()) throw ParseError("map has no rows");
  return map;
}

void save_map(const SpatialLatencyMap& map, const std::filesystem::path& path) {
  text::write_file_atomic(path, format_map_csv(map));
}

SpatialLatencyMap load_map(const std::filesystem::path& path) { return parse_map_csv(text::read_file(path)); }

// ---------------------------------------------------------------------------

Identification identify_manufacturer(std::span<const double> probe, const TrainedModel& model) {
  if (probe.size() != kFeatureArity) {
    throw ValidationError("probe must contain " + std::to_string(kFeatureArity) + " latencies, got " +
                          std::to_string(probe.size()));
  }
  if (model.input_arity != kFeatureArity) {
    throw ValidationError("model was trained on " + std::to_string(model.input_arity) + " features");
  }
  const Prediction p = predict_detail(model, probe);
  Identification id;
  id.class_tag = p.label;
  id.scores = p.scores;
  auto it = model.class_names.find(p.label);
  id.label = it != model.class_names.end() ? it->second : default_class_name(p.label);
  return id;
}

std::string_view to_string(RecycleVerdict v) noexcept {
  switch (v) {
    case RecycleVerdict::Fresh: return "FRESH";
    case RecycleVerdict::Used: return "USED";
    case RecycleVerdict::Indeterminate: return "INDETERMINATE";
  }
  return "?";
}

double median(std::span<const double> values) {
  if (values.empty()) throw ValidationError("median of empty set");
  std::vector<double> v(values.begin(), values.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return lo + (hi - lo) / 2.0;
}

RecycleVerdict classify_elevation(double ratio, const RecycleThresholds& t) {
  if (ratio >= t.used_min) return RecycleVerdict::Used;
  if (ratio <= t.fresh_max) return RecycleVerdict::Fresh;
  return RecycleVerdict::Indeterminate;
}

RecycleResult detect_recycled(std::span<const double> probe, int predicted_class, const BaselineTable& baseline,
                              const RecycleThresholds& thresholds) {
  if (!(thresholds.fresh_max < thresholds.used_min)) {
    throw ValidationError("fresh threshold must be below the used threshold");
  }
  auto it = baseline.find(predicted_class);
  if (it == baseline.end()) throw ValidationError("no fresh baseline for class " + std::to_string(predicted_class));
  if (!(it->second.mean_us > 0.0)) throw ValidationError("fresh baseline mean must be positive");
  RecycleResult r;
  r.elevation_ratio = median(probe) / it->second.mean_us;
  r.verdict = classify_elevation(r.elevation_ratio, thresholds);
  return r;
}

BaselineTable fresh_baseline_from_catalog(const std::vector<ChipClassSpec>& catalog) {
  BaselineTable t;
  for (const auto& s : catalog) {
    const double noise_mean = std::exp(s.noise_sigma * s.noise_sigma / 2.0);
    const double mean = s.base_latency_us * noise_mean;
    const double rel = std::sqrt(s.chip_sigma * s.chip_sigma + s.loc_sigma * s.loc_sigma +
                                 (std::exp(s.noise_sigma * s.noise_sigma) - 1.0));
    t[s.class_tag] = {mean, mean * rel};
  }
  return t;
}

BaselineTable fresh_baseline_from_stats(const std::vector<WindowStats>& stats) {
  BaselineTable t;
  for (const auto& w : stats) {
    if (w.checkpoint == 0 && w.side == WindowSide::After) t[w.class_tag] = {w.mean, w.stdev};
  }
  return t;
}

std::vector<UsedRegion> locate_used_regions(const SpatialLatencyMap& map, double flag_ratio) {
  if (map.latencies.empty()) throw ValidationError("spatial map is empty");
  if (!(flag_ratio > 1.0)) throw ValidationError("flag_ratio must be > 1");
  const double base = median(map.latencies);
  std::vector<UsedRegion> regions;
  bool open = false;
  for (std::size_t a = 0; a < map.latencies.size(); ++a) {
    const double ratio = map.latencies[a] / base;
    if (ratio >= flag_ratio) {
      if (!open) {
        regions.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a), ratio});
        open = true;
      } else {
        regions.back().end_addr = static_cast<std::uint32_t>(a);
        regions.back().peak_ratio = std::max(regions.back().peak_ratio, ratio);
      }
    } else {
      open = false;
    }
  }
  return regions;
}

UsedChipScenario simulate_used_chip(const ChipClassSpec& spec, std::uint64_t chip_seed,
                                    const std::vector<std::uint64_t>& cycles) {
  UsedChipScenario sc{ChipInstance(spec, chip_seed), {}};
  if (cycles.size() * 3 > spec.num_locations) throw ValidationError("too many used spots for this chip");
  Rng rng(derive_seed({chip_seed, static_cast<std::uint64_t>(spec.class_tag), 0x05edULL}));
  std::vector<std::uint32_t> picked;
  while (picked.size() < cycles.size()) {
    const auto a = static_cast<std::uint32_t>(rng.below(spec.num_locations));
    const bool clash = std::any_of(picked.begin(), picked.end(), [&](std::uint32_t p) {
      return (a > p ? a - p : p - a) < 3;
    });
    if (!clash) picked.push_back(a);
  }
  for (std::size_t i = 0; i < cycles.size(); ++i) {
    sc.chip.cycle_location(picked[i], cycles[i]);
    const double elevation = sc.chip.expected_latency(picked[i]) / (spec.base_latency_us * sc.chip.chip_factor());
    sc.spots.push_back({picked[i], cycles[i], elevation});
  }
  return sc;
}

std::string format_detection_text(const DetectionReport& r) {
  std::ostringstream os;
  if (r.has_identification) {
    os << "predicted class: " << r.identification.class_tag << " (" << r.identification.label << ")\n";
    os << "scores:";
    for (const auto& [c, v] : r.identification.scores) os << ' ' << c << '=' << text::sig(v, 6);
    os << '\n';
  }
  if (r.has_recycle) {
    os << "recycled verdict: " << to_string(r.recycle.verdict)
       << "  elevation ratio: " << text::fixed(r.recycle.elevation_ratio, 4) << '\n';
  }
  if (r.map_size > 0) {
    os << "scanned addresses: " << r.map_size << "  flag ratio: " << text::fixed(r.flag_ratio, 3) << '\n';
    if (r.used_regions.empty()) {
      os << "no used regions\n";
    } else {
      os << "used regions: " << r.used_regions.size() << '\n';
      for (const auto& g : r.used_regions) {
        os << "  " << g.start_addr << '-' << g.end_addr << "  peak " << text::fixed(g.peak_ratio, 3) << "x\n";
      }
    }
  }
  return os.str();
}

std::string format_detection_csv(const DetectionReport& r) {
  std::ostringstream os;
  os << "# verdict\n";
  os << "field,value\n";
  if (r.has_identification) {
    os << "predicted_class," << r.identification.class_tag << '\n';
    os << "predicted_label," << r.identification.label << '\n';
  }
  if (r.has_recycle) {
    os << "recycled_verdict," << to_string(r.recycle.verdict) << '\n';
    os << "elevation_ratio," << text::fixed(r.recycle.elevation_ratio, 6) << '\n';
  }
  if (r.map_size > 0) {
    os << "map_size," << r.map_size << '\n';
    os << "flag_ratio," << text::fixed(r.flag_ratio, 6) << '\n';
  }
  if (r.has_identification) {
    os << "# scores\n";
    os << "class,score\n";
    for (const auto& [c, v] : r.identification.scores) os << c << ',' << text::sig(v, 9) << '\n';
  }
  os << "# used_regions\n";
  os << "start_addr,end_addr,peak_ratio\n";
  for (const auto& g : r.used_regions) os << g.start_addr << ',' << g.end_addr << ',' << text::fixed(g.peak_ratio, 6) << '\n';
  return os.str();
}

}  // namespace nvmfp
