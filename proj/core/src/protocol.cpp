#include "nvmfp/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "nvmfp/error.hpp"
#include "nvmfp/parallel.hpp"
#include "nvmfp/random.hpp"
#include "nvmfp/text_io.hpp"

namespace nvmfp {

namespace {
constexpr std::uint64_t kDatasetChipDomain = 0xda7aULL;
constexpr std::uint64_t kLocationDomain = 0x10ca7eULL;
constexpr std::uint64_t kStatsChipDomain = 0x57a7ULL;
constexpr std::uint64_t kSplitDomain = 0x5b117ULL;
}  // namespace

std::size_t Dataset::arity() const noexcept {
  return samples.empty() ? 0 : samples.front().features.size();
}

std::vector<int> Dataset::labels() const {
  std::vector<int> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.label);
  return out;
}

std::vector<int> Dataset::classes() const {
  std::set<int> tags;
  for (const auto& s : samples) tags.insert(s.label);
  return {tags.begin(), tags.end()};
}

std::map<int, std::size_t> Dataset::class_counts() const {
  std::map<int, std::size_t> counts;
  for (const auto& s : samples) ++counts[s.label];
  return counts;
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
  Dataset out;
  out.class_names = class_names;
  out.samples.reserve(indices.size());
  for (std::size_t i : indices) out.samples.push_back(samples.at(i));
  return out;
}

void Dataset::validate() const {
  const std::size_t d = arity();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].features.size() != d) {
      throw ValidationError("sample " + std::to_string(i) + " has " +
                            std::to_string(samples[i].features.size()) + " features, expected " +
                            std::to_string(d));
    }
    if (!class_names.contains(samples[i].label)) {
      throw ValidationError("sample " + std::to_string(i) + " has unknown label " +
                            std::to_string(samples[i].label));
    }
  }
}

std::string default_class_name(int class_tag) { return "class" + std::to_string(class_tag); }

LatencyTrace collect_trace(const ChipClassSpec& spec, std::uint64_t chip_seed,
                           std::uint32_t addr, std::uint64_t n_cycles) {
  if (n_cycles < 1) throw ValidationError("n_cycles must be >= 1");
  ChipInstance chip(spec, chip_seed);
  LatencyTrace trace{spec.class_tag, chip_seed, addr, {}};
  trace.samples.reserve(n_cycles);
  for (std::uint64_t c = 1; c <= n_cycles; ++c) {
    trace.samples.push_back({c, chip.latency_sample(addr, true)});
  }
  return trace;
}

std::string format_trace_csv(const LatencyTrace& trace) {
  std::string out = "cycle,latency_us\n";
  out.reserve(out.size() + trace.samples.size() * 20);
  for (const auto& s : trace.samples) {
    out += std::to_string(s.cycle_index);
    out += ',';
    out += text::fixed(s.latency_us, 2);
    out += '\n';
  }
  return out;
}

std::uint64_t dataset_chip_seed(std::uint64_t root_seed, int class_tag, std::uint32_t chip_index) {
  return derive_seed({root_seed, kDatasetChipDomain, static_cast<std::uint64_t>(class_tag), chip_index});
}

std::vector<std::uint32_t> dataset_locations(const ChipClassSpec& spec, std::uint64_t chip_seed,
                                             std::uint32_t count) {
  return sample_distinct(derive_seed({chip_seed, kLocationDomain, static_cast<std::uint64_t>(spec.class_tag)}),
                         spec.num_locations, count);
}

Dataset build_dataset(const std::vector<ChipClassSpec>& catalog, const DatasetParams& p) {
  if (catalog.empty()) throw ValidationError("empty catalog");
  validate_catalog(catalog);
  if (p.group < 1) throw ValidationError("group must be >= 1");
  if (p.locations_per_chip < 1) throw ValidationError("locations_per_chip must be >= 1");
  if (p.chips_per_class < 1) throw ValidationError("chips_per_class must be >= 1");
  if (p.checkpoints.empty()) throw ValidationError("at least one checkpoint is required");
  if (!std::is_sorted(p.checkpoints.begin(), p.checkpoints.end())) {
    throw ValidationError("checkpoints must be sorted ascending");
  }
  for (const auto& spec : catalog) {
    if (p.locations_per_chip > spec.num_locations) {
      throw ValidationError("locations_per_chip exceeds num_locations of class" +
                            std::to_string(spec.class_tag));
    }
  }

  const std::size_t jobs = catalog.size() * p.chips_per_class;
  std::vector<std::vector<FeatureVector>> parts(jobs);
  parallel_for(jobs, [&](std::size_t job) {
    const ChipClassSpec& spec = catalog[job / p.chips_per_class];
    const auto chip_index = static_cast<std::uint32_t>(job % p.chips_per_class);
    const std::uint64_t chip_seed = dataset_chip_seed(p.seed, spec.class_tag, chip_index);
    ChipInstance chip(spec, chip_seed);
    auto& out = parts[job];
    out.reserve(p.locations_per_chip * p.checkpoints.size());
    for (std::uint32_t addr : dataset_locations(spec, chip_seed, p.locations_per_chip)) {
      for (std::uint64_t ckpt : p.checkpoints) {
        const std::uint64_t w = chip.wear(addr);
        if (w < ckpt) chip.cycle_location(addr, ckpt - w);
        FeatureVector fv;
        fv.label = spec.class_tag;
        fv.meta = {chip_seed, addr, ckpt};
        fv.features.resize(p.group);
        for (auto& f : fv.features) f = chip.latency_sample(addr, true);
        out.push_back(std::move(fv));
      }
    }
  });

  Dataset ds;
  for (const auto& spec : catalog) ds.class_names[spec.class_tag] = default_class_name(spec.class_tag);
  ds.samples.reserve(jobs * p.locations_per_chip * p.checkpoints.size());
  for (auto& part : parts) {
    std::move(part.begin(), part.end(), std::back_inserter(ds.samples));
  }
  return ds;
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ValidationError("train_fraction must be in (0, 1)");
  }
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < ds.samples.size(); ++i) by_class[ds.samples[i].label].push_back(i);

  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> test_idx;
  for (auto& [tag, idx] : by_class) {
    if (idx.size() < 2) {
      throw ValidationError("class " + std::to_string(tag) + " has fewer than 2 samples; cannot stratify");
    }
    Rng rng(derive_seed({seed, kSplitDomain, static_cast<std::uint64_t>(tag)}));
    rng.shuffle(idx);
    auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(idx.size())));
    n_train = std::clamp<std::size_t>(n_train, 1, idx.size() - 1);
    train_idx.insert(train_idx.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    test_idx.insert(test_idx.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  return {ds.subset(train_idx), ds.subset(test_idx)};
}

std::string_view to_string(WindowSide s) noexcept {
  return s == WindowSide::Before ? "BEFORE" : "AFTER";
}

namespace {

WindowStats summarize(int tag, std::uint64_t ckpt, WindowSide side, const std::vector<double>& v) {
  WindowStats ws;
  ws.class_tag = tag;
  ws.checkpoint = ckpt;
  ws.side = side;
  ws.n = v.size();
  if (v.empty()) return ws;
  double sum = 0.0;
  ws.min = std::numeric_limits<double>::infinity();
  ws.max = -std::numeric_limits<double>::infinity();
  for (double x : v) {
    sum += x;
    ws.min = std::min(ws.min, x);
    ws.max = std::max(ws.max, x);
  }
  ws.mean = std::clamp(sum / static_cast<double>(v.size()), ws.min, ws.max);
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - ws.mean) * (x - ws.mean);
    ws.stdev = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return ws;
}

}  // namespace

std::vector<WindowStats> latency_stats(const std::vector<ChipClassSpec>& specs, const StatsParams& p) {
  if (p.span < 1) throw ValidationError("span must be >= 1");
  if (p.chips < 1 || p.locations < 1) throw ValidationError("chips and locations must be >= 1");
  for (std::size_t i = 0; i < p.checkpoints.size(); ++i) {
    const std::uint64_t c = p.checkpoints[i];
    if (c != 0 && c < p.span) {
      throw ValidationError("checkpoint " + std::to_string(c) + " is shorter than the window span");
    }
    if (i > 0 && c < p.checkpoints[i - 1] + 2ULL * p.span) {
      throw ValidationError("windows around checkpoints " + std::to_string(p.checkpoints[i - 1]) +
                            " and " + std::to_string(c) + " overlap");
    }
  }

  std::vector<WindowStats> out;
  for (const auto& spec : specs) {
    if (p.locations > spec.num_locations) {
      throw ValidationError("more locations requested than class" + std::to_string(spec.class_tag) + " has");
    }
    std::vector<std::vector<double>> before(p.checkpoints.size());
    std::vector<std::vector<double>> after(p.checkpoints.size());
    for (std::uint32_t c = 0; c < p.chips; ++c) {
      const std::uint64_t chip_seed = derive_seed({p.seed, kStatsChipDomain, static_cast<std::uint64_t>(spec.class_tag), c});
      ChipInstance chip(spec, chip_seed);
      for (std::uint32_t addr : dataset_locations(spec, chip_seed, p.locations)) {
        for (std::size_t k = 0; k < p.checkpoints.size(); ++k) {
          const std::uint64_t ckpt = p.checkpoints[k];
          if (ckpt > 0) {
            chip.cycle_location(addr, ckpt - p.span - chip.wear(addr));
            for (std::uint32_t s = 0; s < p.span; ++s) before[k].push_back(chip.latency_sample(addr, true));
          } else {
            chip.cycle_location(addr, ckpt - chip.wear(addr));
          }
          for (std::uint32_t s = 0; s < p.span; ++s) after[k].push_back(chip.latency_sample(addr, true));
        }
      }
    }
    for (std::size_t k = 0; k < p.checkpoints.size(); ++k) {
      if (p.checkpoints[k] > 0) {
        out.push_back(summarize(spec.class_tag, p.checkpoints[k], WindowSide::Before, before[k]));
      }
      out.push_back(summarize(spec.class_tag, p.checkpoints[k], WindowSide::After, after[k]));
    }
  }
  return out;
}

std::string format_stats_csv(const std::vector<WindowStats>& stats) {
  std::ostringstream os;
  os << "class,checkpoint,side,n,mean_us,stdev_us,min_us,max_us\n";
  for (const auto& s : stats) {
    os << s.class_tag << ',' << s.checkpoint << ',' << to_string(s.side) << ',' << s.n << ','
       << text::fixed(s.mean, 4) << ',' << text::fixed(s.stdev, 4) << ',' << text::fixed(s.min, 2)
       << ',' << text::fixed(s.max, 2) << '\n';
  }
  return os.str();
}

}  // namespace nvmfp
