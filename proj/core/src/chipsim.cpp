#include "nvmfp/chipsim.hpp"

#include <algorithm>
#include <cmath>

#include "nvmfp/error.hpp"
#include "nvmfp/random.hpp"

namespace nvmfp {

namespace {

// Sub-key domains.
constexpr std::uint64_t kChipDomain = 0xc41bULL;
constexpr std::uint64_t kLocDomain = 0x10cULL;
constexpr std::uint64_t kNoiseDomain = 0x401eULL;

// Multipliers are clamped away from zero; with the sigmas used in practice
// (a few percent) the clamp never engages.
double gaussian_multiplier(double sigma, std::uint64_t key) {
  if (sigma == 0.0) return 1.0;
  return std::max(0.05, 1.0 + sigma * standard_normal(key));
}

}  // namespace

double ChipClassSpec::wear_multiplier(std::uint64_t wear) const noexcept {
  const double x = static_cast<double>(wear) / static_cast<double>(drift_ref_cycles);
  double m = 1.0 + drift_amplitude * std::pow(x, drift_exponent);
  if (step_cycles && step_factor && wear >= *step_cycles) m *= *step_factor;
  return m;
}

double quantize_latency(double latency_us) noexcept {
  const double ticks = std::max(1.0, std::round(latency_us * 100.0));
  return ticks / 100.0;
}

ChipInstance::ChipInstance(ChipClassSpec spec, std::uint64_t chip_seed)
    : spec_(std::move(spec)),
      chip_seed_(chip_seed),
      key_(derive_seed({static_cast<std::uint64_t>(spec_.class_tag), chip_seed})),
      chip_factor_(gaussian_multiplier(spec_.chip_sigma, derive_seed({key_, kChipDomain}))),
      loc_factor_(spec_.num_locations),
      wear_(spec_.num_locations, 0) {
  for (std::uint32_t a = 0; a < spec_.num_locations; ++a) {
    loc_factor_[a] = gaussian_multiplier(spec_.loc_sigma, derive_seed({key_, kLocDomain, a}));
  }
}

ChipInstance new_chip(const ChipClassSpec& spec, std::uint64_t chip_seed) {
  return ChipInstance(spec, chip_seed);
}

void ChipInstance::check_addr(std::uint32_t addr) const {
  if (addr >= spec_.num_locations) {
    throw RangeError("address " + std::to_string(addr) + " out of range for class" +
                     std::to_string(spec_.class_tag) + " (" +
                     std::to_string(spec_.num_locations) + " locations)");
  }
}

double ChipInstance::loc_factor(std::uint32_t addr) const {
  check_addr(addr);
  return loc_factor_[addr];
}

std::uint64_t ChipInstance::wear(std::uint32_t addr) const {
  check_addr(addr);
  return wear_[addr];
}

double ChipInstance::expected_latency(std::uint32_t addr) const {
  check_addr(addr);
  return spec_.base_latency_us * chip_factor_ * loc_factor_[addr] *
         spec_.wear_multiplier(wear_[addr]);
}

double ChipInstance::latency_sample(std::uint32_t addr, bool advance) {
  check_addr(addr);
  const std::uint64_t w = wear_[addr];
  double latency = spec_.base_latency_us * chip_factor_ * loc_factor_[addr] *
                   spec_.wear_multiplier(w);
  if (spec_.noise_sigma > 0.0) {
    latency *= std::exp(spec_.noise_sigma * standard_normal(derive_seed({key_, kNoiseDomain, addr, w})));
  }
  if (advance) ++wear_[addr];
  return quantize_latency(latency);
}

void ChipInstance::cycle_location(std::uint32_t addr, std::uint64_t n) {
  check_addr(addr);
  wear_[addr] += n;
}

SpatialLatencyMap ChipInstance::full_chip_scan() {
  SpatialLatencyMap map;
  map.class_tag = spec_.class_tag;
  map.latencies.resize(spec_.num_locations);
  for (std::uint32_t a = 0; a < spec_.num_locations; ++a) map.latencies[a] = latency_sample(a, true);
  return map;
}

}  // namespace nvmfp
