#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nvmfp/spatial_map.hpp"

namespace nvmfp {

enum class Technology { NorFlash, Cbram, Rram };
enum class OpKind { SectorErase, PageWrite };

std::string_view to_string(Technology t) noexcept;
std::string_view to_string(OpKind k) noexcept;
Technology parse_technology(std::string_view s);
OpKind parse_op_kind(std::string_view s);

// Latency/degradation parameters for one chip class. The curve is
//
//   L(w) = base * chip * loc(addr) * (1 + a * (w / c_ref)^b) * step(w) * exp(eps)
//
// with step(w) = step_factor once w >= step_cycles, eps ~ N(0, noise_sigma^2),
// and chip/loc Gaussian multipliers around 1.
struct ChipClassSpec {
  int class_tag = 0;
  std::string manufacturer;
  std::string capacity_label;
  Technology technology = Technology::NorFlash;
  OpKind op_kind = OpKind::SectorErase;
  std::uint32_t num_locations = 1024;
  double base_latency_us = 1.0;
  double drift_amplitude = 0.0;
  double drift_exponent = 1.0;
  std::uint64_t drift_ref_cycles = 10000;
  double noise_sigma = 0.0;
  double chip_sigma = 0.0;
  double loc_sigma = 0.0;
  std::optional<std::uint64_t> step_cycles;
  std::optional<double> step_factor;

  // Noise-free wear multiplier (1 + a (w/c_ref)^b) * step(w).
  double wear_multiplier(std::uint64_t wear) const noexcept;

  bool operator==(const ChipClassSpec&) const = default;
};

// Throws ValidationError describing the first violated invariant.
void validate(const ChipClassSpec& spec);
void validate_catalog(const std::vector<ChipClassSpec>& catalog);

// The nine default classes, parsed from the text embedded at build time.
const std::vector<ChipClassSpec>& builtin_catalog();
std::string_view builtin_catalog_text() noexcept;

// Catalog text format: CSV with a header row, '#' comments, one class per row.
std::vector<ChipClassSpec> parse_catalog(std::string_view text);
std::string format_catalog(const std::vector<ChipClassSpec>& catalog);

// `source` is a file path or the literal "builtin".
std::vector<ChipClassSpec> load_catalog(std::string_view source);

const ChipClassSpec& find_class(const std::vector<ChipClassSpec>& catalog, int class_tag);

// A simulated chip. Per-chip and per-location multipliers are fixed at
// construction; read noise is keyed by (chip, addr, wear) so the value of a
// sample does not depend on the order in which addresses are visited.
class ChipInstance {
 public:
  ChipInstance(ChipClassSpec spec, std::uint64_t chip_seed);

  const ChipClassSpec& spec() const noexcept { return spec_; }
  int class_tag() const noexcept { return spec_.class_tag; }
  std::uint64_t chip_seed() const noexcept { return chip_seed_; }
  std::uint32_t num_locations() const noexcept { return spec_.num_locations; }

  double chip_factor() const noexcept { return chip_factor_; }
  double loc_factor(std::uint32_t addr) const;
  std::uint64_t wear(std::uint32_t addr) const;

  // One timed operation at `addr`; wear advances by one afterwards if
  // `advance` is set. Latency in microseconds, quantized to 0.01 us.
  double latency_sample(std::uint32_t addr, bool advance = true);

  // Adds n program/erase cycles at addr without sampling.
  void cycle_location(std::uint32_t addr, std::uint64_t n);

  // Noise-free, unquantized latency at the current wear of addr.
  double expected_latency(std::uint32_t addr) const;

  // One advancing sample per address, in address order.
  SpatialLatencyMap full_chip_scan();

  bool operator==(const ChipInstance&) const = default;

 private:
  void check_addr(std::uint32_t addr) const;

  ChipClassSpec spec_;
  std::uint64_t chip_seed_;
  std::uint64_t key_;
  double chip_factor_;
  std::vector<double> loc_factor_;
  std::vector<std::uint64_t> wear_;
};

ChipInstance new_chip(const ChipClassSpec& spec, std::uint64_t chip_seed);

// Latency resolution of the measurement setup: 10 ns.
inline constexpr double kLatencyResolutionUs = 0.01;
double quantize_latency(double latency_us) noexcept;

}  // namespace nvmfp
