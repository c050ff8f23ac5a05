#include "nvmfp/random.hpp"

#include <cmath>
#include <numbers>
#include <unordered_set>

#include "nvmfp/error.hpp"

namespace nvmfp {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) noexcept {
  std::uint64_t h = 0x6a09e667f3bcc908ULL;
  for (std::uint64_t p : parts) h = splitmix64(h ^ splitmix64(p));
  return h;
}

double uniform_open(std::uint64_t key) noexcept {
  // 53 random bits, shifted by half an ulp so 0 is never produced.
  return (static_cast<double>(splitmix64(key) >> 11) + 0.5) * 0x1.0p-53;
}

double standard_normal(std::uint64_t key) noexcept {
  const double u1 = uniform_open(key ^ 0x243f6a8885a308d3ULL);
  const double u2 = uniform_open(key ^ 0x13198a2e03707344ULL);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::next() noexcept {
  state_ += 0x9e3779b97f4a7c15ULL;
  return splitmix64(state_);
}

std::uint64_t Rng::below(std::uint64_t bound) noexcept {
  const std::uint64_t limit = -bound % bound;  // 2^64 mod bound
  for (;;) {
    const std::uint64_t r = next();
    if (r >= limit) return r % bound;
  }
}

double Rng::uniform() noexcept { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

double Rng::normal() noexcept { return standard_normal(next()); }

std::vector<std::uint32_t> sample_distinct(std::uint64_t seed, std::uint32_t population,
                                           std::uint32_t count) {
  if (count > population) {
    throw ValidationError("cannot draw " + std::to_string(count) + " distinct values from " +
                          std::to_string(population));
  }
  Rng rng(seed);
  std::vector<std::uint32_t> out;
  out.reserve(count);
  std::unordered_set<std::uint32_t> seen;
  while (out.size() < count) {
    auto v = static_cast<std::uint32_t>(rng.below(population));
    if (seen.insert(v).second) out.push_back(v);
  }
  return out;
}

}  // namespace nvmfp
