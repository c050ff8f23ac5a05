#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace nvmfp {

// Counter-based randomness. Every random quantity in the toolkit is a pure
// function of a 64-bit key built with derive_seed(), so values never depend
// on call order or thread scheduling.

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Folds the components into one key. Order matters.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) noexcept;

// Uniform in the open interval (0, 1).
double uniform_open(std::uint64_t key) noexcept;

// Standard normal via Box-Muller on two sub-keys of `key`.
double standard_normal(std::uint64_t key) noexcept;

// Small sequential generator for shuffles and subsampling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept;
  // Uniform integer in [0, bound), bound > 0, without modulo bias.
  std::uint64_t below(std::uint64_t bound) noexcept;
  double uniform() noexcept;
  double normal() noexcept;

  template <typename T>
  void shuffle(std::vector<T>& v) noexcept {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

// `count` distinct values from [0, population), in draw order.
std::vector<std::uint32_t> sample_distinct(std::uint64_t seed, std::uint32_t population,
                                           std::uint32_t count);

}  // namespace nvmfp
