#include <cmath>
#include <numeric>
#include <set>

#include "doctest.h"
#include "nvmfp/chipsim.hpp"
#include "nvmfp/error.hpp"
#include "nvmfp/random.hpp"
#include "oracles.hpp"

using namespace nvmfp;

namespace {

ChipClassSpec quiet_spec() {
  ChipClassSpec s;
  s.class_tag = 0;
  s.manufacturer = "Test";
  s.capacity_label = "1Mb";
  s.num_locations = 64;
  s.base_latency_us = 100.0;
  s.drift_amplitude = 1.0;
  s.drift_exponent = 1.0;
  s.drift_ref_cycles = 10000;
  return s;
}

bool on_grid(double v) {
  const double ticks = v * 100.0;
  return std::abs(ticks - std::round(ticks)) < 1e-6;
}

}  // namespace

TEST_CASE("builtin catalog has the nine classes") {
  const auto& cat = builtin_catalog();
  REQUIRE(cat.size() == 9);
  for (int i = 0; i < 9; ++i) CHECK(cat[i].class_tag == i);
  CHECK_NOTHROW(validate_catalog(cat));
  CHECK(load_catalog("builtin") == cat);
  for (const auto& s : cat) {
    const bool nor = s.technology == Technology::NorFlash;
    CHECK(nor == (s.op_kind == OpKind::SectorErase));
  }
}

TEST_CASE("catalog text round-trips and rejects bad input") {
  const auto& cat = builtin_catalog();
  CHECK(parse_catalog(format_catalog(cat)) == cat);

  std::vector<ChipClassSpec> one = {cat[0]};
  CHECK(parse_catalog(format_catalog(one)).size() == 1);

  std::vector<ChipClassSpec> dup = {cat[3], cat[3]};
  CHECK_THROWS_AS(parse_catalog(format_catalog(dup)), ValidationError);

  std::string broken = format_catalog(one);
  broken += "1,X,1Mb,NOR_FLASH,SECTOR_ERASE,notanumber,1,0,1,1,0,0,0,,\n";
  try {
    parse_catalog(broken);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() > 0);
  }
  CHECK_THROWS_AS(load_catalog("/nonexistent/catalog.csv"), IoError);
}

TEST_CASE("spec validation") {
  auto s = quiet_spec();
  CHECK_NOTHROW(validate(s));
  auto bad = s;
  bad.num_locations = 10;
  CHECK_THROWS_AS(validate(bad), ValidationError);
  bad = s;
  bad.technology = Technology::Cbram;
  CHECK_THROWS_AS(validate(bad), ValidationError);
  bad = s;
  bad.step_cycles = 100;
  CHECK_THROWS_AS(validate(bad), ValidationError);
  bad = s;
  bad.drift_exponent = 2.5;
  CHECK_THROWS_AS(validate(bad), ValidationError);
}

TEST_CASE("new_chip is deterministic") {
  const auto& spec = builtin_catalog()[0];
  ChipInstance a = new_chip(spec, 42), b = new_chip(spec, 42);
  CHECK(a == b);
  for (std::uint32_t addr = 0; addr < 20; ++addr) CHECK(a.latency_sample(addr) == b.latency_sample(addr));
  ChipInstance c = new_chip(spec, 43);
  CHECK(c.chip_factor() != a.chip_factor());
  for (std::uint32_t addr = 0; addr < a.num_locations(); ++addr) CHECK(new_chip(spec, 42).wear(addr) == 0);
}

TEST_CASE("chip factor dispersion") {
  auto s = quiet_spec();
  CHECK(new_chip(s, 9).chip_factor() == 1.0);
  s.chip_sigma = 0.05;
  std::vector<double> f;
  for (std::uint64_t seed = 0; seed < 100; ++seed) f.push_back(new_chip(s, seed).chip_factor());
  const double mean = std::accumulate(f.begin(), f.end(), 0.0) / f.size();
  double ss = 0.0;
  for (double v : f) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (f.size() - 1));
  CHECK(sd == doctest::Approx(0.05).epsilon(0.3));
  CHECK(std::abs(sd - 0.05) <= 0.015);
}

TEST_CASE("latency curve points") {
  auto s = quiet_spec();
  ChipInstance chip(s, 1);
  CHECK(chip.latency_sample(0, false) == 100.0);
  chip.cycle_location(0, 10000);
  CHECK(chip.latency_sample(0, false) == 200.0);

  auto t = s;
  t.drift_amplitude = 1.5;
  t.drift_exponent = 0.8;
  ChipInstance a(t, 1), b(t, 1);
  b.cycle_location(3, 50000);
  const double ratio = b.expected_latency(3) / a.expected_latency(3);
  CHECK(ratio == doctest::Approx(oracle::latency_formula(t, 1, 1, 50000) / oracle::latency_formula(t, 1, 1, 0)));
  CHECK(ratio == doctest::Approx(1.0 + 1.5 * std::pow(5.0, 0.8)));

  auto stepped = s;
  stepped.step_cycles = 20000;
  stepped.step_factor = 1.25;
  ChipInstance c(stepped, 1);
  c.cycle_location(0, 19999);
  const double before = c.expected_latency(0);
  c.cycle_location(0, 1);
  CHECK(c.expected_latency(0) / before == doctest::Approx(1.25 * (3.0 / 2.9999)));
}

TEST_CASE("expected latency matches the formula oracle on the builtin catalog") {
  for (const auto& spec : builtin_catalog()) {
    ChipInstance chip(spec, 77);
    for (std::uint64_t w : {0ULL, 1000ULL, 10000ULL, 36000ULL, 50000ULL}) {
      ChipInstance c = chip;
      c.cycle_location(11, w);
      CHECK(c.expected_latency(11) ==
            doctest::Approx(oracle::latency_formula(spec, c.chip_factor(), c.loc_factor(11), w)).epsilon(1e-12));
    }
  }
}

TEST_CASE("samples are quantized and positive") {
  for (const auto& spec : builtin_catalog()) {
    ChipInstance chip(spec, 5);
    for (int i = 0; i < 200; ++i) {
      const double v = chip.latency_sample(static_cast<std::uint32_t>(i % 7));
      CHECK(v > 0.0);
      CHECK(on_grid(v));
    }
  }
  CHECK(quantize_latency(1.234) == 1.23);
  CHECK(quantize_latency(0.0001) == 0.01);
}

TEST_CASE("wear accounting") {
  auto s = quiet_spec();
  ChipInstance chip(s, 3);
  chip.cycle_location(7, 1000);
  CHECK(chip.wear(7) == 1000);
  chip.cycle_location(7, 0);
  CHECK(chip.wear(7) == 1000);

  ChipInstance a(s, 3), b(s, 3);
  a.cycle_location(2, 500);
  a.cycle_location(2, 500);
  b.cycle_location(2, 1000);
  for (int i = 0; i < 10; ++i) CHECK(a.latency_sample(2) == b.latency_sample(2));

  ChipInstance fast(builtin_catalog()[4], 8), slow(builtin_catalog()[4], 8);
  fast.cycle_location(1, 10000);
  for (int i = 0; i < 10000; ++i) slow.latency_sample(1, true);
  CHECK(fast.wear(1) == slow.wear(1));
  CHECK(fast.latency_sample(1) == slow.latency_sample(1));

  chip.latency_sample(9, false);
  CHECK(chip.wear(9) == 0);
  chip.latency_sample(9, true);
  CHECK(chip.wear(9) == 1);
}

TEST_CASE("out-of-range addresses") {
  ChipInstance chip(quiet_spec(), 1);
  CHECK_THROWS_AS(chip.latency_sample(64), RangeError);
  CHECK_THROWS_AS(chip.cycle_location(64, 1), RangeError);
  CHECK_THROWS_AS(chip.wear(1000), RangeError);
}

TEST_CASE("noise does not depend on visiting order") {
  const auto& spec = builtin_catalog()[7];
  ChipInstance a(spec, 11), b(spec, 11);
  std::vector<double> fwd, back(10);
  for (std::uint32_t addr = 0; addr < 10; ++addr) fwd.push_back(a.latency_sample(addr));
  for (std::uint32_t addr = 10; addr-- > 0;) back[addr] = b.latency_sample(addr);
  CHECK(fwd == back);
}

TEST_CASE("expected latency is non-decreasing in wear") {
  for (const auto& spec : builtin_catalog()) {
    ChipInstance chip(spec, 2);
    double prev = chip.expected_latency(0);
    for (int i = 0; i < 100; ++i) {
      chip.cycle_location(0, 500);
      const double cur = chip.expected_latency(0);
      CHECK(cur >= prev);
      prev = cur;
    }
  }
}

TEST_CASE("full chip scan") {
  auto s = quiet_spec();
  s.chip_sigma = 0.03;
  ChipInstance chip(s, 4);
  const auto map = chip.full_chip_scan();
  REQUIRE(map.latencies.size() == s.num_locations);
  for (double v : map.latencies) CHECK(v == quantize_latency(100.0 * chip.chip_factor()));
  for (std::uint32_t a = 0; a < s.num_locations; ++a) CHECK(chip.wear(a) == 1);

  const auto& spec = builtin_catalog()[2];
  ChipInstance worn(spec, 6);
  worn.cycle_location(5, 50000);
  const auto m = worn.full_chip_scan();
  const auto top = std::max_element(m.latencies.begin(), m.latencies.end()) - m.latencies.begin();
  CHECK(top == 5);

  CHECK(ChipInstance(builtin_catalog()[6], 1).full_chip_scan().latencies.size() == builtin_catalog()[6].num_locations);
}

TEST_CASE("classes differ by more than one noise deviation somewhere on the cycle range") {
  const auto& cat = builtin_catalog();
  for (std::size_t i = 0; i < cat.size(); ++i) {
    for (std::size_t j = i + 1; j < cat.size(); ++j) {
      bool separated = false;
      for (std::uint64_t w = 0; w <= 50000 && !separated; w += 1000) {
        const double li = oracle::latency_formula(cat[i], 1, 1, w);
        const double lj = oracle::latency_formula(cat[j], 1, 1, w);
        const double sd = std::max(li * cat[i].noise_sigma, lj * cat[j].noise_sigma);
        separated = std::abs(li - lj) > sd;
      }
      CHECK_MESSAGE(separated, "classes " << i << " and " << j);
    }
  }
}

TEST_CASE("counter-based randomness") {
  CHECK(derive_seed({1, 2}) != derive_seed({2, 1}));
  CHECK(uniform_open(5) > 0.0);
  CHECK(uniform_open(5) < 1.0);
  const auto d = sample_distinct(3, 50, 20);
  CHECK(std::set<std::uint32_t>(d.begin(), d.end()).size() == 20);
  for (auto v : d) CHECK(v < 50);
  Rng r(9);
  for (int i = 0; i < 1000; ++i) CHECK(r.below(7) < 7);
}
