#include <benchmark/benchmark.h>

#include "nvmfp/chipsim.hpp"
#include "nvmfp/classifiers.hpp"
#include "nvmfp/features.hpp"
#include "nvmfp/matrix.hpp"
#include "nvmfp/protocol.hpp"

using namespace nvmfp;

namespace {

// Small enough to keep each benchmark under a second per iteration.
const std::pair<Dataset, Dataset>& data() {
  static const auto parts = [] {
    DatasetParams p;
    p.chips_per_class = 3;
    p.locations_per_chip = 6;
    return split(build_dataset(builtin_catalog(), p), 0.8, 1);
  }();
  return parts;
}

void BM_LatencySample(benchmark::State& state) {
  ChipInstance chip(builtin_catalog()[0], 1);
  std::uint32_t addr = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(chip.latency_sample(addr));
    addr = (addr + 1) % builtin_catalog()[0].num_locations;
  }
}
BENCHMARK(BM_LatencySample);

void BM_FullChipScan(benchmark::State& state) {
  ChipInstance chip(builtin_catalog()[3], 2);
  for (auto _ : state) benchmark::DoNotOptimize(chip.full_chip_scan());
}
BENCHMARK(BM_FullChipScan);

void BM_KnnPredict(benchmark::State& state) {
  const auto& [train, test] = data();
  const TrainedModel m = train_knn(train, 5);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(predict(m, test.samples[i]));
    i = (i + 1) % test.size();
  }
}
BENCHMARK(BM_KnnPredict);

void BM_TreeTrain(benchmark::State& state) {
  const auto& train = data().first;
  for (auto _ : state) benchmark::DoNotOptimize(train_tree(train));
}
BENCHMARK(BM_TreeTrain)->Unit(benchmark::kMillisecond);

void BM_SvmTrain(benchmark::State& state) {
  const auto& train = data().first;
  for (auto _ : state) benchmark::DoNotOptimize(train_svm(train));
}
BENCHMARK(BM_SvmTrain)->Unit(benchmark::kMillisecond);

void BM_MrmrSelect(benchmark::State& state) {
  const auto& train = data().first;
  for (auto _ : state) benchmark::DoNotOptimize(mrmr_select(train, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_MrmrSelect)->Arg(25)->Unit(benchmark::kMillisecond);

void BM_NcaGradient(benchmark::State& state) {
  const auto& train = data().first;
  const Matrix raw = to_matrix(train);
  const Matrix x = apply_standardizer(fit_standardizer(raw), raw);
  const auto labels = train.labels();
  const std::vector<double> w(x.cols(), 1.0);
  std::vector<double> grad;
  for (auto _ : state) benchmark::DoNotOptimize(nca_gradient(x, labels, w, grad));
}
BENCHMARK(BM_NcaGradient)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
