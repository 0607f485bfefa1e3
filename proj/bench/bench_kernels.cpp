// Serial reference vs OpenMP kernels. Run with --benchmark_filter to pick a
// kernel; the thread count follows OMP_NUM_THREADS.

#include <random>

#include <benchmark/benchmark.h>

#include "scenediff/parallel.hpp"

using namespace scenediff;

namespace {

std::vector<BoundingBox> random_boxes(std::size_t n) {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> pos(0, 600), len(5, 120);
  std::vector<BoundingBox> boxes;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = pos(rng), y = pos(rng);
    boxes.emplace_back(x, y, x + len(rng), y + len(rng));
  }
  return boxes;
}

Scene random_scene(std::size_t n) {
  Scene s{720, 720, std::nullopt, {}};
  const auto boxes = random_boxes(n);
  for (std::size_t i = 0; i < n; ++i) s.detections.push_back({"o-" + std::to_string(i), {"cup"}, 1, boxes[i]});
  return s;
}

void BM_IouMatrixSerial(benchmark::State& state) {
  const auto boxes = random_boxes(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(iou_matrix_serial(boxes));
}

void BM_IouMatrixOmp(benchmark::State& state) {
  const auto boxes = random_boxes(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(iou_matrix_omp(boxes, default_jobs()));
}

void BM_CandidatePairsSerial(benchmark::State& state) {
  const auto scene = random_scene(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(candidate_pairs(scene));
}

void BM_CandidatePairsOmp(benchmark::State& state) {
  const auto scene = random_scene(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(candidate_pairs_omp(scene, default_jobs()));
}

void BM_GenerateSamples(benchmark::State& state) {
  SimConfig c;
  c.seed = 42;
  const int jobs = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(generate_samples(c, 0, 200, jobs));
}

}  // namespace

BENCHMARK(BM_IouMatrixSerial)->Arg(64)->Arg(512);
BENCHMARK(BM_IouMatrixOmp)->Arg(64)->Arg(512);
BENCHMARK(BM_CandidatePairsSerial)->Arg(64)->Arg(512);
BENCHMARK(BM_CandidatePairsOmp)->Arg(64)->Arg(512);
// Arg is the worker count; 1 is the plain serial loop.
BENCHMARK(BM_GenerateSamples)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
