#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "scenediff/geometry.hpp"
#include "scenediff/relation.hpp"
#include "scenediff/simulator.hpp"

namespace scenediff {

// Runs fn(i) for i in [0, n). With jobs <= 1 the loop is a plain serial
// loop; otherwise it is an OpenMP loop over `jobs` threads. If any call
// throws, the exception from the lowest index is rethrown after the loop.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

// Default worker count: OpenMP's maximum thread count.
int default_jobs();

// Row-major n x n matrix of pairwise IoU. The serial version is the
// reference the OpenMP one is tested against.
std::vector<double> iou_matrix_serial(const std::vector<BoundingBox>& boxes);
std::vector<double> iou_matrix_omp(const std::vector<BoundingBox>& boxes, int jobs);

// Same result as candidate_pairs(), computed with an OpenMP outer loop.
std::vector<PairCandidate> candidate_pairs_omp(const Scene& scene, int jobs);

// Samples first .. first+n-1, in index order. Identical for any `jobs`.
std::vector<ScenePairSample> generate_samples(const SimConfig& config, std::uint64_t first,
                                              std::size_t n, int jobs, bool render = false);

}  // namespace scenediff
