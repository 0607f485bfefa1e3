#include "scenediff/parallel.hpp"

#include <algorithm>
#include <exception>

#include <omp.h>

namespace scenediff {

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) {
      fn(i);
    }
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for num_threads(jobs) schedule(dynamic)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
}

int default_jobs() { return std::max(1, omp_get_max_threads()); }

std::vector<double> iou_matrix_serial(const std::vector<BoundingBox>& boxes) {
  const std::size_t n = boxes.size();
  std::vector<double> m(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    m[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = iou(boxes[i], boxes[j]);
      m[i * n + j] = v;
      m[j * n + i] = v;
    }
  }
  return m;
}

std::vector<double> iou_matrix_omp(const std::vector<BoundingBox>& boxes, int jobs) {
  const auto n = static_cast<std::int64_t>(boxes.size());
  std::vector<double> m(boxes.size() * boxes.size(), 0.0);
  // Each row is written in full by one thread; no symmetry shortcut.
#pragma omp parallel for num_threads(std::max(1, jobs)) schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = 0; j < n; ++j) {
      m[static_cast<std::size_t>(i * n + j)] =
          i == j ? 1.0 : iou(boxes[static_cast<std::size_t>(i)], boxes[static_cast<std::size_t>(j)]);
    }
  }
  return m;
}

std::vector<PairCandidate> candidate_pairs_omp(const Scene& scene, int jobs) {
  const auto& dets = scene.detections;
  const auto n = static_cast<std::int64_t>(dets.size());
  std::vector<std::vector<PairCandidate>> rows(dets.size());
#pragma omp parallel for num_threads(std::max(1, jobs)) schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i) {
    auto& row = rows[static_cast<std::size_t>(i)];
    const auto& a = dets[static_cast<std::size_t>(i)];
    for (std::int64_t j = i + 1; j < n; ++j) {
      const auto& b = dets[static_cast<std::size_t>(j)];
      if (iou(a.bbox, b.bbox) > 0.0) {
        row.push_back(PairCandidate::canonical(a.id, b.id));
      }
    }
  }
  std::vector<PairCandidate> out;
  for (auto& row : rows) {
    out.insert(out.end(), row.begin(), row.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<ScenePairSample> generate_samples(const SimConfig& config, std::uint64_t first,
                                              std::size_t n, int jobs, bool render) {
  config.validate();
  std::vector<ScenePairSample> out(n);
  parallel_for(n, jobs, [&](std::size_t i) {
    out[i] = generate_scene_pair(config, first + i, render);
  });
  return out;
}

}  // namespace scenediff
