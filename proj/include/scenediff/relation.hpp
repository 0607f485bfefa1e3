#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

#include "scenediff/relation_label.hpp"
#include "scenediff/scene.hpp"

namespace scenediff {

// Unordered detection pair stored canonically: a_id < b_id.
struct PairCandidate {
  std::string a_id;
  std::string b_id;

  static PairCandidate canonical(const std::string& x, const std::string& y);

  auto operator<=>(const PairCandidate&) const = default;
};

// All unordered pairs with positive IoU, sorted. Brute-force double loop;
// see parallel.hpp for the OpenMP variant.
std::vector<PairCandidate> candidate_pairs(const Scene& scene);

/**
 * Five-channel classifier input: the RGB crop of the pair's union box plus
 * one filled bbox mask per object. Channel order is R, G, B, mask_a, mask_b.
 *
 * `rgb` is CV_8UC3 in RGB order; masks are CV_8UC1 holding 0 or 1.
 * `crop` is the union box rounded outward and clipped to the image, and
 * `bbox_a`/`bbox_b` are the two boxes in crop coordinates.
 */
struct ClassifierInput {
  int width = 0;
  int height = 0;
  cv::Rect crop;
  cv::Mat rgb;
  cv::Mat mask_a;
  cv::Mat mask_b;
  BoundingBox bbox_a;
  BoundingBox bbox_b;

  // Channel-planar bytes, 5 x height x width.
  std::vector<std::uint8_t> planar() const;
};

// Union box rounded outward (floor mins, ceil maxes), clipped to the image.
cv::Rect crop_rect(const BoundingBox& a, const BoundingBox& b, int image_width,
                   int image_height);

// Fills with 1 every pixel whose unit square overlaps `box` with positive area.
cv::Mat rasterize_mask(const BoundingBox& box, const cv::Rect& crop);

// `image` is a BGR raster as produced by OpenCV. Throws DataError when the
// crop is under 2 px on a side.
ClassifierInput build_classifier_input(const cv::Mat& image, const Detection& a,
                                       const Detection& b);

struct HeuristicConfig {
  // Below this containment for both boxes the pair is unrelated.
  double relation_threshold = 0.2;
  // Subject containment at or above this is "in", otherwise "on".
  double in_threshold = 0.9;
};

// Geometry-only relation: the more-contained box is the subject (ties go to
// the smaller box, then the lexicographically smaller id).
RelationLabel heuristic_classify(const Detection& a, const Detection& b,
                                 const HeuristicConfig& config = {});

enum class SceneSide { Initial, Final };

std::string_view to_string(SceneSide side);

struct RelationQuery {
  SceneSide side = SceneSide::Initial;
  const Scene* scene = nullptr;
  const cv::Mat* image = nullptr;  // may be null when no raster is available
  const Detection* a = nullptr;
  const Detection* b = nullptr;
};

struct RelationResult {
  RelationLabel label = RelationLabel::Unrelated;
  std::optional<std::array<double, 5>> probs;  // indexed by index_of(label)
};

// Throws ProtocolError if probs do not sum to 1 within 1e-6 or their argmax
// disagrees with the label.
void check_scores(const RelationResult& result);

class RelationClassifier {
 public:
  virtual ~RelationClassifier() = default;

  // One result per query, in query order.
  virtual std::vector<RelationResult> classify(std::span<const RelationQuery> queries) = 0;

  RelationResult classify_one(const RelationQuery& query);
};

class HeuristicClassifier final : public RelationClassifier {
 public:
  explicit HeuristicClassifier(HeuristicConfig config = {}) : config_(config) {}

  std::vector<RelationResult> classify(std::span<const RelationQuery> queries) override;

 private:
  HeuristicConfig config_;
};

}  // namespace scenediff
