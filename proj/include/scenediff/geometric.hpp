#pragma once

#include <string>
#include <vector>

#include "scenediff/scene.hpp"

namespace scenediff {

enum class SameClassMatching { Hungarian, Greedy };

struct GeoConfig {
  // Movement threshold as a fraction of the image diagonal.
  double movement_threshold_frac = 0.05;
  // Final-scene IoU a moved object must exceed with its partner.
  double iou_threshold = 0.20;
  SameClassMatching same_class_matching = SameClassMatching::Hungarian;

  void validate() const;
};

struct ObjectMatch {
  std::string initial_id;
  std::string final_id;
  double displacement_px = 0.0;

  bool operator==(const ObjectMatch&) const = default;
};

struct MatchResult {
  std::vector<ObjectMatch> matches;       // sorted by initial_id
  std::vector<std::string> appeared;      // final-scene ids, sorted
  std::vector<std::string> disappeared;   // initial-scene ids, sorted
};

// Per-class correspondence between initial and final detections minimizing
// total center displacement.
MatchResult match_objects(const ScenePair& pair, const GeoConfig& config);

double movement_threshold_px(const Scene& scene, const GeoConfig& config);

// Matches whose displacement strictly exceeds the movement threshold.
std::vector<ObjectMatch> moved_objects(const std::vector<ObjectMatch>& matches,
                                       const ScenePair& pair, const GeoConfig& config);

struct PairOverlap {
  std::string a;
  std::string b;
  double final_iou = 0.0;
};

struct GeometricDiagnostics {
  MatchResult match;
  std::vector<ObjectMatch> moved;
  double threshold_px = 0.0;
  std::vector<PairOverlap> overlaps;  // every (moved, other) pair examined
};

// Tasks reference initial-scene detection ids. Kind is always On: overlap
// alone cannot tell "in" from "on".
std::vector<PickPlaceTask> infer_tasks_geometric(const ScenePair& pair, const GeoConfig& config,
                                                 GeometricDiagnostics* diagnostics = nullptr);

}  // namespace scenediff
