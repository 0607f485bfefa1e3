#pragma once

#include <optional>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

#include "scenediff/geometric.hpp"
#include "scenediff/relation.hpp"

namespace scenediff {

struct PairTransition {
  PairCandidate pair;
  RelationLabel initial_rel = RelationLabel::Unrelated;
  RelationLabel final_rel = RelationLabel::Unrelated;
};

// Task implied by a relation change on (A, B). The final relation decides:
// X in/on Y in the final scene means X was placed in/on Y; a final
// UNRELATED means the initial subject was taken out of its partner.
// Equal labels imply no task.
std::optional<PickPlaceTask> transition_task(const PairCandidate& pair, RelationLabel initial,
                                             RelationLabel final);

// UNRELATED without consulting the classifier when the pair does not
// overlap in `scene`. Both ids must exist in the scene.
RelationLabel relation_for_pair(const Scene& scene, const cv::Mat* image,
                                const PairCandidate& pair, RelationClassifier& classifier,
                                SceneSide side = SceneSide::Initial);

struct SceneImages {
  cv::Mat initial;
  cv::Mat final;
};

struct SkippedPair {
  PairCandidate pair;  // ids of the scene the pair was found in
  SceneSide side = SceneSide::Initial;
  std::string reason;
};

struct TransitionDiagnostics {
  MatchResult match;
  std::vector<PairTransition> transitions;
  std::vector<SkippedPair> skipped;
};

/**
 * Classifies every candidate pair (positive IoU in either scene, ids
 * matched across scenes by match_objects) in both scenes and maps each
 * relation change to a task. Tasks and pairs use initial-scene ids; a pair
 * involving an object missing from one scene is skipped.
 *
 * Classifier queries keep the canonical initial-id order in both scenes, so
 * "A" is the same object before and after.
 */
std::vector<PickPlaceTask> infer_tasks_transition(const ScenePair& pair,
                                                  const SceneImages* images,
                                                  RelationClassifier& classifier,
                                                  const GeoConfig& match_config = {},
                                                  TransitionDiagnostics* diagnostics = nullptr);

}  // namespace scenediff
