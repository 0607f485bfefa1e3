#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "scenediff/relation.hpp"
#include "scenediff/scene.hpp"
#include "scenediff/transition.hpp"

namespace scenediff {

struct IntRange {
  int min = 0;
  int max = 0;

  bool operator==(const IntRange&) const = default;
};

struct KindMix {
  double in = 0.4;
  double on = 0.4;
  double removed = 0.2;

  bool operator==(const KindMix&) const = default;
};

/**
 * Synthetic tabletop generator settings.
 *
 * With `detectability` set, every generated task satisfies the geometric
 * method's preconditions at `movement_threshold_frac`: the picked object
 * travels more than twice the movement threshold, placements end with IoU
 * above 0.4, and jitter stays below the threshold.
 *
 * The two adversarial knobs build cases the geometric method gets wrong and
 * require `detectability == false`:
 *   - direction_trap_prob: the target is slid under the picked object and
 *     travels farther than it;
 *   - sub_threshold_prob: an "on" placement whose picked object moves less
 *     than the movement threshold.
 */
struct SimConfig {
  int image_width = 640;
  int image_height = 480;
  IntRange n_objects{3, 6};
  IntRange n_tasks{1, 3};
  KindMix kind_mix;
  double jitter_px = 5.0;
  bool detectability = true;
  std::uint64_t seed = 0;
  double movement_threshold_frac = 0.05;
  double direction_trap_prob = 0.0;
  double sub_threshold_prob = 0.0;

  void validate() const;

  bool operator==(const SimConfig&) const = default;
};

struct ScenePairSample {
  std::uint64_t index = 0;
  ScenePair pair;
  std::optional<SceneImages> images;
  std::vector<PickPlaceTask> truth_tasks;  // method == Truth, sorted
  // Non-UNRELATED relations per scene, canonical (a < b), sorted.
  std::vector<LabeledPair> initial_relations;
  std::vector<LabeledPair> final_relations;
  // Targets moved beyond jitter by a direction trap.
  std::vector<std::string> relocated_targets;
};

// Deterministic in (config.seed, index). Throws GenerationError when the
// scene cannot be laid out within the retry budget.
ScenePairSample generate_scene_pair(const SimConfig& config, std::uint64_t index,
                                    bool render = false);

// Shape family drawn for each class by render_scene.
enum class ClassShape { Ellipse, Bar, Rectangle };
ClassShape shape_of(const std::string& class_name);

/**
 * Relation classifier answering from stored ground truth. Unlisted pairs
 * are UNRELATED; a query naming an id absent from that scene throws.
 */
class OracleClassifier final : public RelationClassifier {
 public:
  OracleClassifier(std::vector<LabeledPair> initial_relations,
                   std::vector<LabeledPair> final_relations, std::set<std::string> initial_ids,
                   std::set<std::string> final_ids);

  std::vector<RelationResult> classify(std::span<const RelationQuery> queries) override;

  RelationLabel lookup(SceneSide side, const std::string& a, const std::string& b) const;

 private:
  std::map<std::pair<std::string, std::string>, RelationLabel> initial_;
  std::map<std::pair<std::string, std::string>, RelationLabel> final_;
  std::set<std::string> initial_ids_;
  std::set<std::string> final_ids_;
};

OracleClassifier oracle_classifier(const ScenePairSample& sample);

}  // namespace scenediff
