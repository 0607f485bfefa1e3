#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scenediff/geometric.hpp"
#include "scenediff/relation.hpp"
#include "scenediff/scene_io.hpp"

namespace scenediff {

// Per-pair task classes, relative to the canonical pair order:
// 0 = first object picked onto/into the second, 1 = the reverse, 2 = no task.
inline constexpr int kClassForward = 0;
inline constexpr int kClassReverse = 1;
inline constexpr int kClassNoTask = 2;

struct PairOutcome {
  PairCandidate pair;
  int predicted = kClassNoTask;
  int truth = kClassNoTask;

  bool operator==(const PairOutcome&) const = default;
};

// Removed tasks count as the direction class of their picked object. Throws
// DataError for a task outside the universe or two tasks on one pair.
std::vector<PairOutcome> pair_outcomes(const std::vector<PickPlaceTask>& predicted,
                                       const std::vector<PickPlaceTask>& truth,
                                       const std::vector<PairCandidate>& universe);

using Confusion3 = std::array<std::array<std::int64_t, 3>, 3>;  // [truth][predicted]
using Confusion5 = std::array<std::array<std::int64_t, 5>, 5>;  // [truth][predicted]

struct ClassMetrics {
  std::optional<double> precision;  // absent when nothing was predicted as the class
  std::optional<double> recall;     // absent when the class never occurs in truth
  std::int64_t support = 0;
};

// Counts behind the auxiliary task-level figures.
struct TaskStats {
  std::int64_t removal_total = 0;    // truth removals
  std::int64_t removal_correct = 0;  // ... predicted with same picked, target and kind
  std::int64_t direction_total = 0;    // pairs with a task in both truth and prediction
  std::int64_t direction_correct = 0;  // ... with the same picked object
  std::int64_t in_on_total = 0;    // truth in/on placements predicted as in/on, same direction
  std::int64_t in_on_correct = 0;  // ... with the same kind

  TaskStats& operator+=(const TaskStats& o);
};

TaskStats task_stats(const std::vector<PickPlaceTask>& predicted,
                     const std::vector<PickPlaceTask>& truth);

struct EvaluationReport {
  Confusion3 confusion{};
  std::array<ClassMetrics, 3> per_class{};
  double accuracy = 0.0;
  std::int64_t n_pairs = 0;
  std::int64_t n_scene_pairs = 0;
  std::optional<Confusion5> relation_confusion;
  TaskStats task_stats;

  std::optional<double> removal_accuracy() const;
  std::optional<double> direction_accuracy() const;
  std::optional<double> in_on_accuracy() const;
};

Confusion3 confusion_matrix(std::span<const PairOutcome> outcomes);

// Throws DataError on empty input.
EvaluationReport compute_report(std::span<const PairOutcome> outcomes);

// Labels aligned index by index over one pair universe.
Confusion5 relation_confusion(std::span<const RelationLabel> predicted,
                              std::span<const RelationLabel> truth);

// Candidate pairs of both scenes (final ids mapped to initial ids through
// match_objects) plus every truth-task pair.
std::vector<PairCandidate> evaluation_universe(const ScenePair& pair,
                                               const std::vector<PickPlaceTask>& truth,
                                               const GeoConfig& match_config = {});

struct SampleEvaluation {
  std::string name;
  std::vector<PairOutcome> outcomes;
  TaskStats stats;
  std::optional<Confusion5> relations;  // when the prediction lists relations
};

SampleEvaluation evaluate_sample(std::string name, const ScenePair& pair,
                                 const TaskDocument& predicted, const TaskDocument& truth,
                                 const GeoConfig& match_config = {});

// Order-preserving merge of per-sample results into one report.
EvaluationReport merge_evaluations(std::span<const SampleEvaluation> samples);

std::string serialize_report(const EvaluationReport& report,
                             std::span<const SampleEvaluation> samples);

}  // namespace scenediff
