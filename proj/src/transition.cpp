#include "scenediff/transition.hpp"

#include <map>
#include <set>

#include "scenediff/errors.hpp"

namespace scenediff {

namespace {

bool subject_is_a(RelationLabel label) {
  return label == RelationLabel::AInB || label == RelationLabel::AOnB;
}

const Detection& require(const Scene& scene, const std::string& id) {
  const Detection* d = scene.find(id);
  if (d == nullptr) {
    throw DataError("detection '" + id + "' not found in scene");
  }
  return *d;
}

void check_image(const cv::Mat* image, const Scene& scene) {
  if (image != nullptr && !image->empty() &&
      (image->cols != scene.image_width || image->rows != scene.image_height)) {
    throw DataError("image size " + std::to_string(image->cols) + "x" +
                    std::to_string(image->rows) + " does not match scene size " +
                    std::to_string(scene.image_width) + "x" + std::to_string(scene.image_height));
  }
}

}  // namespace

std::optional<PickPlaceTask> transition_task(const PairCandidate& pair, RelationLabel initial,
                                             RelationLabel final) {
  if (initial == final) {
    return std::nullopt;
  }
  const auto make = [&](bool a_picked, TaskKind kind) {
    return PickPlaceTask{a_picked ? pair.a_id : pair.b_id, a_picked ? pair.b_id : pair.a_id, kind,
                         TaskMethod::Transition};
  };
  switch (final) {
    case RelationLabel::AInB: return make(true, TaskKind::In);
    case RelationLabel::AOnB: return make(true, TaskKind::On);
    case RelationLabel::BInA: return make(false, TaskKind::In);
    case RelationLabel::BOnA: return make(false, TaskKind::On);
    case RelationLabel::Unrelated: return make(subject_is_a(initial), TaskKind::Removed);
  }
  return std::nullopt;
}

RelationLabel relation_for_pair(const Scene& scene, const cv::Mat* image,
                                const PairCandidate& pair, RelationClassifier& classifier,
                                SceneSide side) {
  const Detection& a = require(scene, pair.a_id);
  const Detection& b = require(scene, pair.b_id);
  if (iou(a.bbox, b.bbox) == 0.0) {
    return RelationLabel::Unrelated;
  }
  check_image(image, scene);
  const RelationQuery query{side, &scene, image, &a, &b};
  return classifier.classify_one(query).label;
}

std::vector<PickPlaceTask> infer_tasks_transition(const ScenePair& pair,
                                                  const SceneImages* images,
                                                  RelationClassifier& classifier,
                                                  const GeoConfig& match_config,
                                                  TransitionDiagnostics* diagnostics) {
  MatchResult match = match_objects(pair, match_config);
  std::map<std::string, std::string> to_final;
  std::map<std::string, std::string> to_initial;
  for (const auto& m : match.matches) {
    to_final.emplace(m.initial_id, m.final_id);
    to_initial.emplace(m.final_id, m.initial_id);
  }

  std::set<PairCandidate> universe;
  std::vector<SkippedPair> skipped;
  for (const auto& c : candidate_pairs(pair.initial)) {
    if (!to_final.contains(c.a_id) || !to_final.contains(c.b_id)) {
      skipped.push_back({c, SceneSide::Initial, "object missing from final scene"});
      continue;
    }
    universe.insert(c);
  }
  for (const auto& c : candidate_pairs(pair.final)) {
    const auto ia = to_initial.find(c.a_id);
    const auto ib = to_initial.find(c.b_id);
    if (ia == to_initial.end() || ib == to_initial.end()) {
      skipped.push_back({c, SceneSide::Final, "object missing from initial scene"});
      continue;
    }
    universe.insert(PairCandidate::canonical(ia->second, ib->second));
  }

  const cv::Mat* initial_image = images != nullptr && !images->initial.empty() ? &images->initial : nullptr;
  const cv::Mat* final_image = images != nullptr && !images->final.empty() ? &images->final : nullptr;
  check_image(initial_image, pair.initial);
  check_image(final_image, pair.final);

  std::vector<PairTransition> transitions;
  std::vector<RelationQuery> queries;
  // (transition index, side) for each query.
  std::vector<std::pair<std::size_t, SceneSide>> slots;
  for (const auto& c : universe) {
    transitions.push_back({c, RelationLabel::Unrelated, RelationLabel::Unrelated});
    const Detection& ia = require(pair.initial, c.a_id);
    const Detection& ib = require(pair.initial, c.b_id);
    const Detection& fa = require(pair.final, to_final.at(c.a_id));
    const Detection& fb = require(pair.final, to_final.at(c.b_id));
    if (iou(ia.bbox, ib.bbox) > 0.0) {
      queries.push_back({SceneSide::Initial, &pair.initial, initial_image, &ia, &ib});
      slots.emplace_back(transitions.size() - 1, SceneSide::Initial);
    }
    if (iou(fa.bbox, fb.bbox) > 0.0) {
      queries.push_back({SceneSide::Final, &pair.final, final_image, &fa, &fb});
      slots.emplace_back(transitions.size() - 1, SceneSide::Final);
    }
  }

  if (!queries.empty()) {
    const std::vector<RelationResult> results = classifier.classify(queries);
    if (results.size() != queries.size()) {
      throw ProtocolError("classifier returned " + std::to_string(results.size()) +
                          " results for " + std::to_string(queries.size()) + " queries");
    }
    for (std::size_t i = 0; i < results.size(); ++i) {
      auto& t = transitions[slots[i].first];
      (slots[i].second == SceneSide::Initial ? t.initial_rel : t.final_rel) = results[i].label;
    }
  }

  std::vector<PickPlaceTask> tasks;
  for (const auto& t : transitions) {
    if (auto task = transition_task(t.pair, t.initial_rel, t.final_rel)) {
      tasks.push_back(std::move(*task));
    }
  }
  sort_tasks(tasks);

  if (diagnostics != nullptr) {
    diagnostics->match = std::move(match);
    diagnostics->transitions = std::move(transitions);
    diagnostics->skipped = std::move(skipped);
  }
  return tasks;
}

}  // namespace scenediff
