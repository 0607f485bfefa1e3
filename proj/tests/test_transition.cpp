#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "scenediff/errors.hpp"
#include "scenediff/simulator.hpp"
#include "scenediff/transition.hpp"

using namespace scenediff;

namespace {

std::string describe(const std::optional<PickPlaceTask>& t) {
  if (!t) return "";
  const auto name = [](const std::string& id) { return id == "a-0" ? "A" : "B"; };
  return std::string(name(t->picked_id)) + " " + name(t->target_id) + " " + std::string(to_string(t->kind));
}

// Counts calls and answers from a fixed label.
class CountingClassifier : public RelationClassifier {
 public:
  explicit CountingClassifier(RelationLabel label) : label_(label) {}
  std::vector<RelationResult> classify(std::span<const RelationQuery> q) override {
    calls += q.size();
    return std::vector<RelationResult>(q.size(), RelationResult{label_, std::nullopt});
  }
  std::size_t calls = 0;

 private:
  RelationLabel label_;
};

Detection det(const std::string& id, const std::string& cls, BoundingBox b) { return {id, {cls}, 0.9, b}; }

}  // namespace

TEST_CASE("transition table is total and matches the reference table") {
  const PairCandidate pair{"a-0", "b-0"};
  int tasks = 0;
  for (const auto i : kAllRelationLabels) {
    for (const auto f : kAllRelationLabels) {
      const auto t = transition_task(pair, i, f);
      CHECK(describe(t) == oracle::kTransitionTable[index_of(i)][index_of(f)]);
      tasks += t.has_value();
      if (t) CHECK(t->method == TaskMethod::Transition);
      // Swap consistency: the reversed pair with swapped labels yields the same task.
      const auto r = transition_task({"b-0", "a-0"}, swapped(i), swapped(f));
      CHECK(r == t);
    }
  }
  CHECK(tasks == 20);
}

TEST_CASE("transition examples") {
  const PairCandidate pair{"a-0", "b-0"};
  CHECK(transition_task(pair, RelationLabel::AInB, RelationLabel::Unrelated) ==
        PickPlaceTask{"a-0", "b-0", TaskKind::Removed, TaskMethod::Transition});
  CHECK_FALSE(transition_task(pair, RelationLabel::AOnB, RelationLabel::AOnB));
  CHECK(transition_task(pair, RelationLabel::Unrelated, RelationLabel::BOnA) ==
        PickPlaceTask{"b-0", "a-0", TaskKind::On, TaskMethod::Transition});
  CHECK(transition_task(pair, RelationLabel::AInB, RelationLabel::AOnB) ==
        PickPlaceTask{"a-0", "b-0", TaskKind::On, TaskMethod::Transition});
}

TEST_CASE("pair relations") {
  Scene s{100, 100, std::nullopt, {det("a-0", "cup", {0, 0, 10, 10}), det("b-0", "pot", {50, 50, 60, 60}),
                                   det("c-0", "pan", {5, 5, 40, 40})}};
  CountingClassifier counting(RelationLabel::AOnB);
  CHECK(relation_for_pair(s, nullptr, {"a-0", "b-0"}, counting) == RelationLabel::Unrelated);
  CHECK(counting.calls == 0);
  CHECK(relation_for_pair(s, nullptr, {"a-0", "c-0"}, counting) == RelationLabel::AOnB);
  CHECK(counting.calls == 1);

  HeuristicClassifier heuristic;
  CHECK(relation_for_pair(s, nullptr, {"a-0", "c-0"}, heuristic) ==
        heuristic_classify(s.detections[0], s.detections[2]));

  OracleClassifier oracle({}, {{"a-0", "c-0", RelationLabel::AInB}}, {"a-0", "b-0", "c-0"}, {"a-0", "b-0", "c-0"});
  CHECK(relation_for_pair(s, nullptr, {"a-0", "c-0"}, oracle, SceneSide::Final) == RelationLabel::AInB);
  CHECK(relation_for_pair(s, nullptr, {"a-0", "c-0"}, oracle, SceneSide::Initial) == RelationLabel::Unrelated);
  CHECK_THROWS_AS(relation_for_pair(s, nullptr, {"a-0", "zz-0"}, oracle), DataError);
}

TEST_CASE("transition inference with the oracle reproduces simulator truth") {
  for (std::uint64_t i = 0; i < 200; ++i) {
    SimConfig c;
    c.seed = 99;
    const auto sample = generate_scene_pair(c, i);
    auto oracle = oracle_classifier(sample);
    auto tasks = infer_tasks_transition(sample.pair, nullptr, oracle);
    for (auto& t : tasks) t.method = TaskMethod::Truth;
    CHECK(tasks == sample.truth_tasks);
  }
}

TEST_CASE("transition inference with relabelled ids is unchanged") {
  // Renaming ids so every canonical order flips leaves the task set alone
  // up to the renaming.
  SimConfig c;
  c.seed = 5;
  for (std::uint64_t i = 0; i < 50; ++i) {
    const auto sample = generate_scene_pair(c, i);
    auto rename = [](const std::string& id) { return "z" + std::string(1, char('z' - id[0] + 'a')) + id; };
    ScenePair renamed = sample.pair;
    for (Scene* s : {&renamed.initial, &renamed.final})
      for (auto& d : s->detections) d.id = rename(d.id);
    auto relabel = [&](std::vector<LabeledPair> rels) {
      for (auto& r : rels) {
        r = {rename(r.a), rename(r.b), r.label};
        if (r.b < r.a) r = {r.b, r.a, swapped(r.label)};
      }
      return rels;
    };
    std::set<std::string> ids;
    for (const auto& d : renamed.initial.detections) ids.insert(d.id);
    OracleClassifier oracle(relabel(sample.initial_relations), relabel(sample.final_relations), ids, ids);
    auto tasks = infer_tasks_transition(renamed, nullptr, oracle);
    std::vector<PickPlaceTask> expected;
    for (const auto& t : sample.truth_tasks)
      expected.push_back({rename(t.picked_id), rename(t.target_id), t.kind, TaskMethod::Transition});
    sort_tasks(expected);
    CHECK(tasks == expected);
  }
}

TEST_CASE("transition inference skips pairs with unmatched objects") {
  const ScenePair p{{100, 100, std::nullopt, {det("cup-0", "cup", {0, 0, 10, 10}), det("pot-0", "pot", {5, 5, 30, 30})}},
                    {100, 100, std::nullopt, {det("cup-0", "cup", {0, 0, 10, 10})}}};
  CountingClassifier counting(RelationLabel::AOnB);
  TransitionDiagnostics diag;
  CHECK(infer_tasks_transition(p, nullptr, counting, {}, &diag).empty());
  REQUIRE(diag.skipped.size() == 1);
  CHECK(diag.skipped[0].pair == PairCandidate{"cup-0", "pot-0"});
  CHECK(counting.calls == 0);
}

TEST_CASE("image size must match the scene") {
  const ScenePair p{{100, 100, std::nullopt, {det("cup-0", "cup", {0, 0, 10, 10}), det("pot-0", "pot", {5, 5, 30, 30})}},
                    {100, 100, std::nullopt, {det("cup-0", "cup", {0, 0, 10, 10}), det("pot-0", "pot", {5, 5, 30, 30})}}};
  SceneImages images{cv::Mat(50, 50, CV_8UC3), cv::Mat(100, 100, CV_8UC3)};
  HeuristicClassifier h;
  CHECK_THROWS_AS(infer_tasks_transition(p, &images, h), DataError);
}
