#include "scenediff/evaluation.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "json.hpp"
#include "scenediff/errors.hpp"

namespace scenediff {

using nlohmann::json;

namespace {

int class_of(const PickPlaceTask& task, const PairCandidate& pair) {
  return task.picked_id == pair.a_id ? kClassForward : kClassReverse;
}

std::map<PairCandidate, const PickPlaceTask*> index_tasks(const std::vector<PickPlaceTask>& tasks,
                                                          const char* which) {
  std::map<PairCandidate, const PickPlaceTask*> out;
  for (const auto& t : tasks) {
    const auto key = PairCandidate::canonical(t.picked_id, t.target_id);
    if (!out.emplace(key, &t).second) {
      throw DataError(std::string(which) + " tasks contain two tasks on pair (" + key.a_id + ", " +
                      key.b_id + ")");
    }
  }
  return out;
}

std::optional<double> ratio(std::int64_t num, std::int64_t den) {
  if (den == 0) {
    return std::nullopt;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

template <std::size_t N>
json matrix_json(const std::array<std::array<std::int64_t, N>, N>& m) {
  json rows = json::array();
  for (const auto& row : m) {
    rows.push_back(json(std::vector<std::int64_t>(row.begin(), row.end())));
  }
  return rows;
}

}  // namespace

std::vector<PairOutcome> pair_outcomes(const std::vector<PickPlaceTask>& predicted,
                                       const std::vector<PickPlaceTask>& truth,
                                       const std::vector<PairCandidate>& universe) {
  const auto pred = index_tasks(predicted, "predicted");
  const auto gold = index_tasks(truth, "truth");
  const std::set<PairCandidate> known(universe.begin(), universe.end());
  for (const auto* tasks : {&pred, &gold}) {
    for (const auto& [pair, _] : *tasks) {
      if (!known.contains(pair)) {
        throw DataError("task on pair (" + pair.a_id + ", " + pair.b_id +
                        ") lies outside the evaluation universe");
      }
    }
  }
  std::vector<PairOutcome> out;
  out.reserve(known.size());
  for (const auto& pair : known) {
    PairOutcome o{pair, kClassNoTask, kClassNoTask};
    if (const auto it = pred.find(pair); it != pred.end()) o.predicted = class_of(*it->second, pair);
    if (const auto it = gold.find(pair); it != gold.end()) o.truth = class_of(*it->second, pair);
    out.push_back(std::move(o));
  }
  return out;
}

TaskStats& TaskStats::operator+=(const TaskStats& o) {
  removal_total += o.removal_total;
  removal_correct += o.removal_correct;
  direction_total += o.direction_total;
  direction_correct += o.direction_correct;
  in_on_total += o.in_on_total;
  in_on_correct += o.in_on_correct;
  return *this;
}

TaskStats task_stats(const std::vector<PickPlaceTask>& predicted,
                     const std::vector<PickPlaceTask>& truth) {
  const auto pred = index_tasks(predicted, "predicted");
  TaskStats s;
  for (const auto& t : truth) {
    const auto it = pred.find(PairCandidate::canonical(t.picked_id, t.target_id));
    const PickPlaceTask* p = it == pred.end() ? nullptr : it->second;
    if (t.kind == TaskKind::Removed) {
      ++s.removal_total;
      if (p != nullptr && p->picked_id == t.picked_id && p->kind == TaskKind::Removed) {
        ++s.removal_correct;
      }
    }
    if (p == nullptr) {
      continue;
    }
    ++s.direction_total;
    const bool same_direction = p->picked_id == t.picked_id;
    if (same_direction) {
      ++s.direction_correct;
    }
    if (t.kind != TaskKind::Removed && p->kind != TaskKind::Removed && same_direction) {
      ++s.in_on_total;
      if (p->kind == t.kind) {
        ++s.in_on_correct;
      }
    }
  }
  return s;
}

std::optional<double> EvaluationReport::removal_accuracy() const {
  return ratio(task_stats.removal_correct, task_stats.removal_total);
}
std::optional<double> EvaluationReport::direction_accuracy() const {
  return ratio(task_stats.direction_correct, task_stats.direction_total);
}
std::optional<double> EvaluationReport::in_on_accuracy() const {
  return ratio(task_stats.in_on_correct, task_stats.in_on_total);
}

Confusion3 confusion_matrix(std::span<const PairOutcome> outcomes) {
  Confusion3 m{};
  for (const auto& o : outcomes) {
    if (o.truth < 0 || o.truth > 2 || o.predicted < 0 || o.predicted > 2) {
      throw DataError("pair outcome class outside {0,1,2}");
    }
    ++m[static_cast<std::size_t>(o.truth)][static_cast<std::size_t>(o.predicted)];
  }
  return m;
}

EvaluationReport compute_report(std::span<const PairOutcome> outcomes) {
  if (outcomes.empty()) {
    throw DataError("cannot evaluate an empty set of pair outcomes");
  }
  EvaluationReport r;
  r.confusion = confusion_matrix(outcomes);
  r.n_pairs = static_cast<std::int64_t>(outcomes.size());
  std::int64_t correct = 0;
  for (std::size_t c = 0; c < 3; ++c) {
    std::int64_t predicted = 0, actual = 0;
    for (std::size_t k = 0; k < 3; ++k) {
      predicted += r.confusion[k][c];
      actual += r.confusion[c][k];
    }
    const std::int64_t tp = r.confusion[c][c];
    correct += tp;
    r.per_class[c] = {ratio(tp, predicted), ratio(tp, actual), actual};
  }
  r.accuracy = static_cast<double>(correct) / static_cast<double>(r.n_pairs);
  return r;
}

Confusion5 relation_confusion(std::span<const RelationLabel> predicted,
                              std::span<const RelationLabel> truth) {
  if (predicted.size() != truth.size()) {
    throw DataError("relation label lists differ in length");
  }
  Confusion5 m{};
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++m[static_cast<std::size_t>(index_of(truth[i]))][static_cast<std::size_t>(index_of(predicted[i]))];
  }
  return m;
}

std::vector<PairCandidate> evaluation_universe(const ScenePair& pair,
                                               const std::vector<PickPlaceTask>& truth,
                                               const GeoConfig& match_config) {
  const MatchResult match = match_objects(pair, match_config);
  std::map<std::string, std::string> to_initial;
  for (const auto& m : match.matches) {
    to_initial.emplace(m.final_id, m.initial_id);
  }
  std::set<PairCandidate> universe;
  for (const auto& c : candidate_pairs(pair.initial)) {
    universe.insert(c);
  }
  for (const auto& c : candidate_pairs(pair.final)) {
    const auto a = to_initial.find(c.a_id);
    const auto b = to_initial.find(c.b_id);
    if (a != to_initial.end() && b != to_initial.end()) {
      universe.insert(PairCandidate::canonical(a->second, b->second));
    }
  }
  for (const auto& t : truth) {
    universe.insert(PairCandidate::canonical(t.picked_id, t.target_id));
  }
  return {universe.begin(), universe.end()};
}

SampleEvaluation evaluate_sample(std::string name, const ScenePair& pair,
                                 const TaskDocument& predicted, const TaskDocument& truth,
                                 const GeoConfig& match_config) {
  SampleEvaluation s;
  s.name = std::move(name);
  const auto universe = evaluation_universe(pair, truth.tasks, match_config);
  s.outcomes = pair_outcomes(predicted.tasks, truth.tasks, universe);
  s.stats = task_stats(predicted.tasks, truth.tasks);

  if (predicted.initial_relations && predicted.final_relations) {
    const auto lookup = [](const std::optional<std::vector<LabeledPair>>& rels,
                           const PairCandidate& c) {
      if (rels) {
        for (const auto& r : *rels) {
          if (r.a == c.a_id && r.b == c.b_id) return r.label;
          if (r.a == c.b_id && r.b == c.a_id) return swapped(r.label);
        }
      }
      return RelationLabel::Unrelated;
    };
    std::vector<RelationLabel> pred_labels, truth_labels;
    for (const auto& c : universe) {
      pred_labels.push_back(lookup(predicted.initial_relations, c));
      truth_labels.push_back(lookup(truth.initial_relations, c));
      pred_labels.push_back(lookup(predicted.final_relations, c));
      truth_labels.push_back(lookup(truth.final_relations, c));
    }
    s.relations = relation_confusion(pred_labels, truth_labels);
  }
  return s;
}

EvaluationReport merge_evaluations(std::span<const SampleEvaluation> samples) {
  std::vector<PairOutcome> all;
  TaskStats stats;
  bool have_relations = !samples.empty();
  Confusion5 relations{};
  for (const auto& s : samples) {
    all.insert(all.end(), s.outcomes.begin(), s.outcomes.end());
    stats += s.stats;
    if (s.relations) {
      for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t k = 0; k < 5; ++k) relations[i][k] += (*s.relations)[i][k];
    } else {
      have_relations = false;
    }
  }
  EvaluationReport r = compute_report(all);
  r.n_scene_pairs = static_cast<std::int64_t>(samples.size());
  r.task_stats = stats;
  if (have_relations) {
    r.relation_confusion = relations;
  }
  return r;
}

std::string serialize_report(const EvaluationReport& report,
                             std::span<const SampleEvaluation> samples) {
  json per_class = json::array();
  for (std::size_t c = 0; c < 3; ++c) {
    per_class.push_back({{"class", c},
                         {"precision", optional_json(report.per_class[c].precision)},
                         {"recall", optional_json(report.per_class[c].recall)},
                         {"support", report.per_class[c].support}});
  }
  json labels = json::array();
  for (const auto l : kAllRelationLabels) labels.push_back(std::string(to_string(l)));

  json listing = json::array();
  for (const auto& s : samples) {
    json outcomes = json::array();
    for (const auto& o : s.outcomes) {
      outcomes.push_back({{"a", o.pair.a_id}, {"b", o.pair.b_id}, {"predicted", o.predicted}, {"truth", o.truth}});
    }
    listing.push_back({{"sample", s.name}, {"outcomes", outcomes}});
  }

  json doc = {
      {"n_scene_pairs", report.n_scene_pairs},
      {"n_pairs", report.n_pairs},
      {"accuracy", report.accuracy},
      {"confusion_3x3", {{"rows", "truth class 0,1,2"}, {"columns", "predicted class 0,1,2"},
                         {"counts", matrix_json(report.confusion)}}},
      {"per_class", per_class},
      {"removal_accuracy", optional_json(report.removal_accuracy())},
      {"direction_accuracy", optional_json(report.direction_accuracy())},
      {"in_on_accuracy", optional_json(report.in_on_accuracy())},
      {"task_counts", {{"removal_total", report.task_stats.removal_total},
                       {"removal_correct", report.task_stats.removal_correct},
                       {"direction_total", report.task_stats.direction_total},
                       {"direction_correct", report.task_stats.direction_correct},
                       {"in_on_total", report.task_stats.in_on_total},
                       {"in_on_correct", report.task_stats.in_on_correct}}},
      {"samples", listing},
  };
  if (report.relation_confusion) {
    doc["relation_confusion_5x5"] = {{"labels", labels}, {"counts", matrix_json(*report.relation_confusion)}};
  } else {
    doc["relation_confusion_5x5"] = nullptr;
  }
  return doc.dump(2) + "\n";
}

}  // namespace scenediff
