#include "scenediff/geometric.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "scenediff/matching.hpp"

namespace scenediff {

void GeoConfig::validate() const {
  if (!(movement_threshold_frac > 0.0 && movement_threshold_frac < 1.0)) {
    throw std::invalid_argument("movement_threshold_frac must lie in (0,1)");
  }
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
    throw std::invalid_argument("iou_threshold must lie in (0,1)");
  }
}

MatchResult match_objects(const ScenePair& pair, const GeoConfig& config) {
  std::map<std::string, std::vector<const Detection*>> initial_by_class;
  std::map<std::string, std::vector<const Detection*>> final_by_class;
  for (const auto& d : pair.initial.detections) {
    initial_by_class[d.object_class.name].push_back(&d);
  }
  for (const auto& d : pair.final.detections) {
    final_by_class[d.object_class.name].push_back(&d);
  }

  MatchResult result;
  std::set<std::string> classes;
  for (const auto& [name, _] : initial_by_class) classes.insert(name);
  for (const auto& [name, _] : final_by_class) classes.insert(name);

  for (const auto& name : classes) {
    const auto& before = initial_by_class[name];
    const auto& after = final_by_class[name];
    CostMatrix cost{before.size(), after.size(), {}};
    cost.values.reserve(before.size() * after.size());
    for (const auto* a : before) {
      for (const auto* b : after) {
        cost.values.push_back(displacement(a->bbox, b->bbox));
      }
    }
    const std::vector<int> assignment =
        config.same_class_matching == SameClassMatching::Hungarian ? hungarian_assignment(cost)
                                                                   : greedy_assignment(cost);
    std::vector<char> final_used(after.size(), 0);
    for (std::size_t r = 0; r < before.size(); ++r) {
      if (assignment[r] < 0) {
        result.disappeared.push_back(before[r]->id);
        continue;
      }
      const auto c = static_cast<std::size_t>(assignment[r]);
      final_used[c] = 1;
      result.matches.push_back({before[r]->id, after[c]->id, cost.at(r, c)});
    }
    for (std::size_t c = 0; c < after.size(); ++c) {
      if (!final_used[c]) {
        result.appeared.push_back(after[c]->id);
      }
    }
  }
  std::sort(result.matches.begin(), result.matches.end(),
            [](const ObjectMatch& a, const ObjectMatch& b) { return a.initial_id < b.initial_id; });
  std::sort(result.appeared.begin(), result.appeared.end());
  std::sort(result.disappeared.begin(), result.disappeared.end());
  return result;
}

double movement_threshold_px(const Scene& scene, const GeoConfig& config) {
  return config.movement_threshold_frac * scene.diagonal();
}

std::vector<ObjectMatch> moved_objects(const std::vector<ObjectMatch>& matches,
                                       const ScenePair& pair, const GeoConfig& config) {
  const double threshold = movement_threshold_px(pair.initial, config);
  std::vector<ObjectMatch> moved;
  std::copy_if(matches.begin(), matches.end(), std::back_inserter(moved),
               [threshold](const ObjectMatch& m) { return m.displacement_px > threshold; });
  return moved;
}

std::vector<PickPlaceTask> infer_tasks_geometric(const ScenePair& pair, const GeoConfig& config,
                                                 GeometricDiagnostics* diagnostics) {
  config.validate();
  MatchResult match = match_objects(pair, config);
  std::vector<ObjectMatch> moved = moved_objects(match.matches, pair, config);

  std::vector<PairOverlap> overlaps;
  std::set<std::pair<std::string, std::string>> examined;
  std::vector<PickPlaceTask> tasks;
  for (const auto& m : moved) {
    const BoundingBox& moved_final = pair.final.find(m.final_id)->bbox;
    for (const auto& other : match.matches) {
      if (other.initial_id == m.initial_id) {
        continue;
      }
      auto key = std::minmax(m.initial_id, other.initial_id);
      std::pair<std::string, std::string> canonical{key.first, key.second};
      if (!examined.insert(canonical).second) {
        continue;
      }
      const double overlap = iou(moved_final, pair.final.find(other.final_id)->bbox);
      overlaps.push_back({m.initial_id, other.initial_id, overlap});
      if (!(overlap > config.iou_threshold)) {
        continue;
      }
      // The member that travelled farther is taken as the picked object.
      const ObjectMatch* picked = &m;
      const ObjectMatch* target = &other;
      if (other.displacement_px > m.displacement_px ||
          (other.displacement_px == m.displacement_px && other.initial_id < m.initial_id)) {
        std::swap(picked, target);
      }
      tasks.push_back({picked->initial_id, target->initial_id, TaskKind::On, TaskMethod::Geometric});
    }
  }
  sort_tasks(tasks);

  if (diagnostics != nullptr) {
    diagnostics->threshold_px = movement_threshold_px(pair.initial, config);
    diagnostics->moved = std::move(moved);
    diagnostics->overlaps = std::move(overlaps);
    diagnostics->match = std::move(match);
  }
  return tasks;
}

}  // namespace scenediff
