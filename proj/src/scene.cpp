#include "scenediff/scene.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "scenediff/errors.hpp"

namespace scenediff {

const std::vector<std::string>& default_class_names() {
  static const std::vector<std::string> names = {
      "bottle", "pan", "plate", "pot", "spoon", "whisk",
      "knife", "bowl", "cup", "cutting_board", "fork"};
  return names;
}

bool is_known_class(std::string_view name, const std::vector<std::string>& classes) {
  return std::find(classes.begin(), classes.end(), name) != classes.end();
}

const Detection* Scene::find(std::string_view id) const {
  for (const auto& d : detections) {
    if (d.id == id) {
      return &d;
    }
  }
  return nullptr;
}

double Scene::diagonal() const {
  return std::hypot(static_cast<double>(image_width), static_cast<double>(image_height));
}

void validate_scene(const Scene& scene) {
  if (scene.image_width <= 0 || scene.image_height <= 0) {
    throw DataError("scene image dimensions must be positive");
  }
  std::set<std::string> seen;
  for (const auto& d : scene.detections) {
    if (d.id.empty()) {
      throw DataError("detection with empty id");
    }
    if (!seen.insert(d.id).second) {
      throw DataError("duplicate detection id '" + d.id + "'");
    }
    if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) {
      throw DataError("detection '" + d.id + "' confidence outside [0,1]");
    }
    const BoundingBox frame(0.0, 0.0, scene.image_width, scene.image_height);
    if (!frame.contains(d.bbox)) {
      throw DataError("detection '" + d.id + "' bbox " + to_string(d.bbox) +
                      " lies outside the image");
    }
  }
}

void validate_pair(const ScenePair& pair) {
  validate_scene(pair.initial);
  validate_scene(pair.final);
  if (pair.initial.image_width != pair.final.image_width ||
      pair.initial.image_height != pair.final.image_height) {
    throw DataError("initial and final scenes have different image dimensions");
  }
}

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::In: return "in";
    case TaskKind::On: return "on";
    case TaskKind::Removed: return "removed";
  }
  return "on";
}

std::string_view to_string(TaskMethod method) {
  switch (method) {
    case TaskMethod::Geometric: return "geometric";
    case TaskMethod::Transition: return "transition";
    case TaskMethod::Truth: return "truth";
  }
  return "geometric";
}

TaskKind parse_task_kind(std::string_view text) {
  if (text == "in") return TaskKind::In;
  if (text == "on") return TaskKind::On;
  if (text == "removed") return TaskKind::Removed;
  throw ParseError("unknown task kind '" + std::string(text) + "'");
}

TaskMethod parse_task_method(std::string_view text) {
  if (text == "geometric") return TaskMethod::Geometric;
  if (text == "transition") return TaskMethod::Transition;
  if (text == "truth") return TaskMethod::Truth;
  throw ParseError("unknown task method '" + std::string(text) + "'");
}

bool task_less(const PickPlaceTask& a, const PickPlaceTask& b) {
  return std::tie(a.picked_id, a.target_id, a.kind) <
         std::tie(b.picked_id, b.target_id, b.kind);
}

void sort_tasks(std::vector<PickPlaceTask>& tasks) {
  std::stable_sort(tasks.begin(), tasks.end(), task_less);
}

}  // namespace scenediff
