#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scenediff/geometry.hpp"

namespace scenediff {

struct ObjectClass {
  std::string name;

  auto operator<=>(const ObjectClass&) const = default;
};

// The eleven kitchen object labels, in detector class-index order.
const std::vector<std::string>& default_class_names();

bool is_known_class(std::string_view name, const std::vector<std::string>& classes);

struct Detection {
  std::string id;
  ObjectClass object_class;
  double confidence = 1.0;
  BoundingBox bbox;

  bool operator==(const Detection&) const = default;
};

struct Scene {
  int image_width = 0;
  int image_height = 0;
  std::optional<std::string> image_path;
  std::vector<Detection> detections;

  const Detection* find(std::string_view id) const;
  double diagonal() const;

  bool operator==(const Scene&) const = default;
};

// Throws DataError on duplicate ids, out-of-range confidence, non-positive
// image dimensions, or a bbox outside the image.
void validate_scene(const Scene& scene);

struct ScenePair {
  Scene initial;
  Scene final;
};

void validate_pair(const ScenePair& pair);

enum class TaskKind { In, On, Removed };
enum class TaskMethod { Geometric, Transition, Truth };

std::string_view to_string(TaskKind kind);
std::string_view to_string(TaskMethod method);
TaskKind parse_task_kind(std::string_view text);
TaskMethod parse_task_method(std::string_view text);

struct PickPlaceTask {
  std::string picked_id;
  std::string target_id;
  TaskKind kind = TaskKind::On;
  TaskMethod method = TaskMethod::Geometric;

  bool operator==(const PickPlaceTask&) const = default;
};

// Ordering used for serialization: (picked_id, target_id, kind).
bool task_less(const PickPlaceTask& a, const PickPlaceTask& b);

void sort_tasks(std::vector<PickPlaceTask>& tasks);

}  // namespace scenediff
