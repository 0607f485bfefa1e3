#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scenediff/relation_label.hpp"
#include "scenediff/scene.hpp"

namespace scenediff {

enum class SceneFormat { SceneJson, DetectorTxt };

struct DetectorTxtOptions {
  int image_width = 0;
  int image_height = 0;
  std::vector<std::string> class_names = default_class_names();
};

// Parses `{"image":{...},"detections":[...]}`. Boxes are clamped to the
// image; missing ids become `<class>-<k>` in reading order per class.
Scene parse_scene_json(std::string_view text,
                       const std::vector<std::string>& class_names = default_class_names());

// Parses YOLO-style `class cx cy w h [confidence]` lines normalized to [0,1].
Scene parse_detector_txt(std::string_view text, const DetectorTxtOptions& options);

Scene load_scene(const std::filesystem::path& path, SceneFormat format,
                 const DetectorTxtOptions& options = {});

std::string serialize_scene(const Scene& scene);

std::vector<std::string> read_class_names(const std::filesystem::path& path);

// TASKS_JSON, optionally extended with per-scene relation listings.
struct TaskDocument {
  std::vector<PickPlaceTask> tasks;
  std::optional<std::vector<LabeledPair>> initial_relations;
  std::optional<std::vector<LabeledPair>> final_relations;
};

// Tasks are emitted sorted by (picked, target, kind).
std::string serialize_tasks(const std::vector<PickPlaceTask>& tasks);
std::string serialize_task_document(const TaskDocument& doc);
TaskDocument parse_task_document(std::string_view text);
TaskDocument load_task_document(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace scenediff
