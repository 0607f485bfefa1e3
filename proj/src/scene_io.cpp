#include "scenediff/scene_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "scenediff/errors.hpp"

namespace scenediff {

using nlohmann::json;

namespace {

double require_number(const json& j, const std::string& field) {
  if (!j.is_number()) {
    throw ParseError("field '" + field + "' must be a number");
  }
  const double v = j.get<double>();
  if (!std::isfinite(v)) {
    throw ParseError("field '" + field + "' is not finite");
  }
  return v;
}

// Clamps a raw box to the image frame; throws if nothing positive remains.
BoundingBox clamp_box(double x1, double y1, double x2, double y2, int width, int height,
                      const std::string& what) {
  if (!(x1 < x2) || !(y1 < y2)) {
    throw ParseError(what + ": bbox has non-positive extent");
  }
  const double cx1 = std::clamp(x1, 0.0, static_cast<double>(width));
  const double cy1 = std::clamp(y1, 0.0, static_cast<double>(height));
  const double cx2 = std::clamp(x2, 0.0, static_cast<double>(width));
  const double cy2 = std::clamp(y2, 0.0, static_cast<double>(height));
  if (!(cx1 < cx2) || !(cy1 < cy2)) {
    throw ParseError(what + ": bbox has zero area after clamping to the image");
  }
  return {cx1, cy1, cx2, cy2};
}

void assign_missing_ids(std::vector<Detection>& dets, const std::vector<bool>& has_id) {
  std::map<std::string, int> per_class;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    const int k = per_class[dets[i].object_class.name]++;
    if (!has_id[i]) {
      dets[i].id = dets[i].object_class.name + "-" + std::to_string(k);
    }
  }
}

json relations_to_json(std::vector<LabeledPair> rels) {
  std::sort(rels.begin(), rels.end(), [](const LabeledPair& x, const LabeledPair& y) {
    return std::tie(x.a, x.b) < std::tie(y.a, y.b);
  });
  json arr = json::array();
  for (const auto& r : rels) {
    arr.push_back({{"a", r.a}, {"b", r.b}, {"label", std::string(to_string(r.label))}});
  }
  return arr;
}

std::vector<LabeledPair> relations_from_json(const json& arr, const std::string& where) {
  if (!arr.is_array()) {
    throw ParseError("field '" + where + "' must be an array");
  }
  std::vector<LabeledPair> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& r = arr[i];
    const std::string field = where + "[" + std::to_string(i) + "]";
    if (!r.is_object() || !r.contains("a") || !r.contains("b") || !r.contains("label") ||
        !r["a"].is_string() || !r["b"].is_string() || !r["label"].is_string()) {
      throw ParseError("field '" + field + "' must have string a, b, label");
    }
    out.push_back({r["a"].get<std::string>(), r["b"].get<std::string>(),
                   parse_relation_label(r["label"].get<std::string>())});
  }
  return out;
}

}  // namespace

Scene parse_scene_json(std::string_view text, const std::vector<std::string>& class_names) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed scene JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("image") || !doc["image"].is_object()) {
    throw ParseError("scene JSON missing 'image' object");
  }
  const json& image = doc["image"];
  Scene scene;
  if (!image.contains("width") || !image["width"].is_number_integer() ||
      !image.contains("height") || !image["height"].is_number_integer()) {
    throw ParseError("field 'image.width'/'image.height' must be integers");
  }
  scene.image_width = image["width"].get<int>();
  scene.image_height = image["height"].get<int>();
  if (scene.image_width <= 0 || scene.image_height <= 0) {
    throw ParseError("field 'image.width'/'image.height' must be positive");
  }
  if (image.contains("path") && !image["path"].is_null()) {
    if (!image["path"].is_string()) {
      throw ParseError("field 'image.path' must be a string");
    }
    scene.image_path = image["path"].get<std::string>();
  }

  if (!doc.contains("detections") || !doc["detections"].is_array()) {
    throw ParseError("scene JSON missing 'detections' array");
  }
  std::vector<bool> has_id;
  const json& dets = doc["detections"];
  for (std::size_t i = 0; i < dets.size(); ++i) {
    const json& d = dets[i];
    const std::string where = "detections[" + std::to_string(i) + "]";
    if (!d.is_object()) {
      throw ParseError("field '" + where + "' must be an object");
    }
    Detection det;
    if (d.contains("id") && !d["id"].is_null()) {
      if (!d["id"].is_string() || d["id"].get<std::string>().empty()) {
        throw ParseError("field '" + where + ".id' must be a non-empty string");
      }
      det.id = d["id"].get<std::string>();
      has_id.push_back(true);
    } else {
      has_id.push_back(false);
    }
    if (!d.contains("class") || !d["class"].is_string()) {
      throw ParseError("field '" + where + ".class' must be a string");
    }
    det.object_class.name = d["class"].get<std::string>();
    if (!is_known_class(det.object_class.name, class_names)) {
      throw ParseError("field '" + where + ".class': unknown class '" +
                       det.object_class.name + "'");
    }
    det.confidence = d.contains("confidence")
                         ? require_number(d["confidence"], where + ".confidence")
                         : 1.0;
    if (det.confidence < 0.0 || det.confidence > 1.0) {
      throw ParseError("field '" + where + ".confidence' outside [0,1]");
    }
    if (!d.contains("bbox") || !d["bbox"].is_array() || d["bbox"].size() != 4) {
      throw ParseError("field '" + where + ".bbox' must be a 4-element array");
    }
    const json& b = d["bbox"];
    const std::string bf = where + ".bbox";
    det.bbox = clamp_box(require_number(b[0], bf), require_number(b[1], bf),
                         require_number(b[2], bf), require_number(b[3], bf),
                         scene.image_width, scene.image_height,
                         has_id.back() ? "detection '" + det.id + "'" : where);
    scene.detections.push_back(std::move(det));
  }
  assign_missing_ids(scene.detections, has_id);
  try {
    validate_scene(scene);
  } catch (const DataError& e) {
    throw ParseError(e.what());
  }
  return scene;
}

Scene parse_detector_txt(std::string_view text, const DetectorTxtOptions& options) {
  if (options.image_width <= 0 || options.image_height <= 0) {
    throw ParseError("detector text input requires positive image dimensions");
  }
  if (options.class_names.empty()) {
    throw ParseError("detector text input requires a class-names list");
  }
  Scene scene;
  scene.image_width = options.image_width;
  scene.image_height = options.image_height;

  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    const std::string where = "line " + std::to_string(line_no);
    std::istringstream fields(line);
    std::vector<std::string> tokens;
    for (std::string tok; fields >> tok;) {
      tokens.push_back(tok);
    }
    if (tokens.size() != 5 && tokens.size() != 6) {
      throw ParseError(where + ": expected 'class cx cy w h [confidence]', got " +
                       std::to_string(tokens.size()) + " fields");
    }
    int cls = -1;
    {
      const auto& t = tokens[0];
      auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), cls);
      if (ec != std::errc() || p != t.data() + t.size()) {
        throw ParseError(where + ": class index '" + t + "' is not an integer");
      }
    }
    if (cls < 0 || cls >= static_cast<int>(options.class_names.size())) {
      throw ParseError(where + ": class index " + std::to_string(cls) +
                       " out of range for " + std::to_string(options.class_names.size()) +
                       " classes");
    }
    std::array<double, 5> v{1.0, 1.0, 1.0, 1.0, 1.0};
    static const char* names[] = {"cx", "cy", "w", "h", "confidence"};
    for (std::size_t k = 1; k < tokens.size(); ++k) {
      std::size_t used = 0;
      double value = 0.0;
      try {
        value = std::stod(tokens[k], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tokens[k].size() || !std::isfinite(value)) {
        throw ParseError(where + ": field '" + names[k - 1] + "' is not a number");
      }
      v[k - 1] = value;
    }
    if (v[4] < 0.0 || v[4] > 1.0) {
      throw ParseError(where + ": confidence outside [0,1]");
    }
    const double w = options.image_width;
    const double h = options.image_height;
    const double cx = v[0] * w, cy = v[1] * h, bw = v[2] * w, bh = v[3] * h;
    Detection det;
    det.object_class.name = options.class_names[static_cast<std::size_t>(cls)];
    det.confidence = v[4];
    det.bbox = clamp_box(cx - bw / 2.0, cy - bh / 2.0, cx + bw / 2.0, cy + bh / 2.0,
                         options.image_width, options.image_height,
                         where + " (" + det.object_class.name + ")");
    scene.detections.push_back(std::move(det));
  }
  assign_missing_ids(scene.detections, std::vector<bool>(scene.detections.size(), false));
  return scene;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open '" + path.string() + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Scene load_scene(const std::filesystem::path& path, SceneFormat format,
                 const DetectorTxtOptions& options) {
  const std::string text = read_text_file(path);
  try {
    if (format == SceneFormat::SceneJson) {
      return parse_scene_json(text, options.class_names);
    }
    return parse_detector_txt(text, options);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::vector<std::string> read_class_names(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::vector<std::string> names;
  for (std::string line; std::getline(in, line);) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
      continue;
    }
    const auto last = line.find_last_not_of(" \t\r");
    names.push_back(line.substr(first, last - first + 1));
  }
  return names;
}

std::string serialize_scene(const Scene& scene) {
  json image = {{"width", scene.image_width}, {"height", scene.image_height}};
  if (scene.image_path) {
    image["path"] = *scene.image_path;
  }
  json dets = json::array();
  for (const auto& d : scene.detections) {
    dets.push_back({{"id", d.id},
                    {"class", d.object_class.name},
                    {"confidence", d.confidence},
                    {"bbox", {d.bbox.x_min(), d.bbox.y_min(), d.bbox.x_max(), d.bbox.y_max()}}});
  }
  json doc = {{"image", image}, {"detections", dets}};
  return doc.dump(2) + "\n";
}

std::string serialize_task_document(const TaskDocument& doc) {
  std::vector<PickPlaceTask> tasks = doc.tasks;
  sort_tasks(tasks);
  json arr = json::array();
  for (const auto& t : tasks) {
    arr.push_back({{"picked", t.picked_id},
                   {"target", t.target_id},
                   {"kind", std::string(to_string(t.kind))},
                   {"method", std::string(to_string(t.method))}});
  }
  json out = {{"tasks", arr}};
  if (doc.initial_relations || doc.final_relations) {
    out["relations"] = {
        {"initial", relations_to_json(doc.initial_relations.value_or(std::vector<LabeledPair>{}))},
        {"final", relations_to_json(doc.final_relations.value_or(std::vector<LabeledPair>{}))}};
  }
  return out.dump(2) + "\n";
}

std::string serialize_tasks(const std::vector<PickPlaceTask>& tasks) {
  return serialize_task_document(TaskDocument{tasks, std::nullopt, std::nullopt});
}

TaskDocument parse_task_document(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed tasks JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("tasks") || !doc["tasks"].is_array()) {
    throw ParseError("tasks JSON missing 'tasks' array");
  }
  TaskDocument out;
  const json& tasks = doc["tasks"];
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const json& t = tasks[i];
    const std::string where = "tasks[" + std::to_string(i) + "]";
    for (const char* key : {"picked", "target", "kind", "method"}) {
      if (!t.is_object() || !t.contains(key) || !t[key].is_string()) {
        throw ParseError("field '" + where + "." + key + "' must be a string");
      }
    }
    PickPlaceTask task{t["picked"].get<std::string>(), t["target"].get<std::string>(),
                       parse_task_kind(t["kind"].get<std::string>()),
                       parse_task_method(t["method"].get<std::string>())};
    if (task.picked_id == task.target_id) {
      throw ParseError("field '" + where + "': picked and target are the same object");
    }
    out.tasks.push_back(std::move(task));
  }
  if (doc.contains("relations")) {
    const json& rels = doc["relations"];
    if (!rels.is_object()) {
      throw ParseError("field 'relations' must be an object");
    }
    if (rels.contains("initial")) {
      out.initial_relations = relations_from_json(rels["initial"], "relations.initial");
    }
    if (rels.contains("final")) {
      out.final_relations = relations_from_json(rels["final"], "relations.final");
    }
  }
  return out;
}

TaskDocument load_task_document(const std::filesystem::path& path) {
  try {
    return parse_task_document(read_text_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace scenediff
