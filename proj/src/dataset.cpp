#include "scenediff/dataset.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

#include <opencv2/imgproc.hpp>

#include "json.hpp"
#include "scenediff/errors.hpp"
#include "scenediff/fs_util.hpp"
#include "scenediff/parallel.hpp"
#include "scenediff/scene_io.hpp"

namespace scenediff {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* matching_name(SameClassMatching m) {
  return m == SameClassMatching::Hungarian ? "hungarian" : "greedy";
}

json sim_json(const SimConfig& c) {
  return {{"image_width", c.image_width},
          {"image_height", c.image_height},
          {"n_objects", {c.n_objects.min, c.n_objects.max}},
          {"n_tasks", {c.n_tasks.min, c.n_tasks.max}},
          {"kind_mix", {{"in", c.kind_mix.in}, {"on", c.kind_mix.on}, {"removed", c.kind_mix.removed}}},
          {"jitter_px", c.jitter_px},
          {"detectability", c.detectability},
          {"seed", c.seed},
          {"movement_threshold_frac", c.movement_threshold_frac},
          {"direction_trap_prob", c.direction_trap_prob},
          {"sub_threshold_prob", c.sub_threshold_prob}};
}

IntRange range_from(const json& v, const std::string& key) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer()) {
    throw ParseError("config field '" + key + "' must be [min, max] integers");
  }
  return {v[0].get<int>(), v[1].get<int>()};
}

double number_from(const json& v, const std::string& key) {
  if (!v.is_number()) {
    throw ParseError("config field '" + key + "' must be a number");
  }
  return v.get<double>();
}

std::string crop_box_text(const BoundingBox& b) {
  std::ostringstream ss;
  ss << b.x_min() << ' ' << b.y_min() << ' ' << b.x_max() << ' ' << b.y_max();
  return ss.str();
}

struct CropRecord {
  std::string file;
  std::string bbox_a;
  std::string bbox_b;
  std::string label;
};

std::string relation_lookup(const std::vector<LabeledPair>& rels, const PairCandidate& c) {
  for (const auto& r : rels) {
    if (r.a == c.a_id && r.b == c.b_id) return std::string(to_string(r.label));
  }
  return std::string(to_string(RelationLabel::Unrelated));
}

// Writes the crops of one sample and returns their labels.csv rows.
std::vector<CropRecord> write_crops(const ScenePairSample& sample, const fs::path& root) {
  std::vector<CropRecord> out;
  const auto k = std::to_string(sample.index);
  std::set<PairCandidate> truth_pairs;
  for (const auto& t : sample.truth_tasks) {
    truth_pairs.insert(PairCandidate::canonical(t.picked_id, t.target_id));
  }
  const struct {
    SceneSide side;
    const Scene* scene;
    const cv::Mat* image;
    const std::vector<LabeledPair>* relations;
  } sides[] = {{SceneSide::Initial, &sample.pair.initial, &sample.images->initial, &sample.initial_relations},
               {SceneSide::Final, &sample.pair.final, &sample.images->final, &sample.final_relations}};
  for (const auto& s : sides) {
    std::set<PairCandidate> pairs = truth_pairs;
    for (const auto& c : candidate_pairs(*s.scene)) pairs.insert(c);
    for (const auto& c : pairs) {
      const Detection* a = s.scene->find(c.a_id);
      const Detection* b = s.scene->find(c.b_id);
      const ClassifierInput input = build_classifier_input(*s.image, *a, *b);
      const std::string name = k + "_" + c.a_id + "+" + c.b_id + "_" + std::string(to_string(s.side)) + ".png";
      cv::Mat bgr;
      cv::cvtColor(input.rgb, bgr, cv::COLOR_RGB2BGR);
      write_png_atomic(root / "crops" / name, bgr);
      out.push_back({"crops/" + name, crop_box_text(input.bbox_a), crop_box_text(input.bbox_b),
                     relation_lookup(*s.relations, c)});
    }
  }
  return out;
}

}  // namespace

EngineConfig parse_engine_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed config JSON: ") + e.what());
  }
  if (!doc.is_object()) {
    throw ParseError("config must be a JSON object");
  }
  EngineConfig c;
  for (const auto& [key, v] : doc.items()) {
    if (key == "image_width" || key == "image_height") {
      if (!v.is_number_integer()) throw ParseError("config field '" + key + "' must be an integer");
      (key == "image_width" ? c.sim.image_width : c.sim.image_height) = v.get<int>();
    } else if (key == "n_objects") {
      c.sim.n_objects = range_from(v, key);
    } else if (key == "n_tasks") {
      c.sim.n_tasks = range_from(v, key);
    } else if (key == "kind_mix") {
      if (!v.is_object()) throw ParseError("config field 'kind_mix' must be an object");
      for (const auto& [kk, kv] : v.items()) {
        const double p = number_from(kv, "kind_mix." + kk);
        if (kk == "in") c.sim.kind_mix.in = p;
        else if (kk == "on") c.sim.kind_mix.on = p;
        else if (kk == "removed") c.sim.kind_mix.removed = p;
        else throw ParseError("unknown config field 'kind_mix." + kk + "'");
      }
    } else if (key == "jitter_px") {
      c.sim.jitter_px = number_from(v, key);
    } else if (key == "detectability") {
      if (!v.is_boolean()) throw ParseError("config field 'detectability' must be a boolean");
      c.sim.detectability = v.get<bool>();
    } else if (key == "seed") {
      if (!v.is_number_unsigned()) throw ParseError("config field 'seed' must be a non-negative integer");
      c.sim.seed = v.get<std::uint64_t>();
    } else if (key == "movement_threshold_frac") {
      c.sim.movement_threshold_frac = c.geo.movement_threshold_frac = number_from(v, key);
    } else if (key == "direction_trap_prob") {
      c.sim.direction_trap_prob = number_from(v, key);
    } else if (key == "sub_threshold_prob") {
      c.sim.sub_threshold_prob = number_from(v, key);
    } else if (key == "iou_threshold") {
      c.geo.iou_threshold = number_from(v, key);
    } else if (key == "same_class_matching") {
      const std::string m = v.is_string() ? v.get<std::string>() : "";
      if (m == "hungarian") c.geo.same_class_matching = SameClassMatching::Hungarian;
      else if (m == "greedy") c.geo.same_class_matching = SameClassMatching::Greedy;
      else throw ParseError("config field 'same_class_matching' must be \"hungarian\" or \"greedy\"");
    } else if (key == "relation_threshold") {
      c.heuristic.relation_threshold = number_from(v, key);
    } else if (key == "in_threshold") {
      c.heuristic.in_threshold = number_from(v, key);
    } else {
      throw ParseError("unknown config field '" + key + "'");
    }
  }
  try {
    c.sim.validate();
    c.geo.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("invalid config: ") + e.what());
  }
  return c;
}

EngineConfig load_engine_config(const fs::path& path) {
  try {
    return parse_engine_config(read_text_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string engine_config_json(const EngineConfig& config) {
  json doc = sim_json(config.sim);
  doc["iou_threshold"] = config.geo.iou_threshold;
  doc["same_class_matching"] = matching_name(config.geo.same_class_matching);
  doc["relation_threshold"] = config.heuristic.relation_threshold;
  doc["in_threshold"] = config.heuristic.in_threshold;
  return doc.dump(2) + "\n";
}

std::string serialize_truth(const ScenePairSample& sample) {
  return serialize_task_document({sample.truth_tasks, sample.initial_relations, sample.final_relations});
}

std::string serialize_manifest(const Manifest& manifest) {
  json files = json::array();
  for (const auto& f : manifest.files) {
    files.push_back({{"path", f.path}, {"sha256", f.sha256}});
  }
  return json{{"config", sim_json(manifest.config)}, {"n", manifest.n}, {"files", files}}.dump(2) + "\n";
}

Manifest generate_dataset(const SimConfig& config, std::uint64_t n, const fs::path& out_dir,
                          const DatasetOptions& options) {
  config.validate();
  const bool render = options.render || options.emit_crops;
  fs::create_directories(out_dir);

  std::vector<std::vector<ManifestFile>> files(n);
  std::vector<std::vector<CropRecord>> crops(n);
  parallel_for(n, options.jobs, [&](std::size_t i) {
    const ScenePairSample sample = generate_scene_pair(config, i, render);
    const std::string dir = "sample_" + std::to_string(i);
    auto put = [&](const std::string& name, const std::string& data) {
      write_file_atomic(out_dir / dir / name, data);
      files[i].push_back({dir + "/" + name, sha256_hex(data)});
    };
    Scene initial = sample.pair.initial;
    Scene final = sample.pair.final;
    if (render) {
      initial.image_path = "initial.png";
      final.image_path = "final.png";
    }
    put("initial.json", serialize_scene(initial));
    put("final.json", serialize_scene(final));
    put("truth.json", serialize_truth(sample));
    if (render) {
      for (const auto& [name, image] : {std::pair{"initial.png", &sample.images->initial},
                                        std::pair{"final.png", &sample.images->final}}) {
        const fs::path p = out_dir / dir / name;
        write_png_atomic(p, *image);
        files[i].push_back({dir + "/" + name, sha256_file(p)});
      }
    }
    if (options.emit_crops) {
      crops[i] = write_crops(sample, out_dir);
      for (const auto& c : crops[i]) {
        files[i].push_back({c.file, sha256_file(out_dir / c.file)});
      }
    }
  });

  Manifest manifest{config, n, {}};
  for (auto& f : files) {
    manifest.files.insert(manifest.files.end(), f.begin(), f.end());
  }
  if (options.emit_crops) {
    std::string csv = "file,bbox_a,bbox_b,label\n";
    for (const auto& per_sample : crops) {
      for (const auto& c : per_sample) {
        csv += c.file + "," + c.bbox_a + "," + c.bbox_b + "," + c.label + "\n";
      }
    }
    write_file_atomic(out_dir / "crops" / "labels.csv", csv);
    manifest.files.push_back({"crops/labels.csv", sha256_hex(csv)});
  }
  std::sort(manifest.files.begin(), manifest.files.end(),
            [](const ManifestFile& a, const ManifestFile& b) { return a.path < b.path; });
  write_file_atomic(out_dir / "manifest.json", serialize_manifest(manifest));
  return manifest;
}

std::vector<fs::path> list_sample_dirs(const fs::path& root) {
  if (!fs::is_directory(root)) {
    throw DataError("'" + root.string() + "' is not a directory");
  }
  std::vector<std::pair<std::uint64_t, fs::path>> found;
  for (const auto& entry : fs::directory_iterator(root)) {
    const std::string name = entry.path().filename().string();
    if (!entry.is_directory() || name.rfind("sample_", 0) != 0) continue;
    const std::string digits = name.substr(7);
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit)) continue;
    found.emplace_back(std::stoull(digits), entry.path());
  }
  std::sort(found.begin(), found.end());
  std::vector<fs::path> out;
  for (auto& f : found) out.push_back(std::move(f.second));
  return out;
}

}  // namespace scenediff
