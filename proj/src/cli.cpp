#include "scenediff/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>

#include <opencv2/imgcodecs.hpp>

#include "CLI11.hpp"
#include "json.hpp"
#include "scenediff/dataset.hpp"
#include "scenediff/errors.hpp"
#include "scenediff/evaluation.hpp"
#include "scenediff/fs_util.hpp"
#include "scenediff/geometric.hpp"
#include "scenediff/parallel.hpp"
#include "scenediff/plugin.hpp"
#include "scenediff/render.hpp"
#include "scenediff/scene_io.hpp"
#include "scenediff/simulator.hpp"
#include "scenediff/transition.hpp"

namespace scenediff {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SceneInputFlags {
  std::string format = "json";
  std::string classes;
  int image_width = 0;
  int image_height = 0;
};

Scene read_scene(const fs::path& path, const SceneInputFlags& flags) {
  DetectorTxtOptions opts;
  if (!flags.classes.empty()) {
    opts.class_names = read_class_names(flags.classes);
  }
  if (flags.format == "json") {
    return load_scene(path, SceneFormat::SceneJson, opts);
  }
  if (flags.image_width <= 0 || flags.image_height <= 0) {
    throw UsageError("--format txt needs --image-width and --image-height");
  }
  opts.image_width = flags.image_width;
  opts.image_height = flags.image_height;
  return load_scene(path, SceneFormat::DetectorTxt, opts);
}

cv::Mat read_image(const fs::path& path) {
  cv::Mat image = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (image.empty()) {
    throw DataError("cannot read image '" + path.string() + "'");
  }
  return image;
}

// Image named on the command line, else the scene's own image path
// (relative to the scene file).
std::optional<fs::path> image_for(const Scene& scene, const fs::path& scene_file,
                                  const std::vector<std::string>& flag, std::size_t i) {
  if (!flag.empty()) {
    return fs::path(flag[i]);
  }
  if (scene.image_path) {
    const fs::path p(*scene.image_path);
    return p.is_absolute() ? p : scene_file.parent_path() / p;
  }
  return std::nullopt;
}

json match_json(const MatchResult& m) {
  json matches = json::array();
  for (const auto& x : m.matches) {
    matches.push_back({{"initial", x.initial_id}, {"final", x.final_id}, {"displacement_px", x.displacement_px}});
  }
  return {{"matches", matches}, {"appeared", m.appeared}, {"disappeared", m.disappeared}};
}

std::vector<LabeledPair> related(const std::vector<PairTransition>& transitions, bool initial) {
  std::vector<LabeledPair> out;
  for (const auto& t : transitions) {
    const RelationLabel l = initial ? t.initial_rel : t.final_rel;
    if (l != RelationLabel::Unrelated) {
      out.push_back({t.pair.a_id, t.pair.b_id, l});
    }
  }
  return out;
}

struct InferFlags {
  std::string method;
  std::string initial;
  std::string final;
  std::vector<std::string> images;
  std::string classifier = "heuristic";
  std::string plugin_cmd;
  std::string truth;
  std::string config;
  std::string out;
  bool debug = false;
  SceneInputFlags scene;
};

void run_infer(const InferFlags& f) {
  EngineConfig config;
  if (!f.config.empty()) {
    config = load_engine_config(f.config);
  }
  ScenePair pair{read_scene(f.initial, f.scene), read_scene(f.final, f.scene)};
  validate_pair(pair);

  TaskDocument doc;
  json debug;
  if (f.method == "geometric") {
    GeometricDiagnostics diag;
    doc.tasks = infer_tasks_geometric(pair, config.geo, &diag);
    json overlaps = json::array();
    for (const auto& o : diag.overlaps) {
      overlaps.push_back({{"a", o.a}, {"b", o.b}, {"final_iou", o.final_iou}});
    }
    json moved = json::array();
    for (const auto& m : diag.moved) moved.push_back(m.initial_id);
    debug = {{"method", "geometric"}, {"match", match_json(diag.match)}, {"threshold_px", diag.threshold_px},
             {"moved", moved}, {"overlaps", overlaps}};
  } else {
    std::unique_ptr<RelationClassifier> classifier;
    if (f.classifier == "heuristic") {
      classifier = std::make_unique<HeuristicClassifier>(config.heuristic);
    } else if (f.classifier == "oracle") {
      if (f.truth.empty()) {
        throw UsageError("--classifier oracle needs --truth with ground-truth relations");
      }
      const TaskDocument truth = load_task_document(f.truth);
      if (!truth.initial_relations || !truth.final_relations) {
        throw DataError("'" + f.truth + "' carries no ground-truth relations");
      }
      std::set<std::string> initial_ids, final_ids;
      for (const auto& d : pair.initial.detections) initial_ids.insert(d.id);
      for (const auto& d : pair.final.detections) final_ids.insert(d.id);
      classifier = std::make_unique<OracleClassifier>(*truth.initial_relations, *truth.final_relations,
                                                      std::move(initial_ids), std::move(final_ids));
    } else {
      if (f.plugin_cmd.empty()) {
        throw UsageError("--classifier plugin needs --plugin-cmd");
      }
      classifier = std::make_unique<PluginClassifier>(PluginOptions{f.plugin_cmd});
    }

    SceneImages images;
    if (const auto p = image_for(pair.initial, f.initial, f.images, 0)) images.initial = read_image(*p);
    if (const auto p = image_for(pair.final, f.final, f.images, 1)) images.final = read_image(*p);

    TransitionDiagnostics diag;
    doc.tasks = infer_tasks_transition(pair, &images, *classifier, config.geo, &diag);
    doc.initial_relations = related(diag.transitions, true);
    doc.final_relations = related(diag.transitions, false);
    json transitions = json::array();
    for (const auto& t : diag.transitions) {
      transitions.push_back({{"a", t.pair.a_id}, {"b", t.pair.b_id},
                             {"initial", std::string(to_string(t.initial_rel))},
                             {"final", std::string(to_string(t.final_rel))}});
    }
    json skipped = json::array();
    for (const auto& s : diag.skipped) {
      skipped.push_back({{"a", s.pair.a_id}, {"b", s.pair.b_id},
                         {"scene", std::string(to_string(s.side))}, {"reason", s.reason}});
    }
    debug = {{"method", "transition"}, {"classifier", f.classifier}, {"match", match_json(diag.match)},
             {"transitions", transitions}, {"skipped", skipped}};
  }
  write_file_atomic(f.out, serialize_task_document(doc));
  if (f.debug) {
    write_file_atomic(f.out + ".debug.json", debug.dump(2) + "\n");
  }
}

void run_simulate(std::uint64_t n, std::uint64_t seed, const std::string& out, bool render,
                  bool emit_crops, const std::string& config_path, int jobs) {
  SimConfig config;
  if (!config_path.empty()) {
    config = load_engine_config(config_path).sim;
  }
  config.seed = seed;
  generate_dataset(config, n, out, {render, emit_crops, jobs});
}

void run_evaluate(const std::string& pred, const std::string& truth, const std::string& report,
                  const std::string& config_path, int jobs) {
  EngineConfig config;
  if (!config_path.empty()) {
    config = load_engine_config(config_path);
  }
  const auto dirs = list_sample_dirs(truth);
  if (dirs.empty()) {
    throw DataError("no sample_<k> directories under '" + truth + "'");
  }
  std::vector<SampleEvaluation> samples(dirs.size());
  parallel_for(dirs.size(), jobs, [&](std::size_t i) {
    const fs::path& dir = dirs[i];
    const std::string name = dir.filename().string();
    const fs::path pred_file = fs::path(pred) / (name + ".json");
    if (!fs::exists(pred_file)) {
      throw DataError("missing prediction '" + pred_file.string() + "'");
    }
    ScenePair pair{load_scene(dir / "initial.json", SceneFormat::SceneJson),
                   load_scene(dir / "final.json", SceneFormat::SceneJson)};
    samples[i] = evaluate_sample(name, pair, load_task_document(pred_file),
                                 load_task_document(dir / "truth.json"), config.geo);
  });
  const EvaluationReport r = merge_evaluations(samples);
  write_file_atomic(report, serialize_report(r, samples));
}

void run_overlay(const std::string& scene_file, const std::string& image_file,
                 const std::vector<std::string>& task_files, const std::string& out) {
  const Scene scene = load_scene(scene_file, SceneFormat::SceneJson);
  const cv::Mat image = read_image(image_file);
  std::vector<PickPlaceTask> tasks;
  for (const auto& t : task_files) {
    const auto doc = load_task_document(t);
    tasks.insert(tasks.end(), doc.tasks.begin(), doc.tasks.end());
  }
  write_png_atomic(out, draw_overlay(image, scene, tasks));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Infer pick-and-place tasks from before/after object detections", "scenediff"};
  app.require_subcommand(1);

  std::uint64_t n = 0, seed = 0;
  std::string sim_out, sim_config;
  bool render = false, emit_crops = false;
  int jobs = 1;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset with ground truth");
  simulate->add_option("--n", n, "Number of scene pairs")->required();
  simulate->add_option("--seed", seed, "Random seed")->required();
  simulate->add_option("--out", sim_out, "Output directory")->required();
  simulate->add_flag("--render", render, "Write initial.png and final.png");
  simulate->add_flag("--emit-crops", emit_crops, "Write labelled classifier crops (implies --render)");
  simulate->add_option("--config", sim_config, "JSON config file");
  simulate->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  InferFlags inf;
  auto* infer = app.add_subcommand("infer", "Infer tasks for one scene pair");
  infer->add_option("--method", inf.method)->required()->check(CLI::IsMember({"geometric", "transition"}));
  infer->add_option("--initial", inf.initial, "Initial scene file")->required();
  infer->add_option("--final", inf.final, "Final scene file")->required();
  infer->add_option("--images", inf.images, "Initial and final images")->expected(2);
  infer->add_option("--classifier", inf.classifier)->check(CLI::IsMember({"heuristic", "oracle", "plugin"}));
  infer->add_option("--plugin-cmd", inf.plugin_cmd, "Plugin command line");
  infer->add_option("--truth", inf.truth, "truth.json with relations, for the oracle");
  infer->add_option("--config", inf.config, "JSON config file");
  infer->add_flag("--debug", inf.debug, "Also write <out>.debug.json");
  infer->add_option("--format", inf.scene.format, "Scene file format")->check(CLI::IsMember({"json", "txt"}));
  infer->add_option("--classes", inf.scene.classes, "Class names file, one per line");
  infer->add_option("--image-width", inf.scene.image_width, "Image width for txt scenes");
  infer->add_option("--image-height", inf.scene.image_height, "Image height for txt scenes");
  infer->add_option("--out", inf.out, "Output tasks file")->required();

  std::string pred, truth, report, eval_config;
  int eval_jobs = 1;
  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against a simulated dataset");
  evaluate->add_option("--pred", pred, "Directory of sample_<k>.json predictions")->required();
  evaluate->add_option("--truth", truth, "Dataset directory")->required();
  evaluate->add_option("--report", report, "Report file")->required();
  evaluate->add_option("--config", eval_config, "JSON config file");
  evaluate->add_option("--jobs", eval_jobs, "Worker threads")->check(CLI::PositiveNumber);

  std::string ov_scene, ov_image, ov_out;
  std::vector<std::string> ov_tasks;
  auto* overlay = app.add_subcommand("overlay", "Draw boxes and task arrows over an image");
  overlay->add_option("--scene", ov_scene)->required();
  overlay->add_option("--image", ov_image)->required();
  overlay->add_option("--tasks", ov_tasks)->required();
  overlay->add_option("--out", ov_out)->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (simulate->parsed()) {
      run_simulate(n, seed, sim_out, render, emit_crops, sim_config, jobs);
    } else if (infer->parsed()) {
      run_infer(inf);
    } else if (evaluate->parsed()) {
      run_evaluate(pred, truth, report, eval_config, eval_jobs);
    } else {
      run_overlay(ov_scene, ov_image, ov_tasks, ov_out);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const PluginError& e) {
    err << "plugin error: " << e.what() << "\n";
    return kExitPlugin;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace scenediff
