#include "scenediff/simulator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>

#include "scenediff/errors.hpp"
#include "scenediff/render.hpp"

namespace scenediff {

namespace {

constexpr int kMaxAttempts = 400;
constexpr int kMaxPlacementTries = 200;
// ON placements keep containment inside [0.3, 0.9) with a margin.
constexpr double kOnContainmentMin = 0.32;
constexpr double kOnContainmentMax = 0.88;
// Placement IoU guaranteed under detectability (contract is > 0.4).
constexpr double kDetectablePlacementIou = 0.42;
// A trapped target travels at least this much farther than the picked object.
constexpr double kTrapMargin = 10.0;

struct ClassSpec {
  const char* name;
  ClassShape shape;
  IntRange width;
  IntRange height;
  bool rotatable;
};

// Nominal top-down footprints at 640x480.
constexpr std::array<ClassSpec, 11> kClassSpecs = {{
    {"bottle", ClassShape::Rectangle, {30, 45}, {80, 120}, true},
    {"pan", ClassShape::Ellipse, {120, 170}, {120, 170}, false},
    {"plate", ClassShape::Ellipse, {100, 140}, {100, 140}, false},
    {"pot", ClassShape::Ellipse, {110, 150}, {110, 150}, false},
    {"spoon", ClassShape::Bar, {14, 22}, {70, 100}, true},
    {"whisk", ClassShape::Bar, {24, 34}, {90, 120}, true},
    {"knife", ClassShape::Bar, {12, 20}, {90, 130}, true},
    {"bowl", ClassShape::Ellipse, {80, 120}, {80, 120}, false},
    {"cup", ClassShape::Ellipse, {50, 75}, {50, 75}, false},
    {"cutting_board", ClassShape::Rectangle, {160, 220}, {110, 160}, true},
    {"fork", ClassShape::Bar, {14, 22}, {80, 110}, true},
}};

const ClassSpec& spec_for(const std::string& name) {
  for (const auto& s : kClassSpecs) {
    if (name == s.name) {
      return s;
    }
  }
  throw DataError("no simulator footprint for class '" + name + "'");
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

using Rng = std::mt19937_64;

int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

bool coin(Rng& rng, double p) { return uniform(rng, 0.0, 1.0) < p; }

BoundingBox box_at(int x, int y, int w, int h) { return {double(x), double(y), double(x + w), double(y + h)}; }

BoundingBox grown(const BoundingBox& b, double gap) {
  return {b.x_min() - gap, b.y_min() - gap, b.x_max() + gap, b.y_max() + gap};
}

bool clear_of(const BoundingBox& b, const std::vector<BoundingBox>& others, double gap) {
  return std::all_of(others.begin(), others.end(), [&](const BoundingBox& o) {
    return intersection_area(b, grown(o, gap)) == 0.0;
  });
}

bool in_frame(const BoundingBox& b, int width, int height) {
  return b.x_min() >= 1 && b.y_min() >= 1 && b.x_max() <= width - 1 && b.y_max() <= height - 1;
}

std::optional<BoundingBox> free_spot(Rng& rng, int w, int h, const std::vector<BoundingBox>& others,
                                     double gap, int width, int height) {
  if (w + 2 > width || h + 2 > height) {
    return std::nullopt;
  }
  for (int t = 0; t < kMaxPlacementTries; ++t) {
    const BoundingBox b = box_at(uniform_int(rng, 1, width - 1 - w), uniform_int(rng, 1, height - 1 - h), w, h);
    if (clear_of(b, others, gap)) {
      return b;
    }
  }
  return std::nullopt;
}

// Strictly inside `target`, at least one pixel from each edge.
std::optional<BoundingBox> place_inside(Rng& rng, int w, int h, const BoundingBox& target) {
  const int x_lo = static_cast<int>(target.x_min()) + 1;
  const int y_lo = static_cast<int>(target.y_min()) + 1;
  const int x_hi = static_cast<int>(target.x_max()) - 1 - w;
  const int y_hi = static_cast<int>(target.y_max()) - 1 - h;
  if (x_hi < x_lo || y_hi < y_lo) {
    return std::nullopt;
  }
  return box_at(uniform_int(rng, x_lo, x_hi), uniform_int(rng, y_lo, y_hi), w, h);
}

// Partial overlap with containment of the placed box in [0.32, 0.88].
std::optional<BoundingBox> place_on(Rng& rng, int w, int h, const BoundingBox& target,
                                    bool detectable, int width, int height) {
  const Point c = center(target);
  for (int t = 0; t < kMaxPlacementTries; ++t) {
    const double cx = c.x + uniform(rng, -1.0, 1.0) * (target.width() + w) / 2.0;
    const double cy = c.y + uniform(rng, -1.0, 1.0) * (target.height() + h) / 2.0;
    const BoundingBox b = box_at(static_cast<int>(std::lround(cx - w / 2.0)),
                                 static_cast<int>(std::lround(cy - h / 2.0)), w, h);
    if (!in_frame(b, width, height)) {
      continue;
    }
    const double f = containment(b, target);
    if (f < kOnContainmentMin || f > kOnContainmentMax) {
      continue;
    }
    if (detectable && !(iou(b, target) > kDetectablePlacementIou)) {
      continue;
    }
    return b;
  }
  return std::nullopt;
}

struct Straddle {
  BoundingBox initial;
  BoundingBox final;
};

// "On" placement across one edge of `target`, reached by a short slide from
// a disjoint start position.
std::optional<Straddle> place_straddling(Rng& rng, int w, int h, const BoundingBox& target,
                                         double min_gap, double max_shift, int width, int height) {
  for (int t = 0; t < kMaxPlacementTries; ++t) {
    const int side = uniform_int(rng, 0, 3);  // 0 left, 1 right, 2 top, 3 bottom
    const bool horizontal = side < 2;
    const int along = horizontal ? w : h;
    const int across = horizontal ? h : w;
    const double target_across = horizontal ? target.height() : target.width();
    if (across + 2 > target_across) {
      continue;
    }
    const double f = uniform(rng, 0.35, 0.85);
    const int depth = static_cast<int>(std::lround(f * along));
    const int gap = static_cast<int>(std::ceil(min_gap)) + uniform_int(rng, 0, 4);
    if (depth + gap >= max_shift) {
      continue;
    }
    const int lo = static_cast<int>(horizontal ? target.y_min() : target.x_min()) + 1;
    const int hi = static_cast<int>(horizontal ? target.y_max() : target.x_max()) - 1 - across;
    if (hi < lo) {
      continue;
    }
    const int offset = uniform_int(rng, lo, hi);
    BoundingBox fin;
    double dx = 0.0, dy = 0.0;
    switch (side) {
      case 0:
        fin = box_at(static_cast<int>(target.x_min()) - (w - depth), offset, w, h);
        dx = -(depth + gap);
        break;
      case 1:
        fin = box_at(static_cast<int>(target.x_max()) - depth, offset, w, h);
        dx = depth + gap;
        break;
      case 2:
        fin = box_at(offset, static_cast<int>(target.y_min()) - (h - depth), w, h);
        dy = -(depth + gap);
        break;
      default:
        fin = box_at(offset, static_cast<int>(target.y_max()) - depth, w, h);
        dy = depth + gap;
        break;
    }
    const BoundingBox init = fin.translated(dx, dy);
    const double f_actual = containment(fin, target);
    if (f_actual < kOnContainmentMin || f_actual > kOnContainmentMax) {
      continue;
    }
    if (!in_frame(fin, width, height) || !in_frame(init, width, height)) {
      continue;
    }
    return Straddle{init, fin};
  }
  return std::nullopt;
}

struct TaskPlan {
  TaskKind kind = TaskKind::On;
  TaskKind initial_kind = TaskKind::On;  // relation a removed object starts in
  bool trap = false;
  bool sub_threshold = false;
};

struct SimObject {
  std::string cls;
  int w = 0;
  int h = 0;
  int task = -1;
  bool picked = false;
  std::optional<BoundingBox> initial;
  std::optional<BoundingBox> final;
};

RelationLabel label_for(const std::string& picked, const std::string& target, TaskKind kind) {
  const bool picked_first = picked < target;
  if (kind == TaskKind::In) {
    return picked_first ? RelationLabel::AInB : RelationLabel::BInA;
  }
  return picked_first ? RelationLabel::AOnB : RelationLabel::BOnA;
}

// Picked-object footprint for a placement of `kind` onto a target of size
// (tw, th). Under detectability the picked box is scaled from the target so
// that the final IoU clears the contract; otherwise it keeps its nominal
// size, shrunk only when it must fit inside.
void size_picked(Rng& rng, SimObject& picked, const SimObject& target, TaskKind kind,
                 bool detectable) {
  if (detectable) {
    const double s = kind == TaskKind::In ? std::sqrt(uniform(rng, 0.45, 0.8)) : uniform(rng, 0.8, 0.95);
    picked.w = std::max(4, static_cast<int>(std::lround(target.w * s)));
    picked.h = std::max(4, static_cast<int>(std::lround(target.h * s)));
    if (kind == TaskKind::In) {
      picked.w = std::min(picked.w, target.w - 3);
      picked.h = std::min(picked.h, target.h - 3);
    }
    return;
  }
  if (kind != TaskKind::In) {
    return;
  }
  if ((picked.w > picked.h) != (target.w > target.h)) {
    std::swap(picked.w, picked.h);
  }
  const double s = std::min({1.0, (target.w - 4.0) / picked.w, (target.h - 4.0) / picked.h});
  picked.w = std::max(2, static_cast<int>(std::floor(picked.w * s)));
  picked.h = std::max(2, static_cast<int>(std::floor(picked.h * s)));
}

struct Layout {
  std::vector<SimObject> objects;
  std::vector<std::pair<int, int>> tasks;  // (picked, target) object indices
};

std::optional<Layout> try_layout(Rng& rng, const SimConfig& cfg, int n, const std::vector<TaskPlan>& plans) {
  const int k = static_cast<int>(plans.size());
  const int W = cfg.image_width;
  const int H = cfg.image_height;
  const double diag = std::hypot(double(W), double(H));
  const double threshold = cfg.movement_threshold_frac * diag;
  const double initial_gap = 2.0 * cfg.jitter_px + 3.0;
  const double final_gap = 3.0;

  // Task participants carry distinct classes that appear nowhere else, so
  // matching cannot confuse them.
  std::vector<std::string> names = default_class_names();
  std::shuffle(names.begin(), names.end(), rng);
  Layout layout;
  auto& objs = layout.objects;
  for (int i = 0; i < n; ++i) {
    SimObject o;
    o.cls = i < 2 * k ? names[static_cast<std::size_t>(i)]
                      : names[static_cast<std::size_t>(uniform_int(rng, 2 * k, static_cast<int>(names.size()) - 1))];
    const ClassSpec& spec = spec_for(o.cls);
    o.w = uniform_int(rng, spec.width.min, spec.width.max);
    o.h = uniform_int(rng, spec.height.min, spec.height.max);
    if (spec.rotatable && coin(rng, 0.5)) {
      std::swap(o.w, o.h);
    }
    objs.push_back(o);
  }
  for (int t = 0; t < k; ++t) {
    int p = 2 * t, q = 2 * t + 1;
    if (objs[p].w * objs[p].h > objs[q].w * objs[q].h) {
      std::swap(p, q);
    }
    objs[p].picked = true;
    objs[p].task = objs[q].task = t;
    const TaskKind sizing = plans[t].kind == TaskKind::Removed ? plans[t].initial_kind : plans[t].kind;
    size_picked(rng, objs[p], objs[q], sizing, cfg.detectability);
    layout.tasks.emplace_back(p, q);
  }

  // Initial scene: removed pairs start related and are placed as one unit;
  // sub-threshold picked objects are positioned later, next to their target.
  std::vector<BoundingBox> initial_boxes;
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return objs[a].w * objs[a].h > objs[b].w * objs[b].h;
  });
  for (const int i : order) {
    SimObject& o = objs[i];
    if (o.picked) {
      continue;  // placed with its target
    }
    if (o.task >= 0 && plans[o.task].kind == TaskKind::Removed) {
      SimObject& p = objs[layout.tasks[o.task].first];
      bool ok = false;
      for (int t = 0; t < 50 && !ok; ++t) {
        auto tb = free_spot(rng, o.w, o.h, initial_boxes, initial_gap, W, H);
        if (!tb) return std::nullopt;
        auto pb = plans[o.task].initial_kind == TaskKind::In
                      ? place_inside(rng, p.w, p.h, *tb)
                      : place_on(rng, p.w, p.h, *tb, false, W, H);
        if (!pb || !clear_of(*pb, initial_boxes, initial_gap)) {
          continue;
        }
        o.initial = *tb;
        p.initial = *pb;
        ok = true;
      }
      if (!ok) return std::nullopt;
      initial_boxes.push_back(*o.initial);
      initial_boxes.push_back(*p.initial);
      continue;
    }
    auto b = free_spot(rng, o.w, o.h, initial_boxes, initial_gap, W, H);
    if (!b) return std::nullopt;
    o.initial = *b;
    initial_boxes.push_back(*b);
  }
  for (int t = 0; t < k; ++t) {
    SimObject& p = objs[layout.tasks[t].first];
    if (p.initial || plans[t].sub_threshold) {
      continue;
    }
    auto b = free_spot(rng, p.w, p.h, initial_boxes, initial_gap, W, H);
    if (!b) return std::nullopt;
    p.initial = *b;
    initial_boxes.push_back(*b);
  }

  // Final scene: everything not moved by a task is jittered in place.
  std::vector<BoundingBox> final_boxes;
  const int j = static_cast<int>(std::floor(cfg.jitter_px));
  for (auto& o : objs) {
    const bool relocated = o.picked || (o.task >= 0 && plans[o.task].trap);
    if (relocated) {
      continue;
    }
    int dx = 0, dy = 0;
    do {
      dx = uniform_int(rng, -j, j);
      dy = uniform_int(rng, -j, j);
    } while (dx * dx + dy * dy > cfg.jitter_px * cfg.jitter_px);
    BoundingBox b = o.initial->translated(dx, dy);
    if (!in_frame(b, W, H)) {
      b = *o.initial;
    }
    o.final = b;
    final_boxes.push_back(b);
  }

  for (int t = 0; t < k; ++t) {
    const TaskPlan& plan = plans[t];
    SimObject& p = objs[layout.tasks[t].first];
    SimObject& q = objs[layout.tasks[t].second];
    bool ok = false;
    for (int attempt = 0; attempt < kMaxPlacementTries && !ok; ++attempt) {
      BoundingBox target_final = q.final.value_or(BoundingBox{});
      if (plan.trap) {
        auto spot = free_spot(rng, q.w, q.h, final_boxes, final_gap, W, H);
        if (!spot) break;
        target_final = *spot;
      }
      std::optional<BoundingBox> picked_initial = p.initial;
      std::optional<BoundingBox> picked_final;
      switch (plan.kind) {
        case TaskKind::In:
          picked_final = place_inside(rng, p.w, p.h, target_final);
          break;
        case TaskKind::On:
          if (plan.sub_threshold) {
            auto s = place_straddling(rng, p.w, p.h, target_final, cfg.jitter_px + 2.0,
                                      threshold - 1.0, W, H);
            if (s) {
              picked_initial = s->initial;
              picked_final = s->final;
            }
          } else {
            picked_final = place_on(rng, p.w, p.h, target_final, cfg.detectability, W, H);
          }
          break;
        case TaskKind::Removed:
          picked_final = free_spot(rng, p.w, p.h, final_boxes, final_gap, W, H);
          break;
      }
      if (!picked_final || !picked_initial) {
        continue;
      }
      // Only the intended partner may touch the placed object.
      std::vector<BoundingBox> others = final_boxes;
      if (plan.kind != TaskKind::Removed && !plan.trap) {
        const auto it = std::find(others.begin(), others.end(), target_final);
        if (it != others.end()) others.erase(it);
      }
      if (!clear_of(*picked_final, others, final_gap)) {
        continue;
      }
      if (cfg.detectability && plan.kind != TaskKind::Removed &&
          !(iou(*picked_final, target_final) > kDetectablePlacementIou)) {
        continue;
      }
      if (plan.sub_threshold && !clear_of(*picked_initial, initial_boxes, 2.0)) {
        continue;
      }
      const double moved = displacement(*picked_initial, *picked_final);
      if (cfg.detectability && !(moved > 2.0 * threshold + 1.0)) {
        continue;
      }
      if (plan.trap && !(displacement(*q.initial, target_final) > moved + kTrapMargin)) {
        continue;
      }
      if (plan.sub_threshold && !(moved < threshold)) {
        continue;
      }
      p.initial = picked_initial;
      p.final = picked_final;
      if (plan.trap) {
        q.final = target_final;
        final_boxes.push_back(target_final);
      }
      if (plan.sub_threshold) {
        initial_boxes.push_back(*picked_initial);
      }
      final_boxes.push_back(*picked_final);
      ok = true;
    }
    if (!ok) return std::nullopt;
  }
  return layout;
}

// Throws GenerationError if the geometry does not support the stored truth.
void verify_relations(const Scene& scene, const std::vector<LabeledPair>& relations) {
  std::map<std::pair<std::string, std::string>, RelationLabel> listed;
  for (const auto& r : relations) {
    listed.emplace(std::make_pair(r.a, r.b), r.label);
    const BoundingBox& a = scene.find(r.a)->bbox;
    const BoundingBox& b = scene.find(r.b)->bbox;
    const bool a_subject = r.label == RelationLabel::AInB || r.label == RelationLabel::AOnB;
    const BoundingBox& subject = a_subject ? a : b;
    const BoundingBox& object = a_subject ? b : a;
    if (r.label == RelationLabel::AInB || r.label == RelationLabel::BInA) {
      if (!object.strictly_contains(subject)) {
        throw GenerationError("IN relation without strict containment");
      }
    } else {
      const double f = containment(subject, object);
      if (f < 0.2 || f >= 0.9) {
        throw GenerationError("ON relation with containment outside [0.2, 0.9)");
      }
    }
  }
  const auto& d = scene.detections;
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t k = i + 1; k < d.size(); ++k) {
      const auto key = d[i].id < d[k].id ? std::make_pair(d[i].id, d[k].id) : std::make_pair(d[k].id, d[i].id);
      if (!listed.contains(key) && iou(d[i].bbox, d[k].bbox) > 0.0) {
        throw GenerationError("unlisted pair overlaps: " + key.first + ", " + key.second);
      }
    }
  }
}

}  // namespace

void SimConfig::validate() const {
  if (image_width < 64 || image_height < 64) {
    throw std::invalid_argument("simulator image must be at least 64x64");
  }
  if (n_objects.min < 0 || n_objects.min > n_objects.max) {
    throw std::invalid_argument("n_objects range is invalid");
  }
  if (n_tasks.min < 0 || n_tasks.min > n_tasks.max) {
    throw std::invalid_argument("n_tasks range is invalid");
  }
  if (2 * n_tasks.max > static_cast<int>(default_class_names().size()) - 1) {
    throw std::invalid_argument("n_tasks.max too large: task participants need distinct classes");
  }
  if (kind_mix.in < 0 || kind_mix.on < 0 || kind_mix.removed < 0 ||
      std::abs(kind_mix.in + kind_mix.on + kind_mix.removed - 1.0) > 1e-9) {
    throw std::invalid_argument("kind_mix probabilities must be non-negative and sum to 1");
  }
  if (jitter_px < 0.0) {
    throw std::invalid_argument("jitter_px must be non-negative");
  }
  if (!(movement_threshold_frac > 0.0 && movement_threshold_frac < 1.0)) {
    throw std::invalid_argument("movement_threshold_frac must lie in (0,1)");
  }
  if (direction_trap_prob < 0.0 || direction_trap_prob > 1.0 || sub_threshold_prob < 0.0 ||
      sub_threshold_prob > 1.0) {
    throw std::invalid_argument("adversarial probabilities must lie in [0,1]");
  }
  if (detectability) {
    const double threshold = movement_threshold_frac * std::hypot(double(image_width), double(image_height));
    if (!(jitter_px < threshold)) {
      throw std::invalid_argument("detectability requires jitter_px below the movement threshold");
    }
    if (direction_trap_prob > 0.0 || sub_threshold_prob > 0.0) {
      throw std::invalid_argument("adversarial cases cannot be generated under detectability");
    }
  }
}

ClassShape shape_of(const std::string& class_name) {
  for (const auto& s : kClassSpecs) {
    if (class_name == s.name) {
      return s.shape;
    }
  }
  return ClassShape::Rectangle;
}

ScenePairSample generate_scene_pair(const SimConfig& config, std::uint64_t index, bool render) {
  config.validate();
  Rng rng(splitmix64(config.seed ^ splitmix64(index)));

  // The plan (counts and task kinds) is drawn once, so layout retries do not
  // bias the kind frequencies.
  const int n = uniform_int(rng, config.n_objects.min, config.n_objects.max);
  const int k = std::min(uniform_int(rng, config.n_tasks.min, config.n_tasks.max), n / 2);
  std::vector<TaskPlan> plans(static_cast<std::size_t>(k));
  for (auto& plan : plans) {
    const double u = uniform(rng, 0.0, 1.0);
    plan.kind = u < config.kind_mix.in                           ? TaskKind::In
                : u < config.kind_mix.in + config.kind_mix.on    ? TaskKind::On
                : config.kind_mix.removed > 0.0                  ? TaskKind::Removed
                                                                 : TaskKind::On;
    plan.initial_kind = coin(rng, 0.5) ? TaskKind::In : TaskKind::On;
    plan.trap = plan.kind != TaskKind::Removed && coin(rng, config.direction_trap_prob);
    plan.sub_threshold = plan.kind == TaskKind::On && !plan.trap && coin(rng, config.sub_threshold_prob);
  }

  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    auto layout = try_layout(rng, config, n, plans);
    if (!layout) {
      continue;
    }
    auto& objs = layout->objects;
    std::vector<int> order(objs.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    ScenePairSample sample;
    sample.index = index;
    for (Scene* s : {&sample.pair.initial, &sample.pair.final}) {
      s->image_width = config.image_width;
      s->image_height = config.image_height;
    }
    std::vector<std::string> ids(objs.size());
    std::map<std::string, int> per_class;
    for (const int i : order) {
      ids[i] = objs[i].cls + "-" + std::to_string(per_class[objs[i].cls]++);
      const auto conf = [&] { return std::round(uniform(rng, 0.70, 0.99) * 100.0) / 100.0; };
      sample.pair.initial.detections.push_back({ids[i], {objs[i].cls}, conf(), *objs[i].initial});
      sample.pair.final.detections.push_back({ids[i], {objs[i].cls}, conf(), *objs[i].final});
    }
    for (std::size_t t = 0; t < layout->tasks.size(); ++t) {
      const auto [p, q] = layout->tasks[t];
      const TaskPlan& plan = plans[t];
      sample.truth_tasks.push_back({ids[p], ids[q], plan.kind, TaskMethod::Truth});
      const auto pair = PairCandidate::canonical(ids[p], ids[q]);
      if (plan.kind == TaskKind::Removed) {
        sample.initial_relations.push_back({pair.a_id, pair.b_id, label_for(ids[p], ids[q], plan.initial_kind)});
      } else {
        sample.final_relations.push_back({pair.a_id, pair.b_id, label_for(ids[p], ids[q], plan.kind)});
      }
      if (plan.trap) {
        sample.relocated_targets.push_back(ids[q]);
      }
    }
    sort_tasks(sample.truth_tasks);
    const auto by_ids = [](const LabeledPair& x, const LabeledPair& y) {
      return std::tie(x.a, x.b) < std::tie(y.a, y.b);
    };
    std::sort(sample.initial_relations.begin(), sample.initial_relations.end(), by_ids);
    std::sort(sample.final_relations.begin(), sample.final_relations.end(), by_ids);
    std::sort(sample.relocated_targets.begin(), sample.relocated_targets.end());
    try {
      verify_relations(sample.pair.initial, sample.initial_relations);
      verify_relations(sample.pair.final, sample.final_relations);
    } catch (const GenerationError&) {
      continue;
    }
    if (render) {
      sample.images = SceneImages{render_scene(sample.pair.initial), render_scene(sample.pair.final)};
    }
    return sample;
  }
  throw GenerationError("could not lay out sample " + std::to_string(index) + " with " +
                        std::to_string(n) + " objects after " + std::to_string(kMaxAttempts) +
                        " attempts; try fewer objects or tasks");
}

OracleClassifier::OracleClassifier(std::vector<LabeledPair> initial_relations,
                                   std::vector<LabeledPair> final_relations,
                                   std::set<std::string> initial_ids,
                                   std::set<std::string> final_ids)
    : initial_ids_(std::move(initial_ids)), final_ids_(std::move(final_ids)) {
  for (const auto& r : initial_relations) {
    initial_[{r.a, r.b}] = r.label;
  }
  for (const auto& r : final_relations) {
    final_[{r.a, r.b}] = r.label;
  }
}

RelationLabel OracleClassifier::lookup(SceneSide side, const std::string& a,
                                       const std::string& b) const {
  const auto& ids = side == SceneSide::Initial ? initial_ids_ : final_ids_;
  for (const auto* id : {&a, &b}) {
    if (!ids.contains(*id)) {
      throw DataError("oracle has no detection '" + *id + "' in the " +
                      std::string(to_string(side)) + " scene");
    }
  }
  const auto& table = side == SceneSide::Initial ? initial_ : final_;
  if (const auto it = table.find({a, b}); it != table.end()) {
    return it->second;
  }
  if (const auto it = table.find({b, a}); it != table.end()) {
    return swapped(it->second);
  }
  return RelationLabel::Unrelated;
}

std::vector<RelationResult> OracleClassifier::classify(std::span<const RelationQuery> queries) {
  std::vector<RelationResult> out;
  out.reserve(queries.size());
  for (const auto& q : queries) {
    out.push_back({lookup(q.side, q.a->id, q.b->id), std::nullopt});
  }
  return out;
}

OracleClassifier oracle_classifier(const ScenePairSample& sample) {
  std::set<std::string> initial_ids, final_ids;
  for (const auto& d : sample.pair.initial.detections) initial_ids.insert(d.id);
  for (const auto& d : sample.pair.final.detections) final_ids.insert(d.id);
  return OracleClassifier(sample.initial_relations, sample.final_relations, std::move(initial_ids),
                          std::move(final_ids));
}

}  // namespace scenediff
