// Acceptance checks: one PASS/FAIL line per criterion; exit status is the
// number of failures.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "scenediff/cli.hpp"
#include "scenediff/dataset.hpp"
#include "scenediff/evaluation.hpp"
#include "scenediff/geometric.hpp"
#include "scenediff/scene_io.hpp"
#include "scenediff/simulator.hpp"
#include "scenediff/transition.hpp"
#include "test_util.hpp"

using namespace scenediff;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int run_quiet(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  if (code != 0) std::fprintf(stderr, "command failed (%d): %s\n", code, err.str().c_str());
  return code;
}

using TaskKey = std::tuple<std::string, std::string, TaskKind>;

std::set<TaskKey> keys(const std::vector<PickPlaceTask>& tasks, bool collapse_kind = false) {
  std::set<TaskKey> out;
  for (const auto& t : tasks) out.emplace(t.picked_id, t.target_id, collapse_kind ? TaskKind::On : t.kind);
  return out;
}

Outcome iou_oracle() {
  std::mt19937 rng(2024);
  std::uniform_int_distribution<int> coord(0, 63);
  struct Case {
    oracle::IntBox a, b;
  };
  std::vector<Case> cases;
  for (int i = 0; i < 10000; ++i) {
    int c[8];
    for (int& v : c) v = coord(rng);
    const auto make = [](int x0, int x1, int y0, int y1) {
      return oracle::IntBox{std::min(x0, x1), std::min(y0, y1), std::max(x0, x1) + 1, std::max(y0, y1) + 1};
    };
    const oracle::IntBox a = make(c[0], c[1], c[2], c[3]), b = make(c[4], c[5], c[6], c[7]);
    // Keep boxes on the 64x64 grid.
    cases.push_back({{a.x1, a.y1, std::min(a.x2, 64), std::min(a.y2, 64)},
                     {b.x1, b.y1, std::min(b.x2, 64), std::min(b.y2, 64)}});
  }
  std::vector<double> expected;
  for (const auto& c : cases) expected.push_back(oracle::pixel_iou(c.a, c.b, 64));

  const auto t0 = Clock::now();
  double worst = 0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& [a, b] = cases[i];
    const double v = iou(BoundingBox(a.x1, a.y1, a.x2, a.y2), BoundingBox(b.x1, b.y1, b.x2, b.y2));
    worst = std::max(worst, std::abs(v - expected[i]));
  }
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << "10000 pairs, max |error| " << worst << ", " << secs << " s";
  return {worst <= 1e-12 && secs < 1.0, d.str()};
}

Outcome transition_identity() {
  ScratchDir dir("acc_identity");
  const auto t0 = Clock::now();
  if (run_quiet({"simulate", "--n", "1000", "--seed", "42", "--out", dir / "d"}) != 0) return {false, "simulate failed"};
  int exact = 0;
  const auto samples = list_sample_dirs(dir.path() / "d");
  for (const auto& s : samples) {
    const fs::path out = dir.path() / "p" / (s.filename().string() + ".json");
    if (run_quiet({"infer", "--method", "transition", "--classifier", "oracle", "--initial",
                   (s / "initial.json").string(), "--final", (s / "final.json").string(), "--truth",
                   (s / "truth.json").string(), "--out", out.string()}) != 0) {
      return {false, "infer failed on " + s.string()};
    }
    exact += keys(load_task_document(out).tasks) == keys(load_task_document(s / "truth.json").tasks);
  }
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << exact << "/" << samples.size() << " task sets identical, " << secs << " s";
  return {samples.size() == 1000 && exact == 1000 && secs < 30.0, d.str()};
}

Outcome geometric_completeness() {
  SimConfig c;
  c.seed = 42;
  c.kind_mix = {0.5, 0.5, 0.0};
  const auto t0 = Clock::now();
  std::size_t truth_pairs = 0, recovered = 0, spurious = 0;
  for (std::uint64_t i = 0; i < 500; ++i) {
    const auto s = generate_scene_pair(c, i);
    const auto want = keys(s.truth_tasks, true);
    const auto got = keys(infer_tasks_geometric(s.pair, {}), true);
    truth_pairs += want.size();
    for (const auto& k : got) (want.contains(k) ? recovered : spurious) += 1;
  }
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << recovered << "/" << truth_pairs << " pairs recovered as ON, " << spurious << " spurious, " << secs << " s";
  return {recovered == truth_pairs && spurious == 0 && secs < 15.0, d.str()};
}

Outcome direction_failure() {
  const auto det = [](const char* id, const char* cls, BoundingBox b) { return Detection{id, {cls}, 0.9, b}; };
  const ScenePair pair{{640, 480, std::nullopt,
                        {det("plate-0", "plate", {105, 100, 165, 160}),
                         det("cutting_board-0", "cutting_board", {90, 160, 190, 220})}},
                       {640, 480, std::nullopt,
                        {det("plate-0", "plate", {110, 100, 170, 160}),
                         det("cutting_board-0", "cutting_board", {90, 100, 190, 160})}}};
  // Ground truth: the plate ends up on the cutting board.
  OracleClassifier oracle({}, {{"cutting_board-0", "plate-0", RelationLabel::BOnA}},
                          {"cutting_board-0", "plate-0"}, {"cutting_board-0", "plate-0"});
  const auto geo = infer_tasks_geometric(pair, {});
  const auto tr = infer_tasks_transition(pair, nullptr, oracle);
  const bool geo_flipped = geo.size() == 1 && geo[0].picked_id == "cutting_board-0" && geo[0].target_id == "plate-0";
  const bool tr_right = tr.size() == 1 && tr[0].picked_id == "plate-0" && tr[0].target_id == "cutting_board-0" &&
                        tr[0].kind == TaskKind::On;
  std::ostringstream d;
  d << "geometric " << (geo.empty() ? "none" : geo[0].picked_id + "->" + geo[0].target_id) << ", transition "
    << (tr.empty() ? "none" : tr[0].picked_id + "->" + tr[0].target_id);
  return {geo_flipped && tr_right, d.str()};
}

Outcome method_gap() {
  SimConfig c;
  c.seed = 42;
  c.detectability = false;
  c.direction_trap_prob = 0.3;
  c.sub_threshold_prob = 0.3;
  std::vector<SampleEvaluation> geo, tr;
  for (std::uint64_t i = 0; i < 300; ++i) {
    const auto s = generate_scene_pair(c, i);
    const TaskDocument truth{s.truth_tasks, s.initial_relations, s.final_relations};
    auto oracle = oracle_classifier(s);
    geo.push_back(evaluate_sample("g", s.pair, {infer_tasks_geometric(s.pair, {}), {}, {}}, truth));
    tr.push_back(evaluate_sample("t", s.pair, {infer_tasks_transition(s.pair, nullptr, oracle), {}, {}}, truth));
  }
  const double g = merge_evaluations(geo).accuracy;
  const double t = merge_evaluations(tr).accuracy;
  std::ostringstream d;
  d << "transition " << t * 100 << "% vs geometric " << g * 100 << "% (gap " << (t - g) * 100 << " pp)";
  return {t - g >= 0.10, d.str()};
}

Outcome table_totality() {
  const PairCandidate pair{"a-0", "b-0"};
  int defined = 0, tasks = 0, consistent = 0;
  for (const auto i : kAllRelationLabels) {
    for (const auto f : kAllRelationLabels) {
      const auto t = transition_task(pair, i, f);
      std::string got;
      if (t) {
        got = std::string(t->picked_id == "a-0" ? "A" : "B") + " " + (t->target_id == "a-0" ? "A" : "B") + " " +
              std::string(to_string(t->kind));
      }
      defined += got == oracle::kTransitionTable[index_of(i)][index_of(f)];
      tasks += t.has_value();
      consistent += transition_task({"b-0", "a-0"}, swapped(i), swapped(f)) == t;
    }
  }
  std::ostringstream d;
  d << defined << "/25 match the reference table, " << tasks << " tasks, " << consistent << "/25 swap-consistent";
  return {defined == 25 && tasks == 20 && consistent == 25, d.str()};
}

Outcome evaluation_arithmetic() {
  // (predicted, truth) pairs; hand-computed confusion [truth][pred] is
  // [[2,1,1],[1,2,0],[0,1,2]].
  const std::pair<int, int> raw[] = {{0, 0}, {0, 0}, {1, 0}, {2, 0}, {1, 1}, {1, 1}, {0, 1}, {2, 2}, {2, 2}, {1, 2}};
  std::vector<PairOutcome> o;
  for (std::size_t k = 0; k < 10; ++k) o.push_back({{"a" + std::to_string(k), "b"}, raw[k].first, raw[k].second});
  const auto r = compute_report(o);
  bool ok = r.confusion == Confusion3{{{2, 1, 1}, {1, 2, 0}, {0, 1, 2}}} && r.accuracy == 0.6 &&
            r.per_class[0].precision == 2.0 / 3.0 && r.per_class[0].recall == 0.5 &&
            r.per_class[1].precision == 0.5 && r.per_class[1].recall == 2.0 / 3.0 &&
            r.per_class[2].precision == 2.0 / 3.0 && r.per_class[2].recall == 2.0 / 3.0;
  std::int64_t grand = 0;
  for (int c = 0; c < 3; ++c) {
    std::int64_t row = 0, col = 0, t = 0, p = 0;
    for (int k = 0; k < 3; ++k) {
      row += r.confusion[c][k];
      col += r.confusion[k][c];
    }
    for (const auto& x : o) {
      t += x.truth == c;
      p += x.predicted == c;
    }
    ok = ok && row == t && col == p;
    grand += row;
  }
  ok = ok && grand == r.n_pairs;
  return {ok, "10-outcome fixture, accuracy " + std::to_string(r.accuracy)};
}

Outcome determinism() {
  ScratchDir dir("acc_determinism");
  std::string reports[2];
  for (int round = 0; round < 2; ++round) {
    const std::string root = dir / ("run" + std::to_string(round));
    if (run_quiet({"simulate", "--n", "20", "--seed", "7", "--out", root + "/d"}) != 0) return {false, "simulate failed"};
    for (const auto& s : list_sample_dirs(root + "/d")) {
      if (run_quiet({"infer", "--method", "transition", "--classifier", "oracle", "--initial",
                     (s / "initial.json").string(), "--final", (s / "final.json").string(), "--truth",
                     (s / "truth.json").string(), "--out", root + "/p/" + s.filename().string() + ".json"}) != 0)
        return {false, "infer failed"};
    }
    if (run_quiet({"evaluate", "--pred", root + "/p", "--truth", root + "/d", "--report", root + "/report.json"}) != 0)
      return {false, "evaluate failed"};
    reports[round] = read_text_file(root + "/report.json");
  }
  const bool same = !reports[0].empty() && reports[0] == reports[1];
  return {same, same ? "reports byte-identical (" + std::to_string(reports[0].size()) + " bytes)" : "reports differ"};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"iou-oracle", iou_oracle},
      {"transition-identity", transition_identity},
      {"geometric-completeness", geometric_completeness},
      {"direction-failure", direction_failure},
      {"method-gap", method_gap},
      {"transition-table-totality", table_totality},
      {"evaluation-arithmetic", evaluation_arithmetic},
      {"end-to-end-determinism", determinism},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures;
}
