#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "scenediff/errors.hpp"
#include "scenediff/relation.hpp"

using namespace scenediff;

namespace {

Detection det(const std::string& id, BoundingBox b) { return {id, {"cup"}, 0.9, b}; }

cv::Mat gray_image(int w = 64, int h = 64) { return cv::Mat(h, w, CV_8UC3, cv::Scalar(10, 20, 30)); }

}  // namespace

TEST_CASE("candidate pairs") {
  Scene s{100, 100, std::nullopt, {det("a", {0, 0, 10, 10}), det("b", {20, 20, 30, 30}), det("c", {40, 40, 50, 50})}};
  CHECK(candidate_pairs(s).empty());

  s.detections = {det("spoon", {2, 2, 4, 4}), det("cup", {0, 0, 10, 10})};
  CHECK(candidate_pairs(s) == std::vector<PairCandidate>{{"cup", "spoon"}});

  s.detections = {det("d", {0, 0, 10, 10}), det("c", {1, 1, 11, 11}), det("b", {2, 2, 12, 12}), det("a", {3, 3, 13, 13})};
  CHECK(candidate_pairs(s).size() == 6);
}

TEST_CASE("candidate pairs match the brute-force oracle") {
  std::mt19937 rng(23);
  std::uniform_int_distribution<int> coord(0, 60), len(1, 25);
  for (int trial = 0; trial < 100; ++trial) {
    Scene s{100, 100, std::nullopt, {}};
    std::vector<oracle::RealBox> boxes;
    for (int i = 0; i < 8; ++i) {
      const int x = coord(rng), y = coord(rng), w = len(rng), h = len(rng);
      const std::string id = "o" + std::to_string((i * 5) % 8);
      s.detections.push_back(det(id, {double(x), double(y), double(x + w), double(y + h)}));
      boxes.push_back({id, double(x), double(y), double(x + w), double(y + h)});
    }
    std::vector<std::pair<std::string, std::string>> got;
    for (const auto& c : candidate_pairs(s)) got.emplace_back(c.a_id, c.b_id);
    CHECK(got == oracle::overlapping_pairs(boxes));
  }
}

TEST_CASE("classifier input masks") {
  const cv::Mat image = gray_image();
  SUBCASE("overlapping integer boxes") {
    const auto in = build_classifier_input(image, det("a", {0, 0, 4, 4}), det("b", {2, 2, 6, 6}));
    CHECK(in.width == 6);
    CHECK(in.height == 6);
    CHECK(cv::countNonZero(in.mask_a) == 16);
    CHECK(cv::countNonZero(in.mask_b) == 16);
    CHECK(in.mask_a.at<std::uint8_t>(3, 3) == 1);
    CHECK(in.mask_b.at<std::uint8_t>(3, 3) == 1);
    CHECK(in.mask_a.at<std::uint8_t>(5, 5) == 0);
    // BGR (10,20,30) becomes RGB (30,20,10).
    CHECK(in.rgb.at<cv::Vec3b>(0, 0) == cv::Vec3b(30, 20, 10));
    const auto planes = in.planar();
    CHECK(planes.size() == 5u * 36u);
    CHECK(planes[0] == 30);
    CHECK(planes[3 * 36] == 1);
  }
  SUBCASE("identical boxes give identical masks") {
    const auto in = build_classifier_input(image, det("a", {3, 4, 9, 12}), det("b", {3, 4, 9, 12}));
    CHECK(cv::countNonZero(in.mask_a != in.mask_b) == 0);
  }
  SUBCASE("corner boxes leave the gap empty") {
    const auto in = build_classifier_input(image, det("a", {0, 0, 3, 3}), det("b", {7, 7, 10, 10}));
    cv::Mat both;
    cv::bitwise_and(in.mask_a, in.mask_b, both);
    CHECK(cv::countNonZero(both) == 0);
    CHECK(in.mask_a.at<std::uint8_t>(5, 5) == 0);
    CHECK(in.mask_b.at<std::uint8_t>(5, 5) == 0);
  }
  SUBCASE("fractional boxes match the pixel-count oracle") {
    std::mt19937 rng(29);
    std::uniform_real_distribution<double> u(0, 50), len(0.3, 12);
    for (int trial = 0; trial < 200; ++trial) {
      const double ax = u(rng), ay = u(rng), bx = u(rng), by = u(rng);
      const BoundingBox a(ax, ay, ax + len(rng), ay + len(rng));
      const BoundingBox b(bx, by, bx + len(rng), by + len(rng));
      const cv::Rect crop = crop_rect(a, b, 64, 64);
      if (crop.width < 2 || crop.height < 2) continue;
      const auto in = build_classifier_input(image, det("a", a), det("b", b));
      CHECK(cv::countNonZero(in.mask_a) ==
            oracle::touched_cells(a.x_min() - crop.x, a.y_min() - crop.y, a.x_max() - crop.x,
                                  a.y_max() - crop.y, crop.width, crop.height));
      CHECK(cv::countNonZero(in.mask_b) ==
            oracle::touched_cells(b.x_min() - crop.x, b.y_min() - crop.y, b.x_max() - crop.x,
                                  b.y_max() - crop.y, crop.width, crop.height));
      CHECK(in.crop.x == static_cast<int>(std::floor(std::min(a.x_min(), b.x_min()))));
    }
  }
  SUBCASE("degenerate crops are rejected") {
    CHECK_THROWS_AS(build_classifier_input(image, det("a", {0, 0, 1, 1}), det("b", {0.2, 0.2, 0.8, 0.8})), DataError);
    CHECK_THROWS_AS(build_classifier_input(cv::Mat(), det("a", {0, 0, 4, 4}), det("b", {2, 2, 6, 6})), DataError);
  }
}

TEST_CASE("heuristic classifier") {
  CHECK(heuristic_classify(det("a", {2, 2, 4, 4}), det("b", {0, 0, 10, 10})) == RelationLabel::AInB);
  // Equal 10x10 boxes sharing a 10-pixel sliver: f_a = f_b = 0.1.
  CHECK(heuristic_classify(det("a", {0, 0, 10, 10}), det("b", {9, 0, 19, 10})) == RelationLabel::Unrelated);
  // a = 10x10, b = 10x50, overlap 50: f_a = 0.5, f_b = 0.1.
  CHECK(heuristic_classify(det("a", {0, 0, 10, 10}), det("b", {5, 0, 15, 50})) == RelationLabel::AOnB);
  CHECK(heuristic_classify(det("a", {0, 0, 10, 10}), det("b", {5, 0, 15, 50}), {0.2, 0.4}) == RelationLabel::AInB);

  std::mt19937 rng(31);
  std::uniform_int_distribution<int> c(0, 30), l(1, 20);
  for (int i = 0; i < 2000; ++i) {
    const int ax = c(rng), ay = c(rng), bx = c(rng), by = c(rng);
    const Detection a = det("a", {double(ax), double(ay), double(ax + l(rng)), double(ay + l(rng))});
    const Detection b = det("b", {double(bx), double(by), double(bx + l(rng)), double(by + l(rng))});
    CHECK(heuristic_classify(b, a) == swapped(heuristic_classify(a, b)));
  }
}

TEST_CASE("score vector checks") {
  RelationResult r{RelationLabel::AOnB, std::array<double, 5>{0.1, 0.1, 0.6, 0.1, 0.1}};
  CHECK_NOTHROW(check_scores(r));
  r.probs = std::array<double, 5>{0.1, 0.1, 0.6, 0.1, 0.2};
  CHECK_THROWS_AS(check_scores(r), ProtocolError);
  r.probs = std::array<double, 5>{0.6, 0.1, 0.1, 0.1, 0.1};
  CHECK_THROWS_AS(check_scores(r), ProtocolError);
  r.probs.reset();
  CHECK_NOTHROW(check_scores(r));
}

TEST_CASE("relation labels") {
  for (const auto l : kAllRelationLabels) {
    CHECK(parse_relation_label(to_string(l)) == l);
    CHECK(swapped(swapped(l)) == l);
  }
  CHECK_THROWS_AS(parse_relation_label("A_UNDER_B"), ParseError);
}
