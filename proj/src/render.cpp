#include "scenediff/render.hpp"

#include <algorithm>
#include <numeric>

#include <opencv2/imgproc.hpp>

#include "scenediff/errors.hpp"
#include "scenediff/simulator.hpp"

namespace scenediff {

namespace {

const cv::Scalar kBackground(205, 210, 215);

cv::Point to_px(const Point& p) {
  return {static_cast<int>(std::lround(p.x)), static_cast<int>(std::lround(p.y))};
}

void draw_object(cv::Mat& img, const Detection& d) {
  const BoundingBox& b = d.bbox;
  const cv::Scalar color = class_color(d.object_class.name);
  const cv::Point c = to_px(center(b));
  const int half_w = std::max(1, static_cast<int>(std::lround(b.width() / 2.0)) - 1);
  const int half_h = std::max(1, static_cast<int>(std::lround(b.height() / 2.0)) - 1);
  switch (shape_of(d.object_class.name)) {
    case ClassShape::Ellipse:
      cv::ellipse(img, c, {half_w, half_h}, 0.0, 0.0, 360.0, color, cv::FILLED, cv::LINE_8);
      break;
    case ClassShape::Bar: {
      // Rounded bar along the longer axis; thick lines have round caps.
      const bool horizontal = b.width() >= b.height();
      const int thickness = std::max(1, 2 * std::min(half_w, half_h));
      const int reach = std::max(0, (horizontal ? half_w : half_h) - thickness / 2);
      const cv::Point d0 = horizontal ? cv::Point(reach, 0) : cv::Point(0, reach);
      cv::line(img, c - d0, c + d0, color, thickness, cv::LINE_8);
      break;
    }
    case ClassShape::Rectangle:
      cv::rectangle(img, cv::Point(static_cast<int>(std::ceil(b.x_min())), static_cast<int>(std::ceil(b.y_min()))),
                    cv::Point(static_cast<int>(std::floor(b.x_max())) - 1, static_cast<int>(std::floor(b.y_max())) - 1),
                    color, cv::FILLED, cv::LINE_8);
      break;
  }
}

}  // namespace

cv::Scalar class_color(const std::string& class_name) {
  static const std::vector<std::pair<std::string, cv::Scalar>> palette = {
      {"bottle", {40, 140, 40}},    {"pan", {60, 60, 60}},         {"plate", {245, 245, 245}},
      {"pot", {110, 110, 150}},     {"spoon", {180, 180, 190}},    {"whisk", {150, 200, 210}},
      {"knife", {120, 120, 120}},   {"bowl", {60, 120, 220}},      {"cup", {200, 80, 40}},
      {"cutting_board", {70, 130, 180}}, {"fork", {160, 160, 200}},
  };
  for (const auto& [name, color] : palette) {
    if (name == class_name) {
      return color;
    }
  }
  return {128, 0, 128};
}

cv::Scalar method_color(TaskMethod method) {
  switch (method) {
    case TaskMethod::Geometric: return {0, 204, 0};
    case TaskMethod::Transition: return {204, 0, 204};
    case TaskMethod::Truth: return {0, 0, 0};
  }
  return {0, 0, 0};
}

cv::Mat render_scene(const Scene& scene) {
  cv::Mat img(scene.image_height, scene.image_width, CV_8UC3, kBackground);
  std::vector<std::size_t> order(scene.detections.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scene.detections[a].bbox.area() > scene.detections[b].bbox.area();
  });
  for (const std::size_t i : order) {
    draw_object(img, scene.detections[i]);
  }
  return img;
}

cv::Mat draw_overlay(const cv::Mat& image, const Scene& scene,
                     const std::vector<PickPlaceTask>& tasks) {
  if (image.empty()) {
    throw DataError("overlay needs a non-empty image");
  }
  cv::Mat out;
  if (image.channels() == 1) {
    cv::cvtColor(image, out, cv::COLOR_GRAY2BGR);
  } else {
    out = image.clone();
  }
  const cv::Scalar box_color(0, 165, 255);
  for (const auto& d : scene.detections) {
    const cv::Point p0(static_cast<int>(std::lround(d.bbox.x_min())), static_cast<int>(std::lround(d.bbox.y_min())));
    const cv::Point p1(static_cast<int>(std::lround(d.bbox.x_max())) - 1, static_cast<int>(std::lround(d.bbox.y_max())) - 1);
    cv::rectangle(out, p0, p1, box_color, 1, cv::LINE_8);
    cv::putText(out, d.id, p0 + cv::Point(2, 12), cv::FONT_HERSHEY_PLAIN, 0.9, box_color, 1, cv::LINE_8);
  }
  for (const auto& t : tasks) {
    const Detection* picked = scene.find(t.picked_id);
    const Detection* target = scene.find(t.target_id);
    if (picked == nullptr || target == nullptr) {
      throw DataError("task references '" + (picked == nullptr ? t.picked_id : t.target_id) +
                      "', which is not in the overlay scene");
    }
    cv::arrowedLine(out, to_px(center(picked->bbox)), to_px(center(target->bbox)),
                    method_color(t.method), 2, cv::LINE_8, 0, 0.15);
  }
  return out;
}

}  // namespace scenediff
