#pragma once

#include <vector>

#include <opencv2/core.hpp>

#include "scenediff/scene.hpp"

namespace scenediff {

// Flat background with each object drawn as its class shape inscribed in
// the bbox. Larger objects are drawn first so contained objects stay
// visible. Returns an 8-bit BGR image of the scene's size.
cv::Mat render_scene(const Scene& scene);

cv::Scalar class_color(const std::string& class_name);
cv::Scalar method_color(TaskMethod method);

// Copy of `image` with labelled boxes and one arrow per task from the picked
// center to the target center. Throws DataError for unknown task ids.
cv::Mat draw_overlay(const cv::Mat& image, const Scene& scene,
                     const std::vector<PickPlaceTask>& tasks);

}  // namespace scenediff
