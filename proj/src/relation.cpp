#include "scenediff/relation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <opencv2/imgproc.hpp>

#include "scenediff/errors.hpp"

namespace scenediff {

std::string_view to_string(RelationLabel label) {
  switch (label) {
    case RelationLabel::AInB: return "A_IN_B";
    case RelationLabel::BInA: return "B_IN_A";
    case RelationLabel::AOnB: return "A_ON_B";
    case RelationLabel::BOnA: return "B_ON_A";
    case RelationLabel::Unrelated: return "UNRELATED";
  }
  return "UNRELATED";
}

RelationLabel parse_relation_label(std::string_view text) {
  for (const auto label : kAllRelationLabels) {
    if (to_string(label) == text) {
      return label;
    }
  }
  throw ParseError("unknown relation label '" + std::string(text) + "'");
}

std::string_view to_string(SceneSide side) {
  return side == SceneSide::Initial ? "initial" : "final";
}

PairCandidate PairCandidate::canonical(const std::string& x, const std::string& y) {
  return x < y ? PairCandidate{x, y} : PairCandidate{y, x};
}

std::vector<PairCandidate> candidate_pairs(const Scene& scene) {
  std::vector<PairCandidate> pairs;
  const auto& dets = scene.detections;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    for (std::size_t j = i + 1; j < dets.size(); ++j) {
      if (iou(dets[i].bbox, dets[j].bbox) > 0.0) {
        pairs.push_back(PairCandidate::canonical(dets[i].id, dets[j].id));
      }
    }
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

std::vector<std::uint8_t> ClassifierInput::planar() const {
  const std::size_t plane = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  std::vector<std::uint8_t> out(plane * 5);
  for (int y = 0; y < height; ++y) {
    const auto* px = rgb.ptr<cv::Vec3b>(y);
    const auto* ma = mask_a.ptr<std::uint8_t>(y);
    const auto* mb = mask_b.ptr<std::uint8_t>(y);
    for (int x = 0; x < width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * width + x;
      out[i] = px[x][0];
      out[plane + i] = px[x][1];
      out[2 * plane + i] = px[x][2];
      out[3 * plane + i] = ma[x];
      out[4 * plane + i] = mb[x];
    }
  }
  return out;
}

cv::Rect crop_rect(const BoundingBox& a, const BoundingBox& b, int image_width,
                   int image_height) {
  const BoundingBox u = union_box(a, b);
  const int x0 = std::max(0, static_cast<int>(std::floor(u.x_min())));
  const int y0 = std::max(0, static_cast<int>(std::floor(u.y_min())));
  const int x1 = std::min(image_width, static_cast<int>(std::ceil(u.x_max())));
  const int y1 = std::min(image_height, static_cast<int>(std::ceil(u.y_max())));
  return {x0, y0, std::max(0, x1 - x0), std::max(0, y1 - y0)};
}

cv::Mat rasterize_mask(const BoundingBox& box, const cv::Rect& crop) {
  cv::Mat mask = cv::Mat::zeros(crop.height, crop.width, CV_8UC1);
  const int x0 = std::max(crop.x, static_cast<int>(std::floor(box.x_min())));
  const int y0 = std::max(crop.y, static_cast<int>(std::floor(box.y_min())));
  const int x1 = std::min(crop.x + crop.width, static_cast<int>(std::ceil(box.x_max())));
  const int y1 = std::min(crop.y + crop.height, static_cast<int>(std::ceil(box.y_max())));
  if (x1 > x0 && y1 > y0) {
    mask(cv::Rect(x0 - crop.x, y0 - crop.y, x1 - x0, y1 - y0)).setTo(1);
  }
  return mask;
}

ClassifierInput build_classifier_input(const cv::Mat& image, const Detection& a,
                                       const Detection& b) {
  if (image.empty() || image.type() != CV_8UC3) {
    throw DataError("classifier input requires a non-empty 8-bit 3-channel image");
  }
  const cv::Rect crop = crop_rect(a.bbox, b.bbox, image.cols, image.rows);
  if (crop.width < 2 || crop.height < 2) {
    throw DataError("degenerate crop for pair '" + a.id + "', '" + b.id + "'");
  }
  ClassifierInput in;
  in.width = crop.width;
  in.height = crop.height;
  in.crop = crop;
  cv::cvtColor(image(crop), in.rgb, cv::COLOR_BGR2RGB);
  in.mask_a = rasterize_mask(a.bbox, crop);
  in.mask_b = rasterize_mask(b.bbox, crop);
  if (cv::countNonZero(in.mask_a) == 0 || cv::countNonZero(in.mask_b) == 0) {
    throw DataError("pair '" + a.id + "', '" + b.id + "' has a box outside the image");
  }
  in.bbox_a = a.bbox.translated(-crop.x, -crop.y);
  in.bbox_b = b.bbox.translated(-crop.x, -crop.y);
  return in;
}

RelationLabel heuristic_classify(const Detection& a, const Detection& b,
                                 const HeuristicConfig& config) {
  const double inter = intersection_area(a.bbox, b.bbox);
  const double fa = inter / a.bbox.area();
  const double fb = inter / b.bbox.area();
  if (std::max(fa, fb) < config.relation_threshold) {
    return RelationLabel::Unrelated;
  }
  bool a_is_subject;
  if (fa != fb) {
    a_is_subject = fa > fb;
  } else if (a.bbox.area() != b.bbox.area()) {
    a_is_subject = a.bbox.area() < b.bbox.area();
  } else {
    a_is_subject = a.id < b.id;
  }
  const double subject_containment = a_is_subject ? fa : fb;
  const bool inside = subject_containment >= config.in_threshold;
  if (a_is_subject) {
    return inside ? RelationLabel::AInB : RelationLabel::AOnB;
  }
  return inside ? RelationLabel::BInA : RelationLabel::BOnA;
}

void check_scores(const RelationResult& result) {
  if (!result.probs) {
    return;
  }
  const auto& p = *result.probs;
  const double sum = std::accumulate(p.begin(), p.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-6) {
    throw ProtocolError("class scores sum to " + std::to_string(sum) + ", expected 1");
  }
  for (const double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ProtocolError("class scores must be finite and non-negative");
    }
  }
  const auto argmax = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
  if (p[static_cast<std::size_t>(argmax)] != p[static_cast<std::size_t>(index_of(result.label))]) {
    throw ProtocolError("label " + std::string(to_string(result.label)) +
                        " is not the highest-scoring class");
  }
}

RelationResult RelationClassifier::classify_one(const RelationQuery& query) {
  auto results = classify(std::span<const RelationQuery>(&query, 1));
  return results.at(0);
}

std::vector<RelationResult> HeuristicClassifier::classify(std::span<const RelationQuery> queries) {
  std::vector<RelationResult> out;
  out.reserve(queries.size());
  for (const auto& q : queries) {
    out.push_back({heuristic_classify(*q.a, *q.b, config_), std::nullopt});
  }
  return out;
}

}  // namespace scenediff
