#pragma once

#include <array>
#include <string>
#include <string_view>

namespace scenediff {

// Spatial relation of an ordered pair (A, B) of detections.
enum class RelationLabel { AInB, BInA, AOnB, BOnA, Unrelated };

inline constexpr std::array<RelationLabel, 5> kAllRelationLabels = {
    RelationLabel::AInB, RelationLabel::BInA, RelationLabel::AOnB,
    RelationLabel::BOnA, RelationLabel::Unrelated};

std::string_view to_string(RelationLabel label);
RelationLabel parse_relation_label(std::string_view text);

constexpr int index_of(RelationLabel label) { return static_cast<int>(label); }

// Label seen from the reversed pair (B, A).
constexpr RelationLabel swapped(RelationLabel label) {
  switch (label) {
    case RelationLabel::AInB: return RelationLabel::BInA;
    case RelationLabel::BInA: return RelationLabel::AInB;
    case RelationLabel::AOnB: return RelationLabel::BOnA;
    case RelationLabel::BOnA: return RelationLabel::AOnB;
    case RelationLabel::Unrelated: return RelationLabel::Unrelated;
  }
  return RelationLabel::Unrelated;
}

// A relation stored against two detection ids, as written in truth sidecars.
struct LabeledPair {
  std::string a;
  std::string b;
  RelationLabel label = RelationLabel::Unrelated;

  bool operator==(const LabeledPair&) const = default;
};

}  // namespace scenediff
