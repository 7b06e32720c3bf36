#include "lts/types.hpp"

#include <string>

#include "lts/error.hpp"

namespace lts {

Pose Pose::inverse() const {
  Pose out;
  out.rotation = rotation.transpose();
  out.translation = -(out.rotation * translation);
  return out;
}

Pose Pose::compose(const Pose& rhs) const {
  Pose out;
  out.rotation = rotation * rhs.rotation;
  out.translation = rotation * rhs.translation + translation;
  return out;
}

std::vector<std::string> default_class_names(std::size_t num_classes) {
  if (num_classes == 4) return {"background", "car", "pedestrian", "bicyclist"};
  std::vector<std::string> names;
  names.reserve(num_classes);
  for (std::size_t c = 0; c < num_classes; ++c) names.push_back("class_" + std::to_string(c));
  return names;
}

ClassScores::ClassScores(std::size_t num_points, std::size_t num_classes)
    : ClassScores(num_points, num_classes, std::vector<float>(num_points * num_classes, 0.0f)) {}

ClassScores::ClassScores(std::size_t num_points, std::size_t num_classes, std::vector<float> values)
    : class_names(default_class_names(num_classes)),
      num_points_(num_points),
      num_classes_(num_classes),
      values_(std::move(values)) {
  if (values_.size() != num_points_ * num_classes_) {
    throw Error(ErrorKind::DimensionMismatch,
                "score buffer holds " + std::to_string(values_.size()) + " values, expected " +
                    std::to_string(num_points_) + "x" + std::to_string(num_classes_));
  }
}

LabelVector argmax_labels(const ClassScores& scores) {
  LabelVector labels(scores.num_points(), 0);
  for (std::size_t i = 0; i < scores.num_points(); ++i) {
    const auto row = scores.row(i);
    std::size_t best = 0;
    for (std::size_t c = 1; c < row.size(); ++c) {
      if (row[c] > row[best]) best = c;
    }
    labels[i] = static_cast<std::uint8_t>(best);
  }
  return labels;
}

}  // namespace lts
