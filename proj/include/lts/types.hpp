#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace lts {

/// One LiDAR return. Coordinates are in meters in the sensor frame,
/// intensity is the normalized reflectance in [0, 1].
struct Point {
  float x = 0.0f;
  float y = 0.0f;
  float z = 0.0f;
  float intensity = 0.0f;

  friend bool operator==(const Point&, const Point&) = default;
};

struct PointCloud {
  std::vector<Point> points;
  std::int64_t scan_id = 0;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
};

/// Rigid transform x' = rotation * x + translation.
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static Pose identity() { return {}; }

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }
  Pose inverse() const;
  Pose compose(const Pose& rhs) const;  // this ∘ rhs
};

/// Class names used when a score file does not carry its own.
std::vector<std::string> default_class_names(std::size_t num_classes);

/// Per-point softmax scores, N rows of C entries, row-major.
class ClassScores {
 public:
  ClassScores() = default;
  ClassScores(std::size_t num_points, std::size_t num_classes);
  ClassScores(std::size_t num_points, std::size_t num_classes, std::vector<float> values);

  std::size_t num_points() const noexcept { return num_points_; }
  std::size_t num_classes() const noexcept { return num_classes_; }

  std::span<const float> row(std::size_t i) const {
    return {values_.data() + i * num_classes_, num_classes_};
  }
  std::span<float> row(std::size_t i) { return {values_.data() + i * num_classes_, num_classes_}; }

  const std::vector<float>& values() const noexcept { return values_; }

  std::vector<std::string> class_names;

  friend bool operator==(const ClassScores&, const ClassScores&) = default;

 private:
  std::size_t num_points_ = 0;
  std::size_t num_classes_ = 0;
  std::vector<float> values_;
};

/// Per-point class indices.
using LabelVector = std::vector<std::uint8_t>;

/// Index of the largest score per row; ties go to the lowest class index.
LabelVector argmax_labels(const ClassScores& scores);

}  // namespace lts
