#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "lts/types.hpp"

namespace lts {

inline constexpr double kDefaultAssocMaxDist = 0.5;

struct Match {
  static constexpr std::int64_t kUnmatched = -1;

  std::int64_t prev_index = kUnmatched;
  double distance = 0.0;

  bool matched() const noexcept { return prev_index >= 0; }
  friend bool operator==(const Match&, const Match&) = default;
};

/// One entry per point of the current scan.
struct Correspondence {
  std::vector<Match> matches;
  std::size_t prev_size = 0;

  static Correspondence unmatched(std::size_t curr_size, std::size_t prev_size = 0);

  std::size_t size() const noexcept { return matches.size(); }
  std::size_t num_matched() const;
};

/// Source of the rigid transform that carries scan t-1 points into the frame
/// of scan t.
class MotionProvider {
 public:
  virtual ~MotionProvider() = default;
  virtual Pose motion(std::size_t curr_scan) const = 0;
};

class IdentityMotion final : public MotionProvider {
 public:
  Pose motion(std::size_t) const override { return Pose::identity(); }
};

/// Ego-motion from per-scan sensor poses in a common world frame:
/// T(t-1 -> t) = inverse(P_t) * P_{t-1}.
class PoseSequenceMotion final : public MotionProvider {
 public:
  explicit PoseSequenceMotion(std::vector<Pose> world_poses);
  Pose motion(std::size_t curr_scan) const override;

 private:
  std::vector<Pose> poses_;
};

/// Transforms every point of `cloud` by `motion`, in double precision.
std::vector<Eigen::Vector3d> transform_points(const PointCloud& cloud, const Pose& motion);

/// Euclidean nearest neighbour of each current point among the
/// motion-aligned previous points, kept when within `max_dist`.
/// Many-to-one matches are allowed; distance ties go to the lower previous
/// index. Requires max_dist > 0.
Correspondence associate(const PointCloud& prev, const PointCloud& curr, const Pose& motion, double max_dist);
Correspondence associate(const PointCloud& prev, const PointCloud& curr, const MotionProvider& motion,
                         std::size_t curr_scan, double max_dist);

}  // namespace lts
