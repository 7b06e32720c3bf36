#include "lts/association.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>

#include "lts/error.hpp"

namespace lts {

namespace {

struct CellKey {
  std::int64_t x, y, z;
  friend bool operator==(const CellKey&, const CellKey&) = default;
};

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9E3779B97F4A7C15ull;
    h ^= static_cast<std::uint64_t>(k.y) * 0xC2B2AE3D27D4EB4Full + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k.z) * 0x165667B19E3779F9ull + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

// Uniform hash grid with cells slightly larger than the search radius, so
// every neighbour within the radius lies in the 27 cells around the query.
class VoxelIndex {
 public:
  VoxelIndex(const std::vector<Eigen::Vector3d>& points, double radius)
      : points_(points), cell_(radius * 1.0001) {
    cells_.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) cells_[key(points[i])].push_back(static_cast<std::uint32_t>(i));
  }

  // Nearest point; ties resolved toward the lower index.
  std::pair<std::int64_t, double> nearest(const Eigen::Vector3d& q) const {
    const CellKey center = key(q);
    std::int64_t best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          const auto it = cells_.find({center.x + dx, center.y + dy, center.z + dz});
          if (it == cells_.end()) continue;
          for (const std::uint32_t j : it->second) {
            const Eigen::Vector3d& p = points_[j];
            const double ex = p.x() - q.x(), ey = p.y() - q.y(), ez = p.z() - q.z();
            const double d2 = ex * ex + ey * ey + ez * ez;
            if (d2 < best_d2 || (d2 == best_d2 && static_cast<std::int64_t>(j) < best)) {
              best_d2 = d2;
              best = j;
            }
          }
        }
      }
    }
    return {best, best_d2};
  }

 private:
  std::int64_t coord(double v) const {
    constexpr double kLimit = 4.0e18;
    return static_cast<std::int64_t>(std::clamp(std::floor(v / cell_), -kLimit, kLimit));
  }
  CellKey key(const Eigen::Vector3d& p) const { return {coord(p.x()), coord(p.y()), coord(p.z())}; }

  const std::vector<Eigen::Vector3d>& points_;
  double cell_;
  std::unordered_map<CellKey, std::vector<std::uint32_t>, CellKeyHash> cells_;
};

}  // namespace

Correspondence Correspondence::unmatched(std::size_t curr_size, std::size_t prev_size) {
  Correspondence c;
  c.matches.assign(curr_size, Match{});
  c.prev_size = prev_size;
  return c;
}

std::size_t Correspondence::num_matched() const {
  return static_cast<std::size_t>(
      std::count_if(matches.begin(), matches.end(), [](const Match& m) { return m.matched(); }));
}

PoseSequenceMotion::PoseSequenceMotion(std::vector<Pose> world_poses) : poses_(std::move(world_poses)) {}

Pose PoseSequenceMotion::motion(std::size_t curr_scan) const {
  if (curr_scan == 0 || curr_scan >= poses_.size()) {
    throw Error(ErrorKind::InvalidArgument, "no pose pair for scan " + std::to_string(curr_scan) + " (have " +
                                                std::to_string(poses_.size()) + " poses)");
  }
  return poses_[curr_scan].inverse().compose(poses_[curr_scan - 1]);
}

std::vector<Eigen::Vector3d> transform_points(const PointCloud& cloud, const Pose& motion) {
  std::vector<Eigen::Vector3d> out;
  out.reserve(cloud.size());
  for (const Point& p : cloud.points) out.push_back(motion.apply(Eigen::Vector3d(p.x, p.y, p.z)));
  return out;
}

Correspondence associate(const PointCloud& prev, const PointCloud& curr, const Pose& motion, double max_dist) {
  if (!(max_dist > 0.0)) throw Error(ErrorKind::InvalidArgument, "association distance must be > 0");
  Correspondence corr = Correspondence::unmatched(curr.size(), prev.size());
  if (prev.empty()) return corr;

  const auto aligned = transform_points(prev, motion);
  const VoxelIndex index(aligned, max_dist);
  for (std::size_t i = 0; i < curr.size(); ++i) {
    const Point& p = curr.points[i];
    const auto [j, d2] = index.nearest(Eigen::Vector3d(p.x, p.y, p.z));
    if (j < 0) continue;
    const double d = std::sqrt(d2);
    if (d <= max_dist) corr.matches[i] = Match{j, d};
  }
  return corr;
}

Correspondence associate(const PointCloud& prev, const PointCloud& curr, const MotionProvider& motion,
                         std::size_t curr_scan, double max_dist) {
  return associate(prev, curr, motion.motion(curr_scan), max_dist);
}

}  // namespace lts
