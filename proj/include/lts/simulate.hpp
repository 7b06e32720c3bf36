#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lts/types.hpp"

namespace lts::sim {

/// Axis-aligned box moving with constant velocity (meters per scan).
struct SceneObject {
  std::uint8_t label = 1;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d extents = Eigen::Vector3d::Ones();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
};

struct SceneSpec {
  std::vector<SceneObject> objects;
  std::size_t num_classes = 4;
  std::size_t num_scans = 10;
  /// Side length of the square ground patch, centered on the first sensor position.
  double ground_extent = 40.0;
  double ground_z = -1.73;
  std::size_t ground_points = 2000;
  std::size_t points_per_object = 400;
  Eigen::Vector3d sensor_origin = Eigen::Vector3d::Zero();
  Eigen::Vector3d sensor_velocity = Eigen::Vector3d::Zero();
  double sensor_yaw_rate = 0.0;  // radians per scan
  /// Draw fresh surface samples every scan instead of keeping point identities.
  bool resample = false;

  std::size_t points_per_scan() const { return ground_points + objects.size() * points_per_object; }
  void validate() const;
};

enum class NoiseMode { SymmetricFlip, Dirichlet };

/// SymmetricFlip: with probability `flip_probability` the one-hot score moves
/// to a uniformly chosen wrong class. Dirichlet: scores ~ Dir(1 + kappa on the
/// true class, 1 elsewhere).
struct NoiseSpec {
  NoiseMode mode = NoiseMode::SymmetricFlip;
  double flip_probability = 0.0;
  double concentration = 10.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Frame {
  PointCloud cloud;           // sensor frame
  LabelVector labels;         // ground truth
  Pose pose;                  // sensor pose in the world frame
  ClassScores scores;         // corrupted one-hots
  std::vector<std::uint64_t> point_ids;  // stable across scans unless resampling
};

std::vector<Frame> generate(const SceneSpec& scene, const NoiseSpec& noise);

/// Batch log-odds of one point observed T times: sum_t logit(score_t) - (T-1) l_0,
/// without any clamping. `sequence` holds T rows of C probabilities.
std::vector<double> oracle_posterior(std::span<const std::vector<double>> sequence, std::span<const double> prior);

struct SimulationConfig {
  SceneSpec scene;
  NoiseSpec noise;
};

/// Plain-text `key = value` configuration; see README for the keys.
SimulationConfig parse_config(const std::string& text, const std::string& source = "<config>");
SimulationConfig load_config(const std::filesystem::path& path);

/// Writes velodyne/*.bin, scores/*.pscr, labels/*.plbl and poses.txt.
void write_dataset(const std::vector<Frame>& frames, const std::filesystem::path& out_dir);

/// Stateless 64-bit hash of (seed, stream, a, b); the generator draws every
/// random number from it so results do not depend on evaluation order.
std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t a, std::uint64_t b);
double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t a, std::uint64_t b);

}  // namespace lts::sim
