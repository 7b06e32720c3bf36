#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "lts/types.hpp"

namespace lts::io {

/// Binary containers written by this project. All integers and floats are
/// little-endian.
///
///   PSCR  "PSCR" | u32 version=1 | u32 N | u32 C | N*C float32 row-major
///   PLBL  "PLBL" | u32 version=1 | u32 N | N uint8
inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr std::size_t kScoresHeaderBytes = 16;
inline constexpr std::size_t kLabelsHeaderBytes = 12;

/// Maximum deviation of a score row sum from one that is still accepted.
inline constexpr double kRowSumTolerance = 1e-3;

struct ScanReadStats {
  std::size_t intensity_clamped = 0;
};

/// KITTI velodyne scan: N * (x, y, z, intensity) float32. Intensities outside
/// [0, 1] are clamped and counted in `stats`.
PointCloud read_velodyne_bin(const std::filesystem::path& path, ScanReadStats* stats = nullptr);
void write_velodyne_bin(const PointCloud& cloud, const std::filesystem::path& path);

/// KITTI odometry poses: one row-major 3x4 [R|t] per non-empty line. Rotations
/// within 1e-3 of orthonormal are accepted and projected back onto SO(3).
std::vector<Pose> read_pose_file(const std::filesystem::path& path);
void write_pose_file(std::span<const Pose> poses, const std::filesystem::path& path);

ClassScores read_scores(const std::filesystem::path& path);
void write_scores(const ClassScores& scores, const std::filesystem::path& path);

LabelVector read_labels(const std::filesystem::path& path);
void write_labels(const LabelVector& labels, const std::filesystem::path& path);

/// In-memory variants used by the file functions and by the bindings.
PointCloud decode_velodyne(std::span<const std::byte> bytes, ScanReadStats* stats = nullptr);
ClassScores decode_scores(std::span<const std::byte> bytes);
LabelVector decode_labels(std::span<const std::byte> bytes);
std::vector<std::byte> encode_velodyne(const PointCloud& cloud);
std::vector<std::byte> encode_scores(const ClassScores& scores);
std::vector<std::byte> encode_labels(const LabelVector& labels);

/// Checks row sums and entry ranges, then renormalizes rows in place.
/// Throws InvalidDistribution / Range naming the offending row.
void validate_and_normalize(ClassScores& scores);

std::vector<std::byte> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::byte> bytes);

/// Regular files in `dir` with the given extension, sorted by filename.
std::vector<std::filesystem::path> list_files(const std::filesystem::path& dir,
                                              std::string_view extension);

}  // namespace lts::io
