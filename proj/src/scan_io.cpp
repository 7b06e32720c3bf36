#include "lts/scan_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <Eigen/SVD>
#include <Eigen/LU>
#include <spdlog/spdlog.h>

#include "byte_codec.hpp"
#include "lts/error.hpp"

namespace lts::io {

namespace {

constexpr std::size_t kPointBytes = 16;
constexpr double kPoseOrthoTolerance = 1e-3;
constexpr double kEntryTolerance = 1e-6;

// Rows whose sum is within this of one are left untouched so that valid
// float32 softmax rows roundtrip bit-exactly.
constexpr double kRenormalizeThreshold = 1e-6;

std::string path_str(const std::filesystem::path& p) { return p.string(); }

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) tokens.push_back(line.substr(i, j - i));
    i = j;
  }
  return tokens;
}

Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0) {
    Eigen::Matrix3d u = svd.matrixU();
    u.col(2) *= -1.0;
    r = u * svd.matrixV().transpose();
  }
  return r;
}

}  // namespace

std::vector<std::byte> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path_str(path));
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  std::vector<std::byte> bytes(size);
  if (size > 0 && !in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size))) {
    throw Error(ErrorKind::Io, "short read on " + path_str(path));
  }
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::byte> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path_str(path));
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Io, "write failed on " + path_str(path));
}

std::vector<std::filesystem::path> list_files(const std::filesystem::path& dir,
                                              std::string_view extension) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorKind::Io, "not a directory: " + path_str(dir));
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == extension) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.filename().string() < b.filename().string(); });
  return files;
}

// --- velodyne ----------------------------------------------------------------

PointCloud decode_velodyne(std::span<const std::byte> bytes, ScanReadStats* stats) {
  if (bytes.size() % kPointBytes != 0) {
    throw Error(ErrorKind::MalformedFile, "velodyne scan of " + std::to_string(bytes.size()) +
                                              " bytes is not a multiple of 16");
  }
  const std::size_t n = bytes.size() / kPointBytes;
  detail::ByteReader reader(bytes, "velodyne scan");
  PointCloud cloud;
  cloud.points.resize(n);
  std::size_t clamped = 0;
  for (std::size_t i = 0; i < n; ++i) {
    Point& p = cloud.points[i];
    p.x = reader.f32();
    p.y = reader.f32();
    p.z = reader.f32();
    p.intensity = reader.f32();
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
      throw Error(ErrorKind::MalformedPoint, "non-finite coordinate at point " + std::to_string(i));
    }
    if (!(p.intensity >= 0.0f && p.intensity <= 1.0f)) {
      p.intensity = std::isnan(p.intensity) ? 0.0f : std::clamp(p.intensity, 0.0f, 1.0f);
      ++clamped;
    }
  }
  if (clamped > 0) spdlog::warn("clamped {} intensities into [0, 1]", clamped);
  if (stats) stats->intensity_clamped = clamped;
  return cloud;
}

std::vector<std::byte> encode_velodyne(const PointCloud& cloud) {
  detail::ByteWriter w(cloud.size() * kPointBytes);
  for (const Point& p : cloud.points) {
    w.f32(p.x);
    w.f32(p.y);
    w.f32(p.z);
    w.f32(p.intensity);
  }
  return w.take();
}

PointCloud read_velodyne_bin(const std::filesystem::path& path, ScanReadStats* stats) {
  return decode_velodyne(read_file(path), stats);
}

void write_velodyne_bin(const PointCloud& cloud, const std::filesystem::path& path) {
  write_file(path, encode_velodyne(cloud));
}

// --- poses -------------------------------------------------------------------

std::vector<Pose> read_pose_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path_str(path));
  std::vector<Pose> poses;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    const std::string where = path_str(path) + ":" + std::to_string(line_no);
    if (tokens.size() != 12) {
      throw Error(ErrorKind::Parse,
                  where + ": expected 12 values, found " + std::to_string(tokens.size()));
    }
    double v[12];
    for (std::size_t k = 0; k < 12; ++k) {
      const auto tok = tokens[k];
      const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v[k]);
      if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size() || !std::isfinite(v[k])) {
        throw Error(ErrorKind::Parse, where + ": bad number '" + std::string(tok) + "'");
      }
    }
    Eigen::Matrix3d r;
    r << v[0], v[1], v[2], v[4], v[5], v[6], v[8], v[9], v[10];
    const double ortho_err = (r * r.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
    const double det_err = std::abs(r.determinant() - 1.0);
    if (ortho_err > kPoseOrthoTolerance || det_err > kPoseOrthoTolerance) {
      throw Error(ErrorKind::Validation, where + ": rotation is not orthonormal (max |RRt-I| = " +
                                             std::to_string(ortho_err) + ")");
    }
    Pose pose;
    pose.rotation = (ortho_err > 1e-12 || det_err > 1e-12) ? nearest_rotation(r) : r;
    pose.translation = Eigen::Vector3d(v[3], v[7], v[11]);
    poses.push_back(pose);
  }
  return poses;
}

void write_pose_file(std::span<const Pose> poses, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path_str(path));
  out.precision(17);
  for (const Pose& p : poses) {
    for (int r = 0; r < 3; ++r) {
      out << p.rotation(r, 0) << ' ' << p.rotation(r, 1) << ' ' << p.rotation(r, 2) << ' '
          << p.translation(r) << (r < 2 ? ' ' : '\n');
    }
  }
  if (!out) throw Error(ErrorKind::Io, "write failed on " + path_str(path));
}

// --- scores ------------------------------------------------------------------

void validate_and_normalize(ClassScores& scores) {
  for (std::size_t i = 0; i < scores.num_points(); ++i) {
    auto row = scores.row(i);
    double sum = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      const double v = row[c];
      if (!(v >= -kEntryTolerance && v <= 1.0 + kEntryTolerance)) {
        throw Error(ErrorKind::Range, "score row " + std::to_string(i) + " class " + std::to_string(c) +
                                          " is outside [0, 1]");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      throw Error(ErrorKind::InvalidDistribution,
                  "score row " + std::to_string(i) + " sums to " + std::to_string(sum));
    }
    const bool renormalize = std::abs(sum - 1.0) > kRenormalizeThreshold;
    for (auto& v : row) {
      double x = std::clamp(static_cast<double>(v), 0.0, 1.0);
      if (renormalize) x /= sum;
      v = static_cast<float>(x);
    }
  }
}

ClassScores decode_scores(std::span<const std::byte> bytes) {
  detail::ByteReader reader(bytes, "score file");
  if (!reader.magic("PSCR")) throw Error(ErrorKind::Format, "score file has bad magic");
  const auto version = reader.u32();
  if (version != kFormatVersion) {
    throw Error(ErrorKind::Format, "unsupported score file version " + std::to_string(version));
  }
  const std::uint64_t n = reader.u32();
  const std::uint64_t c = reader.u32();
  if (c == 0 && n > 0) throw Error(ErrorKind::Format, "score file declares zero classes");
  // 64-bit product of two u32 cannot overflow; compare before allocating.
  const std::uint64_t payload = n * c * 4;
  if (payload != reader.remaining()) {
    throw Error(ErrorKind::Format, "score file declares " + std::to_string(n) + "x" + std::to_string(c) +
                                       " values but carries " + std::to_string(reader.remaining()) +
                                       " payload bytes");
  }
  std::vector<float> values(static_cast<std::size_t>(n * c));
  for (auto& v : values) v = reader.f32();
  ClassScores scores(static_cast<std::size_t>(n), static_cast<std::size_t>(c), std::move(values));
  validate_and_normalize(scores);
  return scores;
}

std::vector<std::byte> encode_scores(const ClassScores& scores) {
  detail::ByteWriter w(kScoresHeaderBytes + scores.values().size() * 4);
  w.magic("PSCR");
  w.u32(kFormatVersion);
  w.u32(static_cast<std::uint32_t>(scores.num_points()));
  w.u32(static_cast<std::uint32_t>(scores.num_classes()));
  for (float v : scores.values()) w.f32(v);
  return w.take();
}

ClassScores read_scores(const std::filesystem::path& path) { return decode_scores(read_file(path)); }

void write_scores(const ClassScores& scores, const std::filesystem::path& path) {
  write_file(path, encode_scores(scores));
}

// --- labels ------------------------------------------------------------------

LabelVector decode_labels(std::span<const std::byte> bytes) {
  detail::ByteReader reader(bytes, "label file");
  if (!reader.magic("PLBL")) throw Error(ErrorKind::Format, "label file has bad magic");
  const auto version = reader.u32();
  if (version != kFormatVersion) {
    throw Error(ErrorKind::Format, "unsupported label file version " + std::to_string(version));
  }
  const std::uint64_t n = reader.u32();
  if (n != reader.remaining()) {
    throw Error(ErrorKind::Format, "label file declares " + std::to_string(n) + " labels but carries " +
                                       std::to_string(reader.remaining()) + " bytes");
  }
  LabelVector labels(static_cast<std::size_t>(n));
  for (auto& l : labels) l = reader.u8();
  return labels;
}

std::vector<std::byte> encode_labels(const LabelVector& labels) {
  detail::ByteWriter w(kLabelsHeaderBytes + labels.size());
  w.magic("PLBL");
  w.u32(kFormatVersion);
  w.u32(static_cast<std::uint32_t>(labels.size()));
  for (auto l : labels) w.u8(l);
  return w.take();
}

LabelVector read_labels(const std::filesystem::path& path) { return decode_labels(read_file(path)); }

void write_labels(const LabelVector& labels, const std::filesystem::path& path) {
  write_file(path, encode_labels(labels));
}

}  // namespace lts::io
