#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <span>
#include <vector>

#include "lts/types.hpp"

namespace lts {

struct ProjectionConfig {
  std::size_t height = 64;
  std::size_t width = 512;
  double azimuth_min = -std::numbers::pi / 4.0;
  double azimuth_max = std::numbers::pi / 4.0;
  double elevation_min = -24.8 * std::numbers::pi / 180.0;
  double elevation_max = 2.0 * std::numbers::pi / 180.0;

  void validate() const;
};

/// Where a point ended up after projection.
enum class PointStatus : std::uint8_t {
  InView,     // owns its pixel
  Occluded,   // lost its pixel to a nearer point
  OutOfView,  // outside the azimuth/elevation window
  AtOrigin,   // zero range, direction undefined
};

struct PixelIndex {
  std::int32_t row = -1;
  std::int32_t col = -1;

  friend bool operator==(const PixelIndex&, const PixelIndex&) = default;
};

inline constexpr std::size_t kRangeChannels = 5;
enum Channel : std::size_t { kDepth = 0, kIntensity = 1, kX = 2, kY = 3, kZ = 4 };

/// H x W x 5 image (depth, intensity, x, y, z), row-major with channels
/// fastest. Row 0 is the highest elevation; column 0 the smallest azimuth.
struct RangeImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> channels;              // H*W*5
  std::vector<std::int32_t> pixel_to_point;  // H*W, -1 when empty
  std::vector<PointStatus> point_status;     // N
  // Pixel hit by each point; for occluded points this is the pixel they lost.
  std::vector<PixelIndex> point_to_pixel;    // N

  std::size_t pixel(std::size_t row, std::size_t col) const { return row * width + col; }
  bool valid(std::size_t row, std::size_t col) const { return pixel_to_point[pixel(row, col)] >= 0; }
  float at(std::size_t row, std::size_t col, std::size_t channel) const {
    return channels[pixel(row, col) * kRangeChannels + channel];
  }

  std::size_t count(PointStatus status) const;

  friend bool operator==(const RangeImage&, const RangeImage&) = default;
};

/// Bin of `value` in [lo, hi] split into `bins` equal cells; the upper
/// boundary falls into the last cell. Returns -1 outside the interval.
std::int64_t bin_index(double value, double lo, double hi, std::size_t bins);

/// Spherical projection. Nearest range wins a pixel; equal ranges go to the
/// lower point index.
RangeImage project(const PointCloud& cloud, const ProjectionConfig& cfg);

/// Per-point labels from per-pixel labels (H*W, row-major). Points that do
/// not own a pixel receive `default_class`.
LabelVector unproject_labels(std::span<const std::uint8_t> image_labels, const RangeImage& img,
                             std::uint8_t default_class);

/// RIMG container: "RIMG" | u32 version=1 | u32 H | u32 W | H*W*5 float32
/// (row-major, channels fastest) | H*W int32 pixel_to_point.
std::vector<std::byte> encode_range_image(const RangeImage& img);
/// Restores channels and pixel_to_point; per-point maps are not stored.
RangeImage decode_range_image(std::span<const std::byte> bytes);
void write_range_image(const RangeImage& img, const std::filesystem::path& path);
RangeImage read_range_image(const std::filesystem::path& path);

}  // namespace lts
