#include "lts/projection.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "byte_codec.hpp"
#include "lts/error.hpp"
#include "lts/scan_io.hpp"

namespace lts {

void ProjectionConfig::validate() const {
  if (height < 1 || width < 1) throw Error(ErrorKind::InvalidArgument, "image height and width must be >= 1");
  if (!(azimuth_min < azimuth_max)) throw Error(ErrorKind::InvalidArgument, "azimuth fov min must be < max");
  if (!(elevation_min < elevation_max)) {
    throw Error(ErrorKind::InvalidArgument, "elevation fov min must be < max");
  }
}

std::size_t RangeImage::count(PointStatus status) const {
  return static_cast<std::size_t>(std::count(point_status.begin(), point_status.end(), status));
}

std::int64_t bin_index(double value, double lo, double hi, std::size_t bins) {
  if (!(value >= lo && value <= hi)) return -1;
  const auto idx = static_cast<std::int64_t>(std::floor((value - lo) / (hi - lo) * static_cast<double>(bins)));
  return std::min<std::int64_t>(idx, static_cast<std::int64_t>(bins) - 1);
}

RangeImage project(const PointCloud& cloud, const ProjectionConfig& cfg) {
  cfg.validate();
  const std::size_t n = cloud.size();
  RangeImage img;
  img.height = cfg.height;
  img.width = cfg.width;
  img.channels.assign(cfg.height * cfg.width * kRangeChannels, 0.0f);
  img.pixel_to_point.assign(cfg.height * cfg.width, -1);
  img.point_status.assign(n, PointStatus::OutOfView);
  img.point_to_pixel.assign(n, PixelIndex{});

  std::vector<double> best_range(cfg.height * cfg.width, 0.0);
  std::vector<double> ranges(n, 0.0);

  for (std::size_t i = 0; i < n; ++i) {
    const Point& p = cloud.points[i];
    const double x = p.x, y = p.y, z = p.z;
    const double r = std::sqrt(x * x + y * y + z * z);
    ranges[i] = r;
    if (r == 0.0) {
      img.point_status[i] = PointStatus::AtOrigin;
      continue;
    }
    const double azimuth = std::atan2(y, x);
    const double elevation = std::asin(std::clamp(z / r, -1.0, 1.0));
    const auto col = bin_index(azimuth, cfg.azimuth_min, cfg.azimuth_max, cfg.width);
    const auto elev_bin = bin_index(elevation, cfg.elevation_min, cfg.elevation_max, cfg.height);
    if (col < 0 || elev_bin < 0) continue;
    const auto row = static_cast<std::int64_t>(cfg.height) - 1 - elev_bin;
    img.point_to_pixel[i] = {static_cast<std::int32_t>(row), static_cast<std::int32_t>(col)};

    const std::size_t px = img.pixel(static_cast<std::size_t>(row), static_cast<std::size_t>(col));
    const std::int32_t owner = img.pixel_to_point[px];
    // Points arrive in index order, so a strict comparison keeps the lower index on ties.
    if (owner < 0 || r < best_range[px]) {
      if (owner >= 0) img.point_status[static_cast<std::size_t>(owner)] = PointStatus::Occluded;
      img.pixel_to_point[px] = static_cast<std::int32_t>(i);
      best_range[px] = r;
      img.point_status[i] = PointStatus::InView;
    } else {
      img.point_status[i] = PointStatus::Occluded;
    }
  }

  for (std::size_t px = 0; px < img.pixel_to_point.size(); ++px) {
    const std::int32_t owner = img.pixel_to_point[px];
    if (owner < 0) continue;
    const Point& p = cloud.points[static_cast<std::size_t>(owner)];
    float* ch = &img.channels[px * kRangeChannels];
    ch[kDepth] = static_cast<float>(ranges[static_cast<std::size_t>(owner)]);
    ch[kIntensity] = p.intensity;
    ch[kX] = p.x;
    ch[kY] = p.y;
    ch[kZ] = p.z;
  }
  return img;
}

LabelVector unproject_labels(std::span<const std::uint8_t> image_labels, const RangeImage& img,
                             std::uint8_t default_class) {
  if (image_labels.size() != img.height * img.width) {
    throw Error(ErrorKind::DimensionMismatch,
                "label image has " + std::to_string(image_labels.size()) + " pixels, range image has " +
                    std::to_string(img.height) + "x" + std::to_string(img.width));
  }
  LabelVector labels(img.point_status.size(), default_class);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (img.point_status[i] != PointStatus::InView) continue;
    const PixelIndex px = img.point_to_pixel[i];
    labels[i] = image_labels[img.pixel(static_cast<std::size_t>(px.row), static_cast<std::size_t>(px.col))];
  }
  return labels;
}

std::vector<std::byte> encode_range_image(const RangeImage& img) {
  detail::ByteWriter w(16 + img.channels.size() * 4 + img.pixel_to_point.size() * 4);
  w.magic("RIMG");
  w.u32(io::kFormatVersion);
  w.u32(static_cast<std::uint32_t>(img.height));
  w.u32(static_cast<std::uint32_t>(img.width));
  for (float v : img.channels) w.f32(v);
  for (std::int32_t v : img.pixel_to_point) w.i32(v);
  return w.take();
}

RangeImage decode_range_image(std::span<const std::byte> bytes) {
  detail::ByteReader reader(bytes, "range image");
  if (!reader.magic("RIMG")) throw Error(ErrorKind::Format, "range image has bad magic");
  const auto version = reader.u32();
  if (version != io::kFormatVersion) {
    throw Error(ErrorKind::Format, "unsupported range image version " + std::to_string(version));
  }
  const std::uint64_t h = reader.u32();
  const std::uint64_t w = reader.u32();
  if (h > 0 && w > reader.remaining() / h) {
    throw Error(ErrorKind::Format, "range image dimensions exceed the payload");
  }
  const std::uint64_t pixels = h * w;
  if (pixels * (kRangeChannels + 1) * 4 != reader.remaining()) {
    throw Error(ErrorKind::Format, "range image payload does not match " + std::to_string(h) + "x" +
                                       std::to_string(w));
  }
  RangeImage img;
  img.height = static_cast<std::size_t>(h);
  img.width = static_cast<std::size_t>(w);
  img.channels.resize(static_cast<std::size_t>(pixels) * kRangeChannels);
  for (auto& v : img.channels) v = reader.f32();
  img.pixel_to_point.resize(static_cast<std::size_t>(pixels));
  for (auto& v : img.pixel_to_point) v = reader.i32();
  return img;
}

void write_range_image(const RangeImage& img, const std::filesystem::path& path) {
  io::write_file(path, encode_range_image(img));
}

RangeImage read_range_image(const std::filesystem::path& path) {
  return decode_range_image(io::read_file(path));
}

}  // namespace lts
