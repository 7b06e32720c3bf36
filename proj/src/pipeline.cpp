#include "lts/pipeline.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "lts/association.hpp"
#include "lts/error.hpp"
#include "lts/scan_io.hpp"

namespace lts {

namespace fs = std::filesystem;

namespace {

void require_dir(const fs::path& p, const char* what) {
  if (p.empty()) throw Error(ErrorKind::InvalidArgument, std::string(what) + " directory is required");
  if (!fs::is_directory(p)) throw Error(ErrorKind::Io, std::string(what) + " directory not found: " + p.string());
}

void require_same_count(std::size_t a, const char* what_a, std::size_t b, const char* what_b) {
  if (a != b) {
    throw Error(ErrorKind::Validation, fmt::format("{} {} files but {} {} files", a, what_a, b, what_b));
  }
}

}  // namespace

std::vector<fs::path> run_project(const RunManifest& m) {
  require_dir(m.scan_dir, "scan");
  m.projection.validate();
  fs::create_directories(m.output_dir);
  std::vector<fs::path> written;
  for (const auto& scan : io::list_files(m.scan_dir, ".bin")) {
    const RangeImage img = project(io::read_velodyne_bin(scan), m.projection);
    auto out = m.output_dir / scan.filename().replace_extension(".rimg");
    write_range_image(img, out);
    spdlog::debug("{}: {} in view, {} occluded, {} out of view", scan.filename().string(),
                  img.count(PointStatus::InView), img.count(PointStatus::Occluded), img.count(PointStatus::OutOfView));
    written.push_back(std::move(out));
  }
  return written;
}

std::vector<fs::path> run_filter(const RunManifest& m) {
  require_dir(m.scan_dir, "scan");
  require_dir(m.score_dir, "score");
  const auto scans = io::list_files(m.scan_dir, ".bin");
  const auto scores = io::list_files(m.score_dir, ".pscr");
  require_same_count(scans.size(), "scan", scores.size(), "score");

  std::optional<PoseSequenceMotion> poses;
  if (!m.pose_file.empty()) {
    auto list = io::read_pose_file(m.pose_file);
    if (list.size() < scans.size()) {
      throw Error(ErrorKind::Validation, fmt::format("{} poses for {} scans", list.size(), scans.size()));
    }
    poses.emplace(std::move(list));
  }

  fs::create_directories(m.output_dir);
  SequenceFilter filter(m.filter, m.assoc_max_dist);
  std::vector<fs::path> written;
  for (std::size_t t = 0; t < scans.size(); ++t) {
    const PointCloud cloud = io::read_velodyne_bin(scans[t]);
    const ClassScores s = io::read_scores(scores[t]);
    if (s.num_points() != cloud.size()) {
      throw Error(ErrorKind::Validation, fmt::format("{} has {} points but {} has {} rows", scans[t].string(),
                                                     cloud.size(), scores[t].string(), s.num_points()));
    }
    const Pose motion = (poses && t > 0) ? poses->motion(t) : Pose::identity();
    const LabelVector labels = filter.step(cloud, s, motion);
    spdlog::debug("scan {}: {}/{} points associated", t, filter.last_correspondence().num_matched(), cloud.size());
    auto out = m.output_dir / scans[t].filename().replace_extension(".plbl");
    io::write_labels(labels, out);
    written.push_back(std::move(out));
  }
  return written;
}

EvalResult run_eval(const RunManifest& m, std::size_t num_classes, std::ostream* table_out) {
  require_dir(m.label_dir, "label");
  if (m.score_dir.empty() && m.pred_dir.empty()) {
    throw Error(ErrorKind::InvalidArgument, "eval needs a score directory, a prediction directory, or both");
  }
  const auto gt_files = io::list_files(m.label_dir, ".plbl");
  std::vector<LabelVector> gt;
  gt.reserve(gt_files.size());
  for (const auto& f : gt_files) gt.push_back(io::read_labels(f));

  std::vector<std::string> names = default_class_names(num_classes);
  EvalResult result;

  if (!m.score_dir.empty()) {
    require_dir(m.score_dir, "score");
    const auto files = io::list_files(m.score_dir, ".pscr");
    require_same_count(files.size(), "score", gt_files.size(), "label");
    ConfusionMatrix cm(num_classes);
    for (std::size_t t = 0; t < files.size(); ++t) {
      const ClassScores s = io::read_scores(files[t]);
      if (s.num_classes() != num_classes) {
        throw Error(ErrorKind::Validation,
                    fmt::format("{} carries {} classes, expected {}", files[t].string(), s.num_classes(), num_classes));
      }
      accumulate(cm, gt[t], argmax_labels(s));
    }
    result.raw = iou_report(cm, names, m.include_background);
  }
  if (!m.pred_dir.empty()) {
    require_dir(m.pred_dir, "prediction");
    const auto files = io::list_files(m.pred_dir, ".plbl");
    require_same_count(files.size(), "prediction", gt_files.size(), "label");
    ConfusionMatrix cm(num_classes);
    for (std::size_t t = 0; t < files.size(); ++t) accumulate(cm, gt[t], io::read_labels(files[t]));
    result.filtered = iou_report(cm, names, m.include_background);
  }
  if (result.raw && result.filtered) result.deltas = compare_reports(*result.raw, *result.filtered);

  if (!m.output_dir.empty()) {
    fs::create_directories(m.output_dir);
    if (result.raw) write_report_csv(*result.raw, m.output_dir / "raw_iou.csv");
    if (result.filtered) write_report_csv(*result.filtered, m.output_dir / "filtered_iou.csv");
  }
  if (table_out) {
    if (result.raw) {
      *table_out << "raw (argmax of scores)\n";
      print_report(*result.raw, *table_out);
    }
    if (result.filtered) {
      *table_out << (result.raw ? "\n" : "") << "filtered\n";
      print_report(*result.filtered, *table_out);
    }
    if (!result.deltas.empty()) {
      *table_out << "\nfiltered - raw\n";
      print_deltas(result.deltas, *table_out);
    }
  }
  return result;
}

}  // namespace lts
