#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <vector>

#include "lts/bayes_filter.hpp"
#include "lts/metrics.hpp"
#include "lts/projection.hpp"

namespace lts {

/// Inputs and settings of one directory-level run. Scans, scores and labels
/// are matched by sorted filename order (zero-padded stems).
struct RunManifest {
  std::filesystem::path scan_dir;
  std::filesystem::path pose_file;  // empty: identity ego-motion
  std::filesystem::path score_dir;
  std::filesystem::path label_dir;  // ground truth, eval only
  std::filesystem::path pred_dir;   // filtered labels, eval only
  std::filesystem::path output_dir;
  FilterConfig filter;
  ProjectionConfig projection;
  double assoc_max_dist = kDefaultAssocMaxDist;
  bool include_background = false;
};

/// One RIMG per scan; returns the written files.
std::vector<std::filesystem::path> run_project(const RunManifest& m);

/// Filters the score stream and writes one PLBL per scan.
std::vector<std::filesystem::path> run_filter(const RunManifest& m);

struct EvalResult {
  std::optional<IoUReport> raw;       // argmax of the score files
  std::optional<IoUReport> filtered;  // label files in pred_dir
  std::vector<ClassDelta> deltas;     // filtered - raw when both exist
};

/// Accumulates one confusion matrix over the whole sequence per source.
EvalResult run_eval(const RunManifest& m, std::size_t num_classes, std::ostream* table_out = nullptr);

}  // namespace lts
