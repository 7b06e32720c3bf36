#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lts/association.hpp"
#include "lts/types.hpp"

namespace lts {

struct FilterConfig {
  std::size_t num_classes = 4;
  /// Initial log-odds per class; empty means 0 for every class.
  std::vector<double> prior_logodds;
  double score_epsilon = 1e-7;
  /// Symmetric clamp on the accumulated log-odds; +inf disables it.
  double logodds_clamp = 50.0;

  double prior(std::size_t c) const { return prior_logodds.empty() ? 0.0 : prior_logodds[c]; }
  void validate() const;
};

/// log(p / (1 - p)) after clamping p into [eps, 1 - eps].
double logit(double p, double eps);

/// Log-odds of every class for every point of the most recent scan.
class FilterState {
 public:
  FilterState() = default;
  FilterState(std::size_t num_points, std::size_t num_classes, std::int64_t last_seen);

  std::size_t num_points() const noexcept { return num_points_; }
  std::size_t num_classes() const noexcept { return num_classes_; }
  bool empty() const noexcept { return num_points_ == 0; }
  std::int64_t last_seen() const noexcept { return last_seen_; }

  std::span<const double> logodds(std::size_t point) const {
    return {logodds_.data() + point * num_classes_, num_classes_};
  }
  std::span<double> logodds(std::size_t point) { return {logodds_.data() + point * num_classes_, num_classes_}; }
  const std::vector<double>& values() const noexcept { return logodds_; }

 private:
  std::size_t num_points_ = 0;
  std::size_t num_classes_ = 0;
  std::int64_t last_seen_ = -1;
  std::vector<double> logodds_;
};

/// One recursion step: l_t = logit(score) + l_{t-1} - l_0 for matched points,
/// l_t = logit(score) for new ones. The returned state covers exactly the
/// points of the current scan.
FilterState update(const FilterState& state, const ClassScores& scores, const Correspondence& corr,
                   const FilterConfig& cfg);

/// Class with the largest log-odds per point; ties go to the lower index.
LabelVector infer(const FilterState& state);

/// Streams scans through association, update and inference.
class SequenceFilter {
 public:
  /// `assoc_max_dist` <= 0 disables association, which reduces the filter to
  /// per-scan argmax.
  SequenceFilter(FilterConfig cfg, double assoc_max_dist);

  /// `motion` maps the previous scan into the frame of `cloud`.
  LabelVector step(const PointCloud& cloud, const ClassScores& scores, const Pose& motion);

  const FilterState& state() const noexcept { return state_; }
  const Correspondence& last_correspondence() const noexcept { return corr_; }
  std::int64_t scans_seen() const noexcept { return scans_seen_; }

 private:
  FilterConfig cfg_;
  double assoc_max_dist_;
  FilterState state_;
  PointCloud prev_;
  Correspondence corr_;
  std::int64_t scans_seen_ = 0;
};

}  // namespace lts
