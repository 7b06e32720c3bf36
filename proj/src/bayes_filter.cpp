#include "lts/bayes_filter.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lts/error.hpp"
#include "lts/scan_io.hpp"

namespace lts {

void FilterConfig::validate() const {
  if (num_classes < 2) throw Error(ErrorKind::InvalidArgument, "filter needs at least 2 classes");
  if (num_classes > 256) throw Error(ErrorKind::InvalidArgument, "labels are 8-bit; at most 256 classes");
  if (!prior_logodds.empty() && prior_logodds.size() != num_classes) {
    throw Error(ErrorKind::InvalidArgument, "prior has " + std::to_string(prior_logodds.size()) +
                                                " entries for " + std::to_string(num_classes) + " classes");
  }
  for (double l0 : prior_logodds) {
    if (!std::isfinite(l0)) throw Error(ErrorKind::InvalidArgument, "prior log-odds must be finite");
  }
  if (!(score_epsilon > 0.0 && score_epsilon <= 0.01)) {
    throw Error(ErrorKind::InvalidArgument, "score epsilon must lie in (0, 0.01]");
  }
  if (!(logodds_clamp > 0.0)) throw Error(ErrorKind::InvalidArgument, "log-odds clamp must be > 0");
}

double logit(double p, double eps) {
  if (std::isnan(p)) throw Error(ErrorKind::InvalidArgument, "logit of NaN");
  const double q = std::clamp(p, eps, 1.0 - eps);
  return std::log(q / (1.0 - q));
}

FilterState::FilterState(std::size_t num_points, std::size_t num_classes, std::int64_t last_seen)
    : num_points_(num_points),
      num_classes_(num_classes),
      last_seen_(last_seen),
      logodds_(num_points * num_classes, 0.0) {}

namespace {

void check_row(std::span<const float> row, std::size_t i) {
  double sum = 0.0;
  for (float v : row) {
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw Error(ErrorKind::Range, "score row " + std::to_string(i) + " has an entry outside [0, 1]");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > io::kRowSumTolerance) {
    throw Error(ErrorKind::InvalidDistribution, "score row " + std::to_string(i) + " sums to " + std::to_string(sum));
  }
}

}  // namespace

FilterState update(const FilterState& state, const ClassScores& scores, const Correspondence& corr,
                   const FilterConfig& cfg) {
  cfg.validate();
  const std::size_t num_classes = cfg.num_classes;
  if (scores.num_classes() != num_classes) {
    throw Error(ErrorKind::DimensionMismatch, "scores carry " + std::to_string(scores.num_classes()) +
                                                  " classes, filter expects " + std::to_string(num_classes));
  }
  if (corr.size() != scores.num_points()) {
    throw Error(ErrorKind::DimensionMismatch, "correspondence covers " + std::to_string(corr.size()) +
                                                  " points, scores cover " + std::to_string(scores.num_points()));
  }
  if (!state.empty() && state.num_classes() != num_classes) {
    throw Error(ErrorKind::DimensionMismatch, "previous state has a different class count");
  }

  FilterState next(scores.num_points(), num_classes, state.last_seen() + 1);
  const double clamp = cfg.logodds_clamp;
  for (std::size_t i = 0; i < scores.num_points(); ++i) {
    const auto row = scores.row(i);
    check_row(row, i);
    const Match& m = corr.matches[i];
    if (m.matched() && static_cast<std::size_t>(m.prev_index) >= state.num_points()) {
      throw Error(ErrorKind::Range, "point " + std::to_string(i) + " matches previous index " +
                                        std::to_string(m.prev_index) + " but the state holds " +
                                        std::to_string(state.num_points()) + " points");
    }
    auto out = next.logodds(i);
    for (std::size_t c = 0; c < num_classes; ++c) {
      const double l0 = cfg.prior(c);
      // An unmatched point starts from l_{t-1} = l_0, which cancels the prior term.
      const double previous = m.matched() ? state.logodds(static_cast<std::size_t>(m.prev_index))[c] : l0;
      const double l = logit(row[c], cfg.score_epsilon) + previous - l0;
      out[c] = std::clamp(l, -clamp, clamp);
    }
  }
  return next;
}

LabelVector infer(const FilterState& state) {
  LabelVector labels(state.num_points(), 0);
  for (std::size_t i = 0; i < state.num_points(); ++i) {
    const auto l = state.logodds(i);
    std::size_t best = 0;
    for (std::size_t c = 1; c < l.size(); ++c) {
      if (l[c] > l[best]) best = c;
    }
    labels[i] = static_cast<std::uint8_t>(best);
  }
  return labels;
}

SequenceFilter::SequenceFilter(FilterConfig cfg, double assoc_max_dist)
    : cfg_(std::move(cfg)), assoc_max_dist_(assoc_max_dist) {
  cfg_.validate();
}

LabelVector SequenceFilter::step(const PointCloud& cloud, const ClassScores& scores, const Pose& motion) {
  if (scores.num_points() != cloud.size()) {
    throw Error(ErrorKind::DimensionMismatch, "scan has " + std::to_string(cloud.size()) + " points but " +
                                                  std::to_string(scores.num_points()) + " score rows");
  }
  if (scans_seen_ > 0 && assoc_max_dist_ > 0.0) {
    corr_ = associate(prev_, cloud, motion, assoc_max_dist_);
  } else {
    corr_ = Correspondence::unmatched(cloud.size(), prev_.size());
  }
  state_ = update(state_, scores, corr_, cfg_);
  prev_ = cloud;
  ++scans_seen_;
  return infer(state_);
}

}  // namespace lts
