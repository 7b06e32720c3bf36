#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <doctest.h>

#include "lts/bayes_filter.hpp"
#include "lts/error.hpp"
#include "lts/simulate.hpp"
#include "test_util.hpp"

using namespace lts;

namespace {

constexpr double kLn9 = 2.1972245773362196;  // ln(0.9 / 0.1)

ClassScores one_row(std::vector<float> row) {
  const std::size_t c = row.size();
  return ClassScores(1, c, std::move(row));
}

Correspondence self_match(std::size_t n) {
  Correspondence c = Correspondence::unmatched(n, n);
  for (std::size_t i = 0; i < n; ++i) c.matches[i] = Match{static_cast<std::int64_t>(i), 0.0};
  return c;
}

}  // namespace

TEST_CASE("logit") {
  CHECK(logit(0.5, 1e-7) == 0.0);
  CHECK(logit(0.9, 1e-7) == doctest::Approx(kLn9).epsilon(1e-12));
  CHECK(logit(1.0, 1e-7) == doctest::Approx(16.118095550958316).epsilon(1e-9));
  CHECK(logit(0.0, 1e-7) == doctest::Approx(-16.118095550958316).epsilon(1e-9));
  CHECK_THROWS_AS(logit(std::nan(""), 1e-7), Error);
}

TEST_CASE("config validation") {
  FilterConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.num_classes = 1;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.score_epsilon = 0.02;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.prior_logodds = {0.0, 0.0};
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.logodds_clamp = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.logodds_clamp = std::numeric_limits<double>::infinity();
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("update examples") {
  FilterConfig cfg;
  cfg.num_classes = 2;
  const ClassScores s = one_row({0.9f, 0.1f});
  const double x = logit(0.9f, cfg.score_epsilon);  // float 0.9 as stored

  SUBCASE("new point: prior cancels") {
    const FilterState st = update(FilterState{}, s, Correspondence::unmatched(1), cfg);
    CHECK(st.logodds(0)[0] == doctest::Approx(kLn9).epsilon(1e-7));
    CHECK(st.logodds(0)[0] == x);
  }
  SUBCASE("matched point seen twice") {
    const FilterState a = update(FilterState{}, s, Correspondence::unmatched(1), cfg);
    const FilterState b = update(a, s, self_match(1), cfg);
    CHECK(b.logodds(0)[0] == doctest::Approx(2 * kLn9).epsilon(1e-7));
    CHECK(b.last_seen() == 1);
  }
  SUBCASE("non-zero prior is subtracted once per step") {
    cfg.prior_logodds = {std::log(0.25 / 0.75), 0.0};
    FilterState prev(1, 2, 0);
    prev.logodds(0)[0] = kLn9;
    const FilterState next = update(prev, s, self_match(1), cfg);
    // ln9 + ln9 + ln3
    CHECK(next.logodds(0)[0] == doctest::Approx(5.493061443340549).epsilon(1e-7));
  }
}

TEST_CASE("update error paths") {
  FilterConfig cfg;
  cfg.num_classes = 2;
  const ClassScores s = one_row({0.9f, 0.1f});
  Correspondence bad = Correspondence::unmatched(1);
  bad.matches[0] = Match{3, 0.0};
  CHECK_THROWS_AS(update(FilterState(2, 2, 0), s, bad, cfg), Error);
  CHECK_THROWS_AS(update(FilterState{}, s, Correspondence::unmatched(2), cfg), Error);
  CHECK_THROWS_AS(update(FilterState{}, one_row({0.9f, 0.9f}), Correspondence::unmatched(1), cfg), Error);
  CHECK_THROWS_AS(update(FilterState{}, one_row({0.2f, 0.2f, 0.6f}), Correspondence::unmatched(1), cfg), Error);
}

TEST_CASE("infer") {
  FilterState st(2, 4, 0);
  const double a[] = {0.5, 2.0, -1.0, -3.0};
  std::copy(std::begin(a), std::end(a), st.logodds(0).begin());
  CHECK(infer(st) == LabelVector{1, 0});
}

TEST_CASE("single observation with a uniform prior equals raw argmax") {
  std::mt19937_64 rng(11);
  FilterConfig cfg;
  const ClassScores s = test::random_scores(rng, 500, 4);
  const FilterState st = update(FilterState{}, s, Correspondence::unmatched(500), cfg);
  CHECK(infer(st) == argmax_labels(s));
}

TEST_CASE("property: recursion equals the batch oracle") {
  std::mt19937_64 rng(2718);
  std::uniform_int_distribution<int> steps(1, 10);
  std::uniform_real_distribution<double> prior(-2.0, 2.0);
  FilterConfig cfg;
  cfg.logodds_clamp = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 200; ++trial) {
    cfg.prior_logodds = {prior(rng), prior(rng), prior(rng), prior(rng)};
    const int t_max = steps(rng);
    FilterState st;
    std::vector<std::vector<double>> sequence;
    for (int t = 0; t < t_max; ++t) {
      const ClassScores s = test::random_scores(rng, 1, 4, 0.01);
      sequence.emplace_back(s.row(0).begin(), s.row(0).end());
      st = update(st, s, t == 0 ? Correspondence::unmatched(1) : self_match(1), cfg);
    }
    const auto expected = sim::oracle_posterior(sequence, cfg.prior_logodds);
    for (std::size_t c = 0; c < 4; ++c) CHECK(std::abs(st.logodds(0)[c] - expected[c]) <= 1e-9);
  }
}

TEST_CASE("property: clamping keeps every log-odds finite and bounded") {
  std::mt19937_64 rng(5);
  FilterConfig cfg;
  cfg.num_classes = 3;
  FilterState st;
  for (int t = 0; t < 40; ++t) {
    ClassScores s(50, 3);
    for (std::size_t i = 0; i < 50; ++i) s.row(i)[i % 3] = 1.0f;  // exact one-hots
    st = update(st, s, t == 0 ? Correspondence::unmatched(50) : self_match(50), cfg);
  }
  for (double v : st.values()) {
    CHECK(std::isfinite(v));
    CHECK(std::abs(v) <= cfg.logodds_clamp);
  }
}

TEST_CASE("property: permuting classes permutes labels") {
  std::mt19937_64 rng(8);
  const std::vector<std::size_t> perm = {2, 0, 3, 1};  // new class k is old class perm[k]
  FilterConfig cfg, cfg_p;
  cfg.prior_logodds = {0.1, -0.3, 0.2, 0.0};
  cfg_p.prior_logodds.resize(4);
  for (std::size_t k = 0; k < 4; ++k) cfg_p.prior_logodds[k] = cfg.prior_logodds[perm[k]];
  FilterState st, st_p;
  for (int t = 0; t < 5; ++t) {
    const ClassScores s = test::random_scores(rng, 100, 4);
    ClassScores sp(100, 4);
    for (std::size_t i = 0; i < 100; ++i) {
      for (std::size_t k = 0; k < 4; ++k) sp.row(i)[k] = s.row(i)[perm[k]];
    }
    const auto corr = t == 0 ? Correspondence::unmatched(100) : self_match(100);
    st = update(st, s, corr, cfg);
    st_p = update(st_p, sp, corr, cfg_p);
  }
  const LabelVector a = infer(st), b = infer(st_p);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(perm[b[i]] == a[i]);
}

TEST_CASE("uniform observation leaves a matched point's argmax unchanged") {
  std::mt19937_64 rng(3);
  FilterConfig cfg;
  const ClassScores s = test::random_scores(rng, 200, 4);
  const FilterState a = update(FilterState{}, s, Correspondence::unmatched(200), cfg);
  ClassScores uniform(200, 4, std::vector<float>(800, 0.25f));
  const FilterState b = update(a, uniform, self_match(200), cfg);
  CHECK(infer(a) == infer(b));
}

TEST_CASE("sequence filter with association disabled is per-scan argmax") {
  std::mt19937_64 rng(13);
  const PointCloud cloud = test::random_cloud(rng, 300, 10.0);
  SequenceFilter off(FilterConfig{}, 0.0);
  for (int t = 0; t < 4; ++t) {
    const ClassScores s = test::random_scores(rng, 300, 4);
    CHECK(off.step(cloud, s, Pose::identity()) == argmax_labels(s));
    CHECK(off.last_correspondence().num_matched() == 0);
  }
  SequenceFilter on(FilterConfig{}, 0.5);
  on.step(cloud, test::random_scores(rng, 300, 4), Pose::identity());
  on.step(cloud, test::random_scores(rng, 300, 4), Pose::identity());
  CHECK(on.last_correspondence().num_matched() == 300);
}
