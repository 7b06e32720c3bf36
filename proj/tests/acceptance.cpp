// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/Geometry>
#include <fmt/core.h>

#include "lts/association.hpp"
#include "lts/bayes_filter.hpp"
#include "lts/metrics.hpp"
#include "lts/netspec.hpp"
#include "lts/projection.hpp"
#include "lts/scan_io.hpp"
#include "lts/simulate.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace lts;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Correspondence self_match(std::size_t n) {
  Correspondence c = Correspondence::unmatched(n, n);
  for (std::size_t i = 0; i < n; ++i) c.matches[i] = Match{static_cast<std::int64_t>(i), 0.0};
  return c;
}

Outcome filter_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<int> steps(1, 10);
  std::uniform_real_distribution<double> prior(-3.0, 3.0);
  FilterConfig cfg;
  cfg.logodds_clamp = std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (int seq = 0; seq < 1000; ++seq) {
    cfg.prior_logodds = {prior(rng), prior(rng), prior(rng), prior(rng)};
    const int t_max = steps(rng);
    FilterState st;
    std::vector<std::vector<double>> rows;
    for (int t = 0; t < t_max; ++t) {
      const ClassScores s = test::random_scores(rng, 1, 4, 0.001);
      rows.emplace_back(s.row(0).begin(), s.row(0).end());
      st = update(st, s, t == 0 ? Correspondence::unmatched(1) : self_match(1), cfg);
    }
    const auto expected = sim::oracle_posterior(rows, cfg.prior_logodds);
    for (std::size_t c = 0; c < 4; ++c) worst = std::max(worst, std::abs(st.logodds(0)[c] - expected[c]));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && secs < 5.0, fmt::format("max |err| {:.3g}, {:.2f} s", worst, secs)};
}

Outcome noise_robustness() {
  const auto t0 = Clock::now();
  sim::SceneSpec scene;
  scene.num_scans = 10;
  scene.ground_points = 3000;
  scene.points_per_object = 700;
  scene.objects = {
      {1, {12, 3, -1.0}, {4.2, 1.8, 1.5}, {0, 0, 0}},
      {1, {-9, -6, -1.0}, {4.2, 1.8, 1.5}, {0, 0, 0}},
      {2, {7, -4, -0.85}, {0.6, 0.6, 1.8}, {0, 0, 0}},
      {3, {-5, 8, -0.9}, {1.8, 0.6, 1.7}, {0, 0, 0}},
  };
  int improved = 0;
  double total_gain = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    sim::NoiseSpec noise;
    noise.flip_probability = 0.2;
    noise.seed = seed;
    const auto frames = sim::generate(scene, noise);
    SequenceFilter filter(FilterConfig{}, kDefaultAssocMaxDist);
    ConfusionMatrix raw(4), filtered(4);
    for (const auto& f : frames) {
      const LabelVector out = filter.step(f.cloud, f.scores, Pose::identity());
      accumulate(raw, f.labels, argmax_labels(f.scores));
      accumulate(filtered, f.labels, out);
    }
    const auto names = default_class_names(4);
    const double r = *iou_report(raw, names).mean_iou;
    const double q = *iou_report(filtered, names).mean_iou;
    improved += q > r;
    total_gain += q - r;
  }
  const double mean_gain = 100.0 * total_gain / 20.0;
  const double secs = seconds_since(t0);
  return {improved >= 19 && mean_gain >= 5.0 && secs < 60.0,
          fmt::format("{} points, improved {}/20 seeds, mean gain {:.2f} IoU points, {:.2f} s",
                      scene.points_per_scan(), improved, mean_gain, secs)};
}

Outcome association_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2002);
  std::uniform_int_distribution<std::size_t> size(0, 2000);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> dist(0.05, 1.5);
  std::size_t mismatches = 0;
  for (int pair = 0; pair < 200; ++pair) {
    const PointCloud prev = test::random_cloud(rng, size(rng), 15.0);
    const PointCloud curr = test::random_cloud(rng, size(rng), 15.0);
    Pose motion;
    motion.rotation = Eigen::AngleAxisd(u(rng) * 0.3, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    motion.translation = Eigen::Vector3d(u(rng), u(rng), 0.1 * u(rng));
    const double max_dist = dist(rng);
    const Correspondence got = associate(prev, curr, motion, max_dist);
    const auto aligned = transform_points(prev, motion);
    for (std::size_t i = 0; i < curr.size(); ++i) {
      const Eigen::Vector3d q(curr.points[i].x, curr.points[i].y, curr.points[i].z);
      double best = std::numeric_limits<double>::infinity();
      std::int64_t arg = -1;
      for (std::size_t j = 0; j < aligned.size(); ++j) {
        const double d2 = (aligned[j] - q).squaredNorm();
        if (d2 < best) {
          best = d2;
          arg = static_cast<std::int64_t>(j);
        }
      }
      if (arg < 0 || std::sqrt(best) > max_dist) arg = -1;
      const bool same = got.matches[i].prev_index == arg &&
                        (arg < 0 || std::abs(got.matches[i].distance - std::sqrt(best)) <= 1e-9);
      mismatches += !same;
    }
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 10.0, fmt::format("{} mismatches over 200 pairs, {:.2f} s", mismatches, secs)};
}

Outcome projection_consistency() {
  std::mt19937_64 rng(3003);
  std::uniform_int_distribution<std::size_t> size(1, 20000);
  std::uniform_int_distribution<int> label(0, 3);
  double worst = 0.0;
  std::size_t winners = 0, recovered = 0;
  const ProjectionConfig cfg;
  for (int cloud_i = 0; cloud_i < 100; ++cloud_i) {
    const PointCloud cloud = test::random_cloud(rng, size(rng), 30.0);
    const RangeImage img = project(cloud, cfg);
    LabelVector gt(cloud.size());
    for (auto& g : gt) g = static_cast<std::uint8_t>(label(rng));
    std::vector<std::uint8_t> image_labels(img.height * img.width, 0);
    for (std::size_t r = 0; r < img.height; ++r) {
      for (std::size_t c = 0; c < img.width; ++c) {
        if (!img.valid(r, c)) continue;
        const double x = img.at(r, c, kX), y = img.at(r, c, kY), z = img.at(r, c, kZ);
        worst = std::max(worst, std::abs(img.at(r, c, kDepth) - std::sqrt(x * x + y * y + z * z)));
        image_labels[img.pixel(r, c)] = gt[static_cast<std::size_t>(img.pixel_to_point[img.pixel(r, c)])];
      }
    }
    const LabelVector back = unproject_labels(image_labels, img, 0);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      if (img.point_status[i] != PointStatus::InView) continue;
      ++winners;
      recovered += back[i] == gt[i];
    }
  }
  return {worst <= 1e-5 && winners > 0 && recovered == winners,
          fmt::format("max depth err {:.3g}, recovered {}/{} winning points", worst, recovered, winners)};
}

const fs::path kData = LTS_DATA_DIR;

Outcome table_shapes() {
  struct Row {
    const char* name;
    net::Shape shape;
  };
  const Row table[] = {
      {"conv_0", {64, 512, 48}},     {"conv_1", {64, 512, 48}}, {"db_0", {64, 512, 144}},
      {"db_1", {32, 256, 272}},      {"db_2", {16, 128, 432}},  {"db_3", {16, 128, 240}},
      {"up_conv_0", {32, 256, 240}}, {"db_4", {32, 256, 128}},  {"up_conv_1", {64, 512, 128}},
      {"db_5", {64, 512, 96}},       {"conv_2", {64, 512, 4}},
  };
  const auto report = net::derive_shapes(net::load_netspec(kData / "dblidarnet.netspec"), {64, 512, 5});
  int ok = 0;
  std::string bad;
  for (const Row& row : table) {
    const auto* l = report.find(row.name);
    if (l && l->output == row.shape) {
      ++ok;
    } else {
      bad += std::string(" ") + row.name;
    }
  }
  return {ok == 11, fmt::format("{}/11 rows match{}", ok, bad.empty() ? "" : ", wrong:" + bad)};
}

Outcome parameter_claim() {
  // The variant with a standard db_3 is the one the parameter comparison refers to.
  const auto p = net::count_params(net::load_netspec(kData / "dblidarnet_db3_standard.netspec"), {64, 512, 5});
  const auto t = net::count_params(net::load_netspec(kData / "dblidarnet.netspec"), {64, 512, 5});
  const double std_dev = static_cast<double>(p.standard_decoder) / 3.6e6 - 1.0;
  const double sep_dev = static_cast<double>(p.separable_decoder) / 2.8e6 - 1.0;
  const bool pinned = p.standard_decoder == 3592944 && p.separable_decoder == 2829440 &&
                      t.standard_decoder == 2621904 && t.separable_decoder == 1858400;
  const bool pass = std::abs(std_dev) <= 0.15 && std::abs(sep_dev) <= 0.15 &&
                    p.separable_decoder < p.standard_decoder && pinned;
  return {pass, fmt::format("standard {} ({:+.1f}%), separable {} ({:+.1f}%); db_3-separable table variant {} / {}",
                            p.standard_decoder, 100 * std_dev, p.separable_decoder, 100 * sep_dev,
                            t.standard_decoder, t.separable_decoder)};
}

Outcome iou_arithmetic() {
  ConfusionMatrix cm(3);
  cm.at(0, 0) = 30;
  cm.at(1, 1) = 8;
  cm.at(0, 1) = 2;
  cm.at(1, 0) = 2;
  const auto r = iou_report(cm, {"background", "car", "pedestrian"});
  const double car = *r.classes[1].iou;
  const bool absent = !r.classes[2].iou.has_value() && !r.classes[2].in_mean;
  const bool pass = std::abs(car - 0.6667) <= 1e-4 && absent && r.mean_iou && *r.mean_iou == car;
  return {pass, fmt::format("car IoU {:.4f}, absent class excluded: {}", car, absent ? "yes" : "no")};
}

int run(const std::string& cmd) {
  return std::system((cmd + " > /dev/null 2>&1").c_str());
}

std::string cli_pipeline(const fs::path& root, const fs::path& cfg) {
  const std::string cli = LTS_CLI;
  const std::string r = root.string();
  std::string err;
  auto step = [&](const std::string& args) {
    if (err.empty() && run(cli + " " + args) != 0) err = args.substr(0, args.find(' '));
  };
  step("simulate --config " + cfg.string() + " --out " + r + "/data");
  step("project --scans " + r + "/data/velodyne --out " + r + "/rimg");
  step("filter --scans " + r + "/data/velodyne --scores " + r + "/data/scores --poses " + r +
       "/data/poses.txt --out " + r + "/filtered");
  step("eval --labels " + r + "/data/labels --scores " + r + "/data/scores --pred " + r + "/filtered --out " + r +
       "/eval");
  return err;
}

bool same_tree(const fs::path& a, const fs::path& b, std::size_t& files) {
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const fs::path other = b / fs::relative(e.path(), a);
    if (!fs::exists(other) || io::read_file(e.path()) != io::read_file(other)) return false;
    ++files;
  }
  std::size_t count_b = 0;
  for (const auto& e : fs::recursive_directory_iterator(b)) count_b += e.is_regular_file();
  return count_b == files;
}

std::size_t roundtrip_failures() {
  std::mt19937_64 rng(4004);
  std::uniform_int_distribution<std::size_t> n(0, 300);
  std::uniform_int_distribution<std::size_t> classes(2, 8);
  std::uniform_int_distribution<int> byte(0, 255);
  std::size_t failures = 0;
  test::TempDir dir("accept_rt");
  for (int k = 0; k < 1000; ++k) {
    const PointCloud cloud = test::random_cloud(rng, n(rng), 50.0);
    failures += io::decode_velodyne(io::encode_velodyne(cloud)).points != cloud.points;

    const ClassScores scores = test::random_scores(rng, n(rng), classes(rng));
    failures += !(io::decode_scores(io::encode_scores(scores)) == scores);

    LabelVector labels(n(rng));
    for (auto& l : labels) l = static_cast<std::uint8_t>(byte(rng));
    failures += io::decode_labels(io::encode_labels(labels)) != labels;

    ProjectionConfig cfg;
    cfg.height = 8 + k % 8;
    cfg.width = 16 + k % 32;
    const RangeImage img = project(cloud, cfg);
    const RangeImage back = decode_range_image(encode_range_image(img));
    failures += back.channels != img.channels || back.pixel_to_point != img.pixel_to_point;

    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Pose> poses(1 + k % 3);
    for (auto& p : poses) {
      p.rotation = Eigen::AngleAxisd(3.0 * u(rng), Eigen::Vector3d(u(rng), u(rng), u(rng)).normalized())
                       .toRotationMatrix();
      p.translation = Eigen::Vector3d(u(rng), u(rng), u(rng)) * 100.0;
    }
    io::write_pose_file(poses, dir / "poses.txt");
    const auto read = io::read_pose_file(dir / "poses.txt");
    bool ok = read.size() == poses.size();
    for (std::size_t i = 0; ok && i < poses.size(); ++i) {
      ok = read[i].rotation == poses[i].rotation && read[i].translation == poses[i].translation;
    }
    failures += !ok;
  }
  return failures;
}

Outcome determinism() {
  test::TempDir dir("accept_cli");
  const fs::path cfg = dir / "scene.cfg";
  {
    std::ofstream out(cfg);
    out << "num_scans = 5\nseed = 42\nnoise = flip 0.2\nground_points = 2000\npoints_per_object = 500\n"
           "sensor_velocity = 0.8 0.1 0\nsensor_yaw_rate = 0.01\n"
           "object = car 12 2 -0.9 4 2 1.6 0.3 0 0\nobject = pedestrian 8 -3 -0.8 0.6 0.6 1.8\n";
  }
  const std::string e1 = cli_pipeline(dir / "run1", cfg);
  const std::string e2 = cli_pipeline(dir / "run2", cfg);
  if (!e1.empty() || !e2.empty()) return {false, "cli step failed: " + (e1.empty() ? e2 : e1)};
  std::size_t files = 0;
  const bool identical = same_tree(dir / "run1", dir / "run2", files);
  const std::size_t rt = roundtrip_failures();
  return {identical && files > 0 && rt == 0,
          fmt::format("{} output files {}, roundtrip failures {} over 5x1000 cases", files,
                      identical ? "byte-identical" : "DIFFER", rt)};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"1 filter-oracle equivalence", filter_oracle},
      {"2 noise robustness", noise_robustness},
      {"3 association oracle", association_oracle},
      {"4 projection consistency", projection_consistency},
      {"5 layer table shapes", table_shapes},
      {"6 parameter claim", parameter_claim},
      {"7 IoU arithmetic", iou_arithmetic},
      {"8 determinism and formats", determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    fmt::print("{} {}: {}\n", o.pass ? "PASS" : "FAIL", name, o.detail);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
