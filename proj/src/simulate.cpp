#include "lts/simulate.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <Eigen/Geometry>
#include <fmt/format.h>

#include "lts/error.hpp"
#include "lts/scan_io.hpp"

namespace lts::sim {

namespace {

enum Stream : std::uint64_t { kGeometry = 1, kIntensity = 2, kFlip = 3, kDirichlet = 4 };

constexpr float kClassIntensity[] = {0.15f, 0.65f, 0.35f, 0.5f};

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

Eigen::Vector3d sample_box_surface(const Eigen::Vector3d& extents, std::uint64_t seed, std::uint64_t id) {
  const double ax = extents.y() * extents.z();
  const double ay = extents.x() * extents.z();
  const double az = extents.x() * extents.y();
  const double total = 2.0 * (ax + ay + az);
  double pick = counter_uniform(seed, kGeometry, id, 0) * total;
  const double u = counter_uniform(seed, kGeometry, id, 1) - 0.5;
  const double v = counter_uniform(seed, kGeometry, id, 2) - 0.5;
  const Eigen::Vector3d half = extents / 2.0;
  int face = 0;
  for (const double a : {ax, ax, ay, ay, az, az}) {
    if (pick < a || face == 5) break;
    pick -= a;
    ++face;
  }
  const double sign = (face % 2 == 0) ? 1.0 : -1.0;
  switch (face / 2) {
    case 0: return {sign * half.x(), u * extents.y(), v * extents.z()};
    case 1: return {u * extents.x(), sign * half.y(), v * extents.z()};
    default: return {u * extents.x(), v * extents.y(), sign * half.z()};
  }
}

Pose sensor_pose(const SceneSpec& scene, std::size_t t) {
  Pose p;
  p.rotation = Eigen::AngleAxisd(scene.sensor_yaw_rate * static_cast<double>(t), Eigen::Vector3d::UnitZ())
                   .toRotationMatrix();
  p.translation = scene.sensor_origin + scene.sensor_velocity * static_cast<double>(t);
  return p;
}

}  // namespace

std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t a, std::uint64_t b) {
  std::uint64_t h = splitmix(seed);
  h = splitmix(h ^ stream);
  h = splitmix(h ^ a);
  return splitmix(h ^ b);
}

double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t a, std::uint64_t b) {
  return static_cast<double>(counter_hash(seed, stream, a, b) >> 11) * 0x1.0p-53;
}

void SceneSpec::validate() const {
  if (num_scans < 1) throw Error(ErrorKind::Validation, "num_scans must be >= 1");
  if (num_classes < 2 || num_classes > 256) throw Error(ErrorKind::Validation, "num_classes must be in [2, 256]");
  if (!(ground_extent > 0.0)) throw Error(ErrorKind::Validation, "ground_extent must be positive");
  if (ground_points == 0 && objects.empty()) throw Error(ErrorKind::Validation, "scene has no points");
  if (!objects.empty() && points_per_object == 0) {
    throw Error(ErrorKind::Validation, "points_per_object must be positive");
  }
  for (std::size_t k = 0; k < objects.size(); ++k) {
    const auto& o = objects[k];
    if (!(o.extents.array() > 0.0).all()) {
      throw Error(ErrorKind::Validation, fmt::format("object {} has non-positive extents", k));
    }
    if (o.label >= num_classes) {
      throw Error(ErrorKind::Validation, fmt::format("object {} has label {} >= num_classes", k, o.label));
    }
  }
}

void NoiseSpec::validate() const {
  if (!(flip_probability >= 0.0 && flip_probability < 1.0)) {
    throw Error(ErrorKind::Validation, "flip probability must lie in [0, 1)");
  }
  if (!(concentration > 0.0)) throw Error(ErrorKind::Validation, "dirichlet concentration must be > 0");
}

std::vector<Frame> generate(const SceneSpec& scene, const NoiseSpec& noise) {
  scene.validate();
  noise.validate();
  const std::size_t n = scene.points_per_scan();
  const std::size_t num_classes = scene.num_classes;
  const std::uint64_t seed = noise.seed;

  std::vector<Frame> frames;
  frames.reserve(scene.num_scans);
  for (std::size_t t = 0; t < scene.num_scans; ++t) {
    Frame f;
    f.pose = sensor_pose(scene, t);
    const Pose world_to_sensor = f.pose.inverse();
    f.cloud.scan_id = static_cast<std::int64_t>(t);
    f.cloud.points.resize(n);
    f.labels.resize(n);
    f.point_ids.resize(n);

    for (std::size_t j = 0; j < n; ++j) {
      const std::uint64_t id = scene.resample ? t * n + j : j;
      Eigen::Vector3d world;
      std::uint8_t label = 0;
      if (j < scene.ground_points) {
        const double u = counter_uniform(seed, kGeometry, id, 0) - 0.5;
        const double v = counter_uniform(seed, kGeometry, id, 1) - 0.5;
        world = Eigen::Vector3d(scene.sensor_origin.x() + u * scene.ground_extent,
                                scene.sensor_origin.y() + v * scene.ground_extent, scene.ground_z);
      } else {
        const auto& obj = scene.objects[(j - scene.ground_points) / scene.points_per_object];
        world = obj.center + obj.velocity * static_cast<double>(t) + sample_box_surface(obj.extents, seed, id);
        label = obj.label;
      }
      const Eigen::Vector3d local = world_to_sensor.apply(world);
      const float base = label < 4 ? kClassIntensity[label] : 0.5f;
      const auto jitter = static_cast<float>(counter_uniform(seed, kIntensity, id, 0) * 0.1 - 0.05);
      f.cloud.points[j] = Point{static_cast<float>(local.x()), static_cast<float>(local.y()),
                                static_cast<float>(local.z()), std::clamp(base + jitter, 0.0f, 1.0f)};
      f.labels[j] = label;
      f.point_ids[j] = id;
    }

    f.scores = ClassScores(n, num_classes);
    for (std::size_t j = 0; j < n; ++j) {
      auto row = f.scores.row(j);
      const std::uint8_t truth = f.labels[j];
      if (noise.mode == NoiseMode::SymmetricFlip) {
        std::size_t observed = truth;
        if (counter_uniform(seed, kFlip, t, 2 * j) < noise.flip_probability) {
          const auto k = static_cast<std::size_t>(counter_uniform(seed, kFlip, t, 2 * j + 1) *
                                                  static_cast<double>(num_classes - 1));
          observed = k >= truth ? k + 1 : k;
        }
        row[observed] = 1.0f;
      } else {
        std::mt19937_64 engine(counter_hash(seed, kDirichlet, t, j));
        std::vector<double> draws(num_classes);
        double sum = 0.0;
        for (std::size_t c = 0; c < num_classes; ++c) {
          std::gamma_distribution<double> gamma(c == truth ? 1.0 + noise.concentration : 1.0, 1.0);
          draws[c] = gamma(engine);
          sum += draws[c];
        }
        for (std::size_t c = 0; c < num_classes; ++c) row[c] = static_cast<float>(draws[c] / sum);
      }
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

std::vector<double> oracle_posterior(std::span<const std::vector<double>> sequence, std::span<const double> prior) {
  if (sequence.empty()) throw Error(ErrorKind::InvalidArgument, "oracle needs at least one observation");
  const std::size_t num_classes = prior.size();
  std::vector<double> total(num_classes, 0.0);
  for (const auto& scores : sequence) {
    if (scores.size() != num_classes) throw Error(ErrorKind::DimensionMismatch, "score row / prior size mismatch");
    for (std::size_t c = 0; c < num_classes; ++c) total[c] += std::log(scores[c]) - std::log1p(-scores[c]);
  }
  const auto repeats = static_cast<double>(sequence.size() - 1);
  for (std::size_t c = 0; c < num_classes; ++c) total[c] -= repeats * prior[c];
  return total;
}

// --- config file -------------------------------------------------------------

namespace {

std::vector<std::string> tokens_of(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

double to_double(const std::string& tok, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used == tok.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::Parse, where + ": expected a number, got '" + tok + "'");
}

std::uint64_t to_uint(const std::string& tok, const std::string& where) {
  try {
    std::size_t used = 0;
    if (!tok.empty() && tok[0] != '-') {
      const auto v = std::stoull(tok, &used);
      if (used == tok.size()) return v;
    }
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::Parse, where + ": expected a non-negative integer, got '" + tok + "'");
}

Eigen::Vector3d to_vec3(const std::vector<std::string>& t, std::size_t from, const std::string& where) {
  return {to_double(t[from], where), to_double(t[from + 1], where), to_double(t[from + 2], where)};
}

void expect_count(const std::vector<std::string>& t, std::size_t n, const std::string& key, const std::string& where) {
  if (t.size() != n) {
    throw Error(ErrorKind::Parse, fmt::format("{}: '{}' takes {} value(s), got {}", where, key, n, t.size()));
  }
}

std::uint8_t class_index(const std::string& tok, const std::string& where) {
  const auto names = default_class_names(4);
  for (std::size_t c = 0; c < names.size(); ++c) {
    if (tok == names[c]) return static_cast<std::uint8_t>(c);
  }
  const auto v = to_uint(tok, where);
  if (v > 255) throw Error(ErrorKind::Parse, where + ": class index out of range");
  return static_cast<std::uint8_t>(v);
}

}  // namespace

SimulationConfig parse_config(const std::string& text, const std::string& source) {
  SimulationConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = fmt::format("{}:{}", source, line_no);
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (tokens_of(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::Parse, where + ": expected 'key = value'");
    const auto key_tokens = tokens_of(line.substr(0, eq));
    if (key_tokens.size() != 1) throw Error(ErrorKind::Parse, where + ": malformed key");
    const std::string& key = key_tokens[0];
    const auto v = tokens_of(line.substr(eq + 1));
    auto& s = cfg.scene;

    if (key == "num_scans") {
      expect_count(v, 1, key, where);
      s.num_scans = to_uint(v[0], where);
    } else if (key == "num_classes") {
      expect_count(v, 1, key, where);
      s.num_classes = to_uint(v[0], where);
    } else if (key == "seed") {
      expect_count(v, 1, key, where);
      cfg.noise.seed = to_uint(v[0], where);
    } else if (key == "noise") {
      expect_count(v, 2, key, where);
      if (v[0] == "flip") {
        cfg.noise.mode = NoiseMode::SymmetricFlip;
        cfg.noise.flip_probability = to_double(v[1], where);
      } else if (v[0] == "dirichlet") {
        cfg.noise.mode = NoiseMode::Dirichlet;
        cfg.noise.concentration = to_double(v[1], where);
      } else {
        throw Error(ErrorKind::Parse, where + ": noise mode must be 'flip' or 'dirichlet'");
      }
    } else if (key == "ground_extent") {
      expect_count(v, 1, key, where);
      s.ground_extent = to_double(v[0], where);
    } else if (key == "ground_z") {
      expect_count(v, 1, key, where);
      s.ground_z = to_double(v[0], where);
    } else if (key == "ground_points") {
      expect_count(v, 1, key, where);
      s.ground_points = to_uint(v[0], where);
    } else if (key == "points_per_object") {
      expect_count(v, 1, key, where);
      s.points_per_object = to_uint(v[0], where);
    } else if (key == "sensor_origin") {
      expect_count(v, 3, key, where);
      s.sensor_origin = to_vec3(v, 0, where);
    } else if (key == "sensor_velocity") {
      expect_count(v, 3, key, where);
      s.sensor_velocity = to_vec3(v, 0, where);
    } else if (key == "sensor_yaw_rate") {
      expect_count(v, 1, key, where);
      s.sensor_yaw_rate = to_double(v[0], where);
    } else if (key == "resample") {
      expect_count(v, 1, key, where);
      if (v[0] != "true" && v[0] != "false") throw Error(ErrorKind::Parse, where + ": resample must be true/false");
      s.resample = v[0] == "true";
    } else if (key == "object") {
      if (v.size() != 7 && v.size() != 10) {
        throw Error(ErrorKind::Parse, where + ": object takes 'class cx cy cz ex ey ez [vx vy vz]'");
      }
      SceneObject o;
      o.label = class_index(v[0], where);
      o.center = to_vec3(v, 1, where);
      o.extents = to_vec3(v, 4, where);
      if (v.size() == 10) o.velocity = to_vec3(v, 7, where);
      s.objects.push_back(o);
    } else {
      throw Error(ErrorKind::Parse, where + ": unknown key '" + key + "'");
    }
  }
  try {
    cfg.scene.validate();
    cfg.noise.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Validation, source + ": " + e.what());
  }
  return cfg;
}

SimulationConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

void write_dataset(const std::vector<Frame>& frames, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  for (const char* sub : {"velodyne", "scores", "labels"}) fs::create_directories(out_dir / sub);
  std::vector<Pose> poses;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const std::string stem = fmt::format("{:06d}", t);
    io::write_velodyne_bin(frames[t].cloud, out_dir / "velodyne" / (stem + ".bin"));
    io::write_scores(frames[t].scores, out_dir / "scores" / (stem + ".pscr"));
    io::write_labels(frames[t].labels, out_dir / "labels" / (stem + ".plbl"));
    poses.push_back(frames[t].pose);
  }
  io::write_pose_file(poses, out_dir / "poses.txt");
}

}  // namespace lts::sim
