#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "lts/association.hpp"
#include "lts/bayes_filter.hpp"
#include "lts/error.hpp"
#include "lts/metrics.hpp"
#include "lts/netspec.hpp"
#include "lts/projection.hpp"
#include "lts/scan_io.hpp"
#include "lts/simulate.hpp"

namespace py = pybind11;
using namespace lts;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using ByteArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

template <typename T>
py::array_t<T> to_array(const std::vector<T>& v, std::vector<py::ssize_t> shape) {
  py::array_t<T> out(shape);
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

void require_shape(const py::array& a, py::ssize_t ndim, py::ssize_t min_cols, const char* what) {
  if (a.ndim() != ndim || (ndim == 2 && a.shape(1) < min_cols)) {
    throw Error(ErrorKind::DimensionMismatch,
                std::string(what) + " must be " + (ndim == 2 ? "an (N, " + std::to_string(min_cols) + "+) array" : "1-D"));
  }
}

// Columns x, y, z and optionally intensity.
PointCloud cloud_from(const FloatArray& a) {
  require_shape(a, 2, 3, "points");
  PointCloud c;
  const auto r = a.unchecked<2>();
  c.points.resize(static_cast<std::size_t>(r.shape(0)));
  for (py::ssize_t i = 0; i < r.shape(0); ++i) {
    c.points[i] = Point{r(i, 0), r(i, 1), r(i, 2), r.shape(1) > 3 ? r(i, 3) : 0.0f};
  }
  return c;
}

py::array_t<float> cloud_to(const PointCloud& c) {
  py::array_t<float> out({static_cast<py::ssize_t>(c.size()), py::ssize_t{4}});
  auto w = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < c.size(); ++i) {
    w(i, 0) = c.points[i].x;
    w(i, 1) = c.points[i].y;
    w(i, 2) = c.points[i].z;
    w(i, 3) = c.points[i].intensity;
  }
  return out;
}

ClassScores scores_from(const FloatArray& a) {
  require_shape(a, 2, 1, "scores");
  const std::vector<float> v(a.data(), a.data() + a.size());
  return ClassScores(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)), v);
}

py::array_t<float> scores_to(const ClassScores& s) {
  return to_array(s.values(), {static_cast<py::ssize_t>(s.num_points()), static_cast<py::ssize_t>(s.num_classes())});
}

LabelVector labels_from(const ByteArray& a) {
  require_shape(a, 1, 0, "labels");
  return LabelVector(a.data(), a.data() + a.size());
}

py::array_t<std::uint8_t> labels_to(const LabelVector& l) {
  return to_array(l, {static_cast<py::ssize_t>(l.size())});
}

// 4x4 homogeneous or 3x4 matrix.
Pose pose_from(const DoubleArray& a) {
  if (a.ndim() != 2 || a.shape(1) != 4 || (a.shape(0) != 3 && a.shape(0) != 4)) {
    throw Error(ErrorKind::DimensionMismatch, "pose must be a 3x4 or 4x4 array");
  }
  const auto r = a.unchecked<2>();
  Pose p;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) p.rotation(i, j) = r(i, j);
    p.translation(i) = r(i, 3);
  }
  return p;
}

py::array_t<double> pose_to(const Pose& p) {
  py::array_t<double> out({py::ssize_t{4}, py::ssize_t{4}});
  auto w = out.mutable_unchecked<2>();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) w(i, j) = i == 3 ? (j == 3 ? 1.0 : 0.0) : (j == 3 ? p.translation(i) : p.rotation(i, j));
  }
  return out;
}

py::dict report_to(const IoUReport& r) {
  py::list classes;
  for (const auto& c : r.classes) {
    py::dict d;
    d["name"] = c.name;
    d["tp"] = c.tp;
    d["fp"] = c.fp;
    d["fn"] = c.fn;
    d["iou"] = c.iou ? py::cast(*c.iou) : py::none();
    d["in_mean"] = c.in_mean;
    classes.append(d);
  }
  py::dict out;
  out["classes"] = classes;
  out["mean_iou"] = r.mean_iou ? py::cast(*r.mean_iou) : py::none();
  return out;
}

/// Filter over a stream of scans held as numpy arrays.
class PyFilter {
 public:
  PyFilter(std::size_t num_classes, std::vector<double> prior, double assoc_max_dist, double score_epsilon,
           double logodds_clamp)
      : filter_(make_config(num_classes, std::move(prior), score_epsilon, logodds_clamp), assoc_max_dist) {}

  py::array_t<std::uint8_t> step(const FloatArray& points, const FloatArray& scores, const std::optional<DoubleArray>& motion) {
    return labels_to(filter_.step(cloud_from(points), scores_from(scores), motion ? pose_from(*motion) : Pose::identity()));
  }

  py::array_t<double> logodds() const {
    const auto& s = filter_.state();
    return to_array(s.values(), {static_cast<py::ssize_t>(s.num_points()), static_cast<py::ssize_t>(s.num_classes())});
  }

  std::int64_t scans_seen() const { return filter_.scans_seen(); }

 private:
  static FilterConfig make_config(std::size_t c, std::vector<double> prior, double eps, double clamp) {
    FilterConfig cfg;
    cfg.num_classes = c;
    cfg.prior_logodds = std::move(prior);
    cfg.score_epsilon = eps;
    cfg.logodds_clamp = clamp;
    return cfg;
  }

  SequenceFilter filter_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Temporal semantic filtering of LiDAR scans";
  py::register_exception<Error>(m, "LtsError", PyExc_ValueError);

  m.def("read_scan", [](const std::filesystem::path& p) { return cloud_to(io::read_velodyne_bin(p)); }, py::arg("path"));
  m.def("write_scan", [](const std::filesystem::path& p, const FloatArray& a) { io::write_velodyne_bin(cloud_from(a), p); },
        py::arg("path"), py::arg("points"));
  m.def("read_scores", [](const std::filesystem::path& p) { return scores_to(io::read_scores(p)); }, py::arg("path"));
  m.def("write_scores", [](const std::filesystem::path& p, const FloatArray& a) { io::write_scores(scores_from(a), p); },
        py::arg("path"), py::arg("scores"));
  m.def("read_labels", [](const std::filesystem::path& p) { return labels_to(io::read_labels(p)); }, py::arg("path"));
  m.def("write_labels", [](const std::filesystem::path& p, const ByteArray& a) { io::write_labels(labels_from(a), p); },
        py::arg("path"), py::arg("labels"));
  m.def(
      "read_poses",
      [](const std::filesystem::path& p) {
        py::list out;
        for (const auto& pose : io::read_pose_file(p)) out.append(pose_to(pose));
        return out;
      },
      py::arg("path"), "List of 4x4 sensor-to-world matrices.");

  m.def(
      "project",
      [](const FloatArray& points, std::size_t height, std::size_t width) {
        ProjectionConfig cfg;
        cfg.height = height;
        cfg.width = width;
        const RangeImage img = project(cloud_from(points), cfg);
        const auto h = static_cast<py::ssize_t>(img.height), w = static_cast<py::ssize_t>(img.width);
        std::vector<std::uint8_t> status(img.point_status.size());
        std::transform(img.point_status.begin(), img.point_status.end(), status.begin(),
                       [](PointStatus s) { return static_cast<std::uint8_t>(s); });
        py::dict out;
        out["image"] = to_array(img.channels, {h, w, static_cast<py::ssize_t>(kRangeChannels)});
        out["pixel_to_point"] = to_array(img.pixel_to_point, {h, w});
        out["status"] = to_array(status, {static_cast<py::ssize_t>(status.size())});
        return out;
      },
      py::arg("points"), py::arg("height") = 64, py::arg("width") = 512,
      "Spherical projection. image channels: depth, intensity, x, y, z. status: 0 in view, 1 occluded, "
      "2 out of view, 3 at origin.");

  m.def(
      "associate",
      [](const FloatArray& prev, const FloatArray& curr, const std::optional<DoubleArray>& motion, double max_dist) {
        const Correspondence c =
            associate(cloud_from(prev), cloud_from(curr), motion ? pose_from(*motion) : Pose::identity(), max_dist);
        std::vector<std::int64_t> idx(c.size());
        std::vector<double> dist(c.size());
        for (std::size_t i = 0; i < c.size(); ++i) {
          idx[i] = c.matches[i].prev_index;
          dist[i] = c.matches[i].distance;
        }
        const auto n = static_cast<py::ssize_t>(c.size());
        return py::make_tuple(to_array(idx, {n}), to_array(dist, {n}));
      },
      py::arg("prev"), py::arg("curr"), py::arg("motion") = py::none(), py::arg("max_dist") = kDefaultAssocMaxDist,
      "Nearest previous point per current point; index -1 when none lies within max_dist.");

  m.def("logit", &logit, py::arg("p"), py::arg("eps") = 1e-7);
  m.def(
      "oracle_posterior",
      [](const DoubleArray& seq, const std::vector<double>& prior) {
        require_shape(seq, 2, 1, "sequence");
        std::vector<std::vector<double>> rows(static_cast<std::size_t>(seq.shape(0)));
        for (std::size_t t = 0; t < rows.size(); ++t) {
          rows[t].assign(seq.data() + t * seq.shape(1), seq.data() + (t + 1) * seq.shape(1));
        }
        return sim::oracle_posterior(rows, prior);
      },
      py::arg("sequence"), py::arg("prior"));

  py::class_<PyFilter>(m, "BayesFilter")
      .def(py::init<std::size_t, std::vector<double>, double, double, double>(), py::arg("num_classes") = 4,
           py::arg("prior") = std::vector<double>{}, py::arg("assoc_max_dist") = kDefaultAssocMaxDist,
           py::arg("score_epsilon") = 1e-7, py::arg("logodds_clamp") = 50.0)
      .def("step", &PyFilter::step, py::arg("points"), py::arg("scores"), py::arg("motion") = py::none())
      .def_property_readonly("logodds", &PyFilter::logodds)
      .def_property_readonly("scans_seen", &PyFilter::scans_seen);

  m.def(
      "iou",
      [](const ByteArray& gt, const ByteArray& pred, std::size_t num_classes, bool include_background) {
        ConfusionMatrix cm(num_classes);
        accumulate(cm, labels_from(gt), labels_from(pred));
        return report_to(iou_report(cm, default_class_names(num_classes), include_background));
      },
      py::arg("gt"), py::arg("pred"), py::arg("num_classes") = 4, py::arg("include_background") = false);

  m.def(
      "simulate",
      [](const std::string& config) {
        const auto cfg = sim::parse_config(config);
        py::list out;
        for (const auto& f : sim::generate(cfg.scene, cfg.noise)) {
          py::dict d;
          d["points"] = cloud_to(f.cloud);
          d["labels"] = labels_to(f.labels);
          d["scores"] = scores_to(f.scores);
          d["pose"] = pose_to(f.pose);
          d["point_ids"] = to_array(f.point_ids, {static_cast<py::ssize_t>(f.point_ids.size())});
          out.append(d);
        }
        return out;
      },
      py::arg("config"), "Generate frames from configuration text.");

  m.def(
      "netspec",
      [](const std::string& text, const std::string& input) {
        const auto layers = net::parse_netspec(text);
        const auto shape = net::parse_shape(input);
        const auto shapes = net::derive_shapes(layers, shape);
        const auto params = net::count_params(layers, shape);
        py::list rows;
        for (const auto& l : shapes.layers) {
          rows.append(py::make_tuple(l.name, py::make_tuple(l.output.h, l.output.w, l.output.c)));
        }
        py::dict out;
        out["layers"] = rows;
        out["warnings"] = shapes.warnings;
        out["as_specified"] = params.as_specified;
        out["all_standard"] = params.all_standard;
        out["standard_decoder"] = params.standard_decoder;
        out["separable_decoder"] = params.separable_decoder;
        return out;
      },
      py::arg("text"), py::arg("input") = "64x512x5", "Output shapes and weight totals of a network description.");
}
