// lts: command-line front end for the temporal LiDAR segmentation pipeline.
//
//   lts simulate --config scene.cfg --out data/
//   lts project  --scans data/velodyne --out imgs/ --width 324
//   lts filter   --scans data/velodyne --scores data/scores --poses data/poses.txt --out fused/
//   lts eval     --labels data/labels --scores data/scores --pred fused/ --out report/
//   lts netspec  --spec data/dblidarnet.netspec --input 64x512x5
//
// Exit codes: 0 success, 1 internal failure, 2 bad user input.

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "lts/error.hpp"
#include "lts/netspec.hpp"
#include "lts/pipeline.hpp"
#include "lts/simulate.hpp"

namespace {

constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("lts");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("LTS_LOG")) spdlog::set_level(spdlog::level::from_str(env));
}

// "--prior 0.0" applies to all classes, "--prior 0,-1.1,-1.1,-1.1" sets each.
std::vector<double> parse_prior(const std::string& text, std::size_t num_classes) {
  std::vector<double> values;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw lts::Error(lts::ErrorKind::Parse, "--prior: bad value '" + item + "'");
    }
  }
  if (values.size() == 1) values.assign(num_classes, values.front());
  return values;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();

  CLI::App app{"Temporally consistent LiDAR semantic labels via per-point binary Bayes filters"};
  app.require_subcommand(1);

  lts::RunManifest m;
  std::size_t num_classes = 4;
  std::string prior_text;

  auto* project = app.add_subcommand("project", "Project scans to 5-channel range images (RIMG)");
  project->add_option("--scans", m.scan_dir, "Directory of KITTI .bin scans")->required();
  project->add_option("--out", m.output_dir, "Output directory")->required();
  project->add_option("--width", m.projection.width, "Image width")->capture_default_str();
  project->add_option("--height", m.projection.height, "Image height")->capture_default_str();

  auto* filter = app.add_subcommand("filter", "Fuse per-point scores over time and write PLBL labels");
  filter->add_option("--scans", m.scan_dir, "Directory of KITTI .bin scans")->required();
  filter->add_option("--scores", m.score_dir, "Directory of PSCR score files")->required();
  filter->add_option("--poses", m.pose_file, "KITTI pose file (identity motion when omitted)");
  filter->add_option("--out", m.output_dir, "Output directory")->required();
  filter->add_option("--assoc-max-dist", m.assoc_max_dist, "Association distance in meters; 0 disables fusion")
      ->capture_default_str();
  filter->add_option("--prior", prior_text, "Prior log-odds: one value or one per class (default 0)");
  filter->add_option("--score-eps", m.filter.score_epsilon, "Score clamp epsilon")->capture_default_str();
  filter->add_option("--logodds-clamp", m.filter.logodds_clamp, "Log-odds saturation")->capture_default_str();
  filter->add_option("--num-classes", num_classes, "Classes per score row")->capture_default_str();

  auto* eval = app.add_subcommand("eval", "Class-wise IoU of raw argmax and filtered labels");
  eval->add_option("--labels", m.label_dir, "Ground-truth PLBL directory")->required();
  eval->add_option("--scores", m.score_dir, "PSCR directory, evaluated by argmax");
  eval->add_option("--pred", m.pred_dir, "Filtered PLBL directory");
  eval->add_option("--out", m.output_dir, "Directory for raw_iou.csv / filtered_iou.csv");
  eval->add_option("--num-classes", num_classes, "Number of classes")->capture_default_str();
  eval->add_flag("--include-background", m.include_background, "Count background in the mean IoU");

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic labelled sequence");
  std::filesystem::path config_path;
  std::optional<std::uint64_t> seed;
  simulate->add_option("--config", config_path, "Scene/noise configuration file")->required();
  simulate->add_option("--out", m.output_dir, "Output dataset directory")->required();
  simulate->add_option("--seed", seed, "Override the configured seed");

  auto* netspec = app.add_subcommand("netspec", "Layer shapes and parameter counts of a network spec");
  std::filesystem::path spec_path;
  std::string input_text = "64x512x5";
  netspec->add_option("--spec", spec_path, "Network spec file")->required();
  netspec->add_option("--input", input_text, "Input shape HxWxC")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*project) {
      const auto files = lts::run_project(m);
      spdlog::info("wrote {} range images", files.size());
    } else if (*filter) {
      m.filter.num_classes = num_classes;
      if (!prior_text.empty()) m.filter.prior_logodds = parse_prior(prior_text, num_classes);
      const auto files = lts::run_filter(m);
      spdlog::info("wrote {} label files", files.size());
    } else if (*eval) {
      lts::run_eval(m, num_classes, &std::cout);
    } else if (*simulate) {
      auto cfg = lts::sim::load_config(config_path);
      if (seed) cfg.noise.seed = *seed;
      lts::sim::write_dataset(lts::sim::generate(cfg.scene, cfg.noise), m.output_dir);
    } else if (*netspec) {
      const auto layers = lts::net::load_netspec(spec_path);
      const auto input = lts::net::parse_shape(input_text);
      lts::net::print_report(lts::net::derive_shapes(layers, input), lts::net::count_params(layers, input), std::cout);
    }
  } catch (const lts::Error& e) {
    std::cerr << "lts: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "lts: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "lts: internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return 0;
}
