// peeled: command-line front end for peeling meshes into layered depth/RGB maps,
// back-projecting them, and evaluating Chamfer and map losses.

#include "peel/camera.hpp"
#include "peel/dataset.hpp"
#include "peel/errors.hpp"
#include "peel/json_io.hpp"
#include "peel/losses.hpp"
#include "peel/peel_maps.hpp"
#include "peel/point_cloud.hpp"
#include "peel/render.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

namespace {

enum ExitStatus : int {
  kSuccess = 0,
  kQualityFailure = 1,
  kUsageError = 2,
  kIoError = 3,
};

using nlohmann::json;

void emit(const json& j) { std::cout << j.dump(2) << std::endl; }

std::vector<double> parse_angles(const std::string& text) {
  std::vector<double> angles;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) {
      continue;
    }
    try {
      std::size_t used = 0;
      angles.push_back(std::stod(item, &used));
      if (used != item.size()) {
        throw std::invalid_argument(item);
      }
    } catch (const std::exception&) {
      throw peel::ArgumentError("bad angle '" + item + "'");
    }
  }
  return angles;
}

struct PeelArgs {
  std::string mesh;
  std::string out;
  std::string camera;
  std::string depth_format = "pfm";
  int layers = peel::kDefaultLayers;
  int width = 512;
  int height = 512;
  double angle = 0.0;
  double distance = peel::kDefaultViewDistance;
  bool no_normalize = false;
  int threads = 0;
};

int run_peel(const PeelArgs& a) {
  peel::TriMesh mesh = peel::load_mesh(a.mesh);
  if (mesh.triangles.empty()) {
    std::cerr << "peel: " << a.mesh << " has no triangles\n";
    return kQualityFailure;
  }
  peel::ViewConfig view;
  if (!a.camera.empty()) {
    view = peel::load_view_config(a.camera);
  } else {
    const double angle[] = {a.angle};
    view = peel::view_ring(angle, a.distance, peel::Intrinsics::centered(a.width, a.height)).front();
  }
  std::optional<peel::UnitBoxTransform> unit_box;
  if (!a.no_normalize) {
    peel::NormalizedMesh normalized = peel::normalize_unit_box(mesh);
    mesh = std::move(normalized.mesh);
    unit_box = normalized.transform;
  }
  peel::RenderOptions options;
  options.layers = a.layers;
  options.threads = a.threads;
  peel::RenderDiagnostics diagnostics;
  peel::PeeledMapSet set = peel::render_peeled(mesh, view, options, &diagnostics);
  set.meta.source = a.mesh;
  set.meta.unit_box = unit_box;

  peel::EncodeOptions encode;
  encode.depth = a.depth_format == "png16" ? peel::DepthEncoding::kQuantized16Png
                                           : peel::DepthEncoding::kFloat32Pfm;
  const auto files = peel::encode_maps(set, a.out, encode);
  const peel::ValidationReport report = peel::validate(set);

  json j{{"layers", set.layers()},
         {"files", files.size()},
         {"out", a.out},
         {"validation", report},
         {"hit_pixels", diagnostics.hit_pixels},
         {"truncated_pixels", diagnostics.truncated_pixels},
         {"degenerate_triangles", diagnostics.degenerate_triangles}};
  emit(j);
  return report.clean() ? kSuccess : kQualityFailure;
}

struct BackprojectArgs {
  std::string maps;
  std::string out;
  bool world_frame = false;
  bool color_by_layer = false;
  bool ascii = false;
};

int run_backproject(const BackprojectArgs& a) {
  const peel::PeeledMapSet set = peel::decode_maps(a.maps);
  peel::BackprojectOptions options;
  options.world_frame = a.world_frame;
  peel::PointCloud cloud = peel::backproject_maps(set, options);
  if (a.color_by_layer) {
    cloud = peel::color_by_layer(std::move(cloud));
  }
  if (cloud.empty()) {
    std::cerr << "warning: " << a.maps << " has no foreground pixels; writing an empty cloud\n";
  }
  peel::write_ply(cloud, a.out,
                  a.ascii ? peel::PlyFormat::kAscii : peel::PlyFormat::kBinaryLittleEndian);
  emit(json{{"points", cloud.size()}, {"out", a.out}, {"validation", *set.meta.validation}});
  return kSuccess;
}

struct ChamferArgs {
  std::string a;
  std::string b;
  bool mean = false;
  int threads = 0;
};

int run_chamfer(const ChamferArgs& a) {
  const peel::PointCloud p = peel::read_ply(a.a);
  const peel::PointCloud q = peel::read_ply(a.b);
  if (p.empty() || q.empty()) {
    std::cerr << "chamfer: " << (p.empty() ? a.a : a.b) << " is empty\n";
    return kQualityFailure;
  }
  const peel::ChamferResult r = peel::chamfer(p, q, a.threads);
  json j = r;
  if (a.mean) {
    j["mean"] = 0.5 * (r.mean_fwd + r.mean_bwd);
  }
  emit(j);
  return kSuccess;
}

struct LossArgs {
  std::string pred;
  std::string gt;
  std::string gt_cloud;
  peel::LossWeights weights;
};

int run_losses(const LossArgs& a) {
  const peel::PeeledMapSet pred = peel::decode_maps(a.pred);
  const peel::PeeledMapSet gt = peel::decode_maps(a.gt);
  if (!pred.same_shape(gt)) {
    std::cerr << "losses: prediction and ground truth differ in layer count or resolution\n";
    return kUsageError;
  }
  const peel::PointCloud cloud = peel::read_ply(a.gt_cloud);
  emit(peel::combined_loss(pred, gt, cloud, a.weights));
  return kSuccess;
}

struct DatasetArgs {
  std::string input;
  std::string output;
  std::string views = "0,45,60,90";
  std::string log;
  int resolution = 512;
  int layers = peel::kDefaultLayers;
  double distance = peel::kDefaultViewDistance;
  std::uint64_t seed = 0;
  int threads = 0;
};

int run_dataset(const DatasetArgs& a) {
  peel::DatasetConfig cfg;
  cfg.views = parse_angles(a.views);
  cfg.resolution = a.resolution;
  cfg.layers = a.layers;
  cfg.distance = a.distance;
  cfg.seed = a.seed;
  cfg.output_root = a.output;
  cfg.threads = a.threads;

  std::ofstream log_file;
  std::ostream* sink = &std::cerr;
  if (!a.log.empty()) {
    log_file.open(a.log);
    if (!log_file) {
      throw peel::IoError(a.log, "cannot open log for writing");
    }
    sink = &log_file;
  }
  peel::RunLog log(sink);
  const peel::DatasetRun run = peel::generate_dataset(a.input, cfg, log);
  std::size_t violations = 0;
  for (const auto& e : run.manifest.entries) {
    violations += e.validation.total();
  }
  emit(json{{"entries", run.manifest.entries.size()},
            {"rendered", run.rendered},
            {"reused", run.reused},
            {"skipped_meshes", run.skipped_meshes},
            {"manifest", (std::filesystem::path(a.output) / "manifest.json").string()}});
  return violations == 0 ? kSuccess : kQualityFailure;
}

struct RoundtripArgs {
  std::string mesh;
  int resolution = 512;
  int layers = peel::kDefaultLayers;
  double angle = 0.0;
  double distance = peel::kDefaultViewDistance;
  std::optional<double> tolerance;
  bool no_normalize = false;
  std::uint64_t seed = 0;
  int threads = 0;
};

int run_roundtrip(const RoundtripArgs& a) {
  peel::DatasetConfig cfg;
  cfg.resolution = a.resolution;
  cfg.layers = a.layers;
  cfg.distance = a.distance;
  cfg.normalize = !a.no_normalize;
  cfg.seed = a.seed;
  cfg.threads = a.threads;
  cfg.views = {a.angle};
  const peel::ViewConfig view = cfg.view_configs().front();
  const peel::RoundtripReport report = peel::roundtrip_check(std::filesystem::path(a.mesh), view, cfg);
  const double tolerance = a.tolerance.value_or(1e-3 * report.bbox_diagonal);
  json j = peel::to_json(report);
  j["tolerance"] = tolerance;
  const bool ok = report.status == peel::RoundtripStatus::kOk &&
                  !(report.max_surface_distance > tolerance);
  j["pass"] = ok;
  emit(j);
  return ok ? kSuccess : kQualityFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Layered depth/RGB peeling of triangle meshes"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "peeled 0.1.0");
  std::function<int()> action;

  PeelArgs peel_args;
  auto* peel_cmd = app.add_subcommand("peel", "Render a mesh into peeled depth/RGB maps");
  peel_cmd->add_option("--mesh", peel_args.mesh, "Input mesh (.obj or .ply)")->required();
  peel_cmd->add_option("--out", peel_args.out, "Output directory")->required();
  peel_cmd->add_option("--layers", peel_args.layers, "Number of layers")
      ->check(CLI::Range(1, 255))->capture_default_str();
  peel_cmd->add_option("--width", peel_args.width, "Image width")->check(CLI::PositiveNumber)->capture_default_str();
  peel_cmd->add_option("--height", peel_args.height, "Image height")->check(CLI::PositiveNumber)->capture_default_str();
  peel_cmd->add_option("--view-angle", peel_args.angle, "Camera azimuth in degrees")->capture_default_str();
  peel_cmd->add_option("--distance", peel_args.distance, "Camera distance from the origin")
      ->check(CLI::PositiveNumber)->capture_default_str();
  peel_cmd->add_option("--camera", peel_args.camera, "Camera JSON; overrides size/angle/distance")
      ->check(CLI::ExistingFile);
  peel_cmd->add_option("--depth-format", peel_args.depth_format, "pfm or png16")
      ->check(CLI::IsMember({"pfm", "png16"}))->capture_default_str();
  peel_cmd->add_flag("--no-normalize", peel_args.no_normalize, "Render the mesh as is");
  peel_cmd->add_option("--threads", peel_args.threads, "Worker threads (0 = PEELED_THREADS or all)");
  peel_cmd->callback([&] { action = [&] { return run_peel(peel_args); }; });

  BackprojectArgs bp_args;
  auto* bp_cmd = app.add_subcommand("backproject", "Back-project a map directory to a PLY cloud");
  bp_cmd->add_option("--maps", bp_args.maps, "Map directory")->required();
  bp_cmd->add_option("--out", bp_args.out, "Output PLY")->required();
  bp_cmd->add_flag("--world-frame", bp_args.world_frame, "Undo the view pose and unit-box transform");
  bp_cmd->add_flag("--color-by-layer", bp_args.color_by_layer, "Color layers red, blue, green, yellow");
  bp_cmd->add_flag("--ascii", bp_args.ascii, "Write ASCII PLY");
  bp_cmd->callback([&] { action = [&] { return run_backproject(bp_args); }; });

  ChamferArgs ch_args;
  auto* ch_cmd = app.add_subcommand("chamfer", "Chamfer distance between two PLY clouds");
  ch_cmd->add_option("--a", ch_args.a, "First cloud")->required();
  ch_cmd->add_option("--b", ch_args.b, "Second cloud")->required();
  ch_cmd->add_flag("--mean", ch_args.mean, "Also report the average of the directed means");
  ch_cmd->add_option("--threads", ch_args.threads, "Worker threads");
  ch_cmd->callback([&] { action = [&] { return run_chamfer(ch_args); }; });

  LossArgs loss_args;
  auto* loss_cmd = app.add_subcommand("losses", "Weighted map and Chamfer losses");
  loss_cmd->add_option("--pred", loss_args.pred, "Predicted map directory")->required();
  loss_cmd->add_option("--gt", loss_args.gt, "Ground-truth map directory")->required();
  loss_cmd->add_option("--gt-cloud", loss_args.gt_cloud, "Ground-truth PLY cloud")->required();
  loss_cmd->add_option("--gamma", loss_args.weights.gamma, "Occlusion weight")->capture_default_str();
  loss_cmd->add_option("--lambda-depth", loss_args.weights.lambda_depth)->capture_default_str();
  loss_cmd->add_option("--lambda-cham", loss_args.weights.lambda_cham)->capture_default_str();
  loss_cmd->add_option("--lambda-rgb", loss_args.weights.lambda_rgb)->capture_default_str();
  loss_cmd->add_option("--lambda-smooth", loss_args.weights.lambda_smooth)->capture_default_str();
  loss_cmd->add_option("--adversarial", loss_args.weights.adversarial, "Externally computed GAN term")
      ->capture_default_str();
  loss_cmd->callback([&] { action = [&] { return run_losses(loss_args); }; });

  DatasetArgs ds_args;
  auto* ds_cmd = app.add_subcommand("dataset", "Render every mesh in a directory from a ring of views");
  ds_cmd->add_option("--input", ds_args.input, "Directory of .obj/.ply meshes")->required();
  ds_cmd->add_option("--output", ds_args.output, "Dataset root")->required();
  ds_cmd->add_option("--views", ds_args.views, "Comma-separated azimuths in degrees")->capture_default_str();
  ds_cmd->add_option("--resolution", ds_args.resolution, "Square image size")->capture_default_str();
  ds_cmd->add_option("--layers", ds_args.layers, "Number of layers")->capture_default_str();
  ds_cmd->add_option("--distance", ds_args.distance, "Camera distance")->capture_default_str();
  ds_cmd->add_option("--seed", ds_args.seed, "Seed")->capture_default_str();
  ds_cmd->add_option("--log", ds_args.log, "Run log path (default: stderr)");
  ds_cmd->add_option("--threads", ds_args.threads, "Worker threads");
  ds_cmd->callback([&] { action = [&] { return run_dataset(ds_args); }; });

  RoundtripArgs rt_args;
  auto* rt_cmd = app.add_subcommand("roundtrip", "Render, back-project and measure surface error");
  rt_cmd->add_option("--mesh", rt_args.mesh, "Input mesh")->required();
  rt_cmd->add_option("--resolution", rt_args.resolution, "Square image size")->capture_default_str();
  rt_cmd->add_option("--layers", rt_args.layers, "Number of layers")->capture_default_str();
  rt_cmd->add_option("--view-angle", rt_args.angle, "Camera azimuth in degrees")->capture_default_str();
  rt_cmd->add_option("--distance", rt_args.distance, "Camera distance")->capture_default_str();
  rt_cmd->add_option("--tolerance", rt_args.tolerance,
                     "Max surface distance (default 1e-3 x bounding-box diagonal)");
  rt_cmd->add_flag("--no-normalize", rt_args.no_normalize, "Render the mesh as is");
  rt_cmd->add_option("--seed", rt_args.seed, "Seed for the surface sample")->capture_default_str();
  rt_cmd->add_option("--threads", rt_args.threads, "Worker threads");
  rt_cmd->callback([&] { action = [&] { return run_roundtrip(rt_args); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    return action();
  } catch (const peel::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const peel::ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const peel::DegenerateGeometryError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kQualityFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoError;
  }
}
