#include "peel/dataset.hpp"

#include "peel/bvh.hpp"
#include "peel/errors.hpp"
#include "peel/image_io.hpp"
#include "peel/json_io.hpp"
#include "peel/losses.hpp"
#include "peel/parallel.hpp"
#include "peel/render.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

namespace peel {

namespace fs = std::filesystem;
using nlohmann::json;

void DatasetConfig::validate() const {
  if (resolution < 32) {
    throw ArgumentError("dataset: resolution must be at least 32");
  }
  if (views.empty()) {
    throw ArgumentError("dataset: no views");
  }
  if (std::set<double>(views.begin(), views.end()).size() != views.size()) {
    throw ArgumentError("dataset: duplicate view angles");
  }
  if (layers < 1) {
    throw ArgumentError("dataset: layers must be at least 1");
  }
  if (!(distance > 0.0)) {
    throw ArgumentError("dataset: camera distance must be positive");
  }
}

Intrinsics DatasetConfig::camera() const {
  return intrinsics.value_or(Intrinsics::centered(resolution, resolution));
}

std::vector<ViewConfig> DatasetConfig::view_configs() const {
  validate();
  return view_ring(views, distance, camera());
}

void to_json(json& j, const Manifest& manifest) {
  json entries = json::array();
  for (const ManifestEntry& e : manifest.entries) {
    json files = json::array();
    for (const FileChecksum& f : e.files) {
      files.push_back({{"name", f.name}, {"crc32", f.crc32}});
    }
    entries.push_back({{"source", e.source},
                       {"view_label", e.view_label},
                       {"sample_dir", e.sample_dir},
                       {"unit_box", e.unit_box},
                       {"files", files},
                       {"validation", e.validation}});
  }
  j = json{{"entries", entries}};
}

void from_json(const json& j, Manifest& manifest) {
  manifest.entries.clear();
  for (const json& e : j.at("entries")) {
    ManifestEntry entry;
    entry.source = e.at("source").get<std::string>();
    entry.view_label = e.at("view_label").get<std::string>();
    entry.sample_dir = e.at("sample_dir").get<std::string>();
    entry.unit_box = e.at("unit_box").get<UnitBoxTransform>();
    for (const json& f : e.at("files")) {
      entry.files.push_back({f.at("name").get<std::string>(), f.at("crc32").get<std::uint32_t>()});
    }
    entry.validation = e.at("validation").get<ValidationReport>();
    manifest.entries.push_back(std::move(entry));
  }
}

Manifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError(path, "cannot open");
  }
  try {
    return json::parse(in).get<Manifest>();
  } catch (const json::exception& e) {
    throw ParseError(ParseErrorKind::kMalformedData, path, e.what());
  }
}

void write_manifest(const Manifest& manifest, const fs::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError(path, "cannot open for writing");
  }
  out << json(manifest).dump(2) << '\n';
  if (!out) {
    throw IoError(path, "write failed");
  }
}

bool verify_entry(const fs::path& root, const ManifestEntry& entry) {
  if (entry.files.empty()) {
    return false;
  }
  for (const FileChecksum& f : entry.files) {
    const fs::path path = root / entry.sample_dir / f.name;
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) {
      return false;
    }
    if (file_crc32(path) != f.crc32) {
      return false;
    }
  }
  return true;
}

void RunLog::record(const std::string& event, const std::string& path, const std::string& reason,
                    double duration_ms) {
  json j{{"event", event}, {"path", path}, {"duration_ms", duration_ms}};
  if (!reason.empty()) {
    j["reason"] = reason;
  }
  if (sink_) {
    *sink_ << j.dump() << '\n';
  }
  events_.push_back(std::move(j));
}

std::size_t RunLog::count(const std::string& event) const {
  return static_cast<std::size_t>(std::count_if(
      events_.begin(), events_.end(), [&](const json& j) { return j.at("event") == event; }));
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Loads a mesh for rendering; logs and returns nullopt when it cannot be used.
std::optional<TriMesh> load_usable_mesh(const fs::path& mesh_path, RunLog& log,
                                        Clock::time_point start) {
  try {
    TriMesh mesh = load_mesh(mesh_path);
    if (mesh.triangles.empty()) {
      log.record("skip", mesh_path.string(), "empty mesh", elapsed_ms(start));
      return std::nullopt;
    }
    if (!(mesh.surface_area() > 0.0)) {
      log.record("skip", mesh_path.string(), "zero-area mesh", elapsed_ms(start));
      return std::nullopt;
    }
    return mesh;
  } catch (const std::exception& e) {
    log.record("skip", mesh_path.string(), e.what(), elapsed_ms(start));
    return std::nullopt;
  }
}

std::optional<ManifestEntry> render_sample(const TriMesh& mesh, const fs::path& mesh_path,
                                           const ViewConfig& view, const DatasetConfig& cfg,
                                           RunLog& log, Clock::time_point start) {
  const std::string sample_dir = (fs::path(mesh_path.stem()) / view.label).generic_string();
  try {
    TriMesh prepared = mesh;
    UnitBoxTransform unit_box;
    if (cfg.normalize) {
      NormalizedMesh normalized = normalize_unit_box(mesh);
      prepared = std::move(normalized.mesh);
      unit_box = normalized.transform;
    }
    RenderOptions options;
    options.layers = cfg.layers;
    options.threads = cfg.threads;
    PeeledMapSet set = render_peeled(prepared, view, options);
    set.meta.source = mesh_path.generic_string();
    set.meta.unit_box = unit_box;

    ManifestEntry entry;
    entry.source = mesh_path.generic_string();
    entry.view_label = view.label;
    entry.sample_dir = sample_dir;
    entry.unit_box = unit_box;
    entry.validation = validate(set);

    EncodeOptions encode;
    encode.depth = cfg.depth_encoding;
    for (const fs::path& file : encode_maps(set, cfg.output_root / sample_dir, encode)) {
      entry.files.push_back({file.filename().string(), file_crc32(file)});
    }
    log.record("render", sample_dir, {}, elapsed_ms(start));
    return entry;
  } catch (const std::exception& e) {
    log.record("error", sample_dir, e.what(), elapsed_ms(start));
    return std::nullopt;
  }
}

bool is_mesh_file(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".obj" || ext == ".ply";
}

}  // namespace

std::optional<ManifestEntry> generate_sample(const fs::path& mesh_path, const ViewConfig& view,
                                             const DatasetConfig& cfg, RunLog& log) {
  const auto start = Clock::now();
  const std::optional<TriMesh> mesh = load_usable_mesh(mesh_path, log, start);
  if (!mesh) {
    return std::nullopt;
  }
  return render_sample(*mesh, mesh_path, view, cfg, log, start);
}

DatasetRun generate_dataset(const fs::path& input_dir, const DatasetConfig& cfg, RunLog& log) {
  cfg.validate();
  std::error_code ec;
  if (!fs::is_directory(input_dir, ec)) {
    throw ArgumentError("generate_dataset: '" + input_dir.string() + "' is not a directory");
  }
  std::vector<fs::path> meshes;
  for (const auto& item : fs::directory_iterator(input_dir)) {
    if (item.is_regular_file() && is_mesh_file(item.path())) {
      meshes.push_back(item.path());
    }
  }
  std::sort(meshes.begin(), meshes.end());
  if (meshes.empty()) {
    throw ArgumentError("generate_dataset: no .obj or .ply meshes in '" + input_dir.string() + "'");
  }
  if (cfg.output_root.empty()) {
    throw ArgumentError("generate_dataset: output root not set");
  }
  fs::create_directories(cfg.output_root, ec);
  if (ec) {
    throw IoError(cfg.output_root, "cannot create directory: " + ec.message());
  }

  const fs::path manifest_path = cfg.output_root / "manifest.json";
  std::map<std::string, ManifestEntry> previous;
  if (fs::exists(manifest_path)) {
    try {
      for (ManifestEntry& e : read_manifest(manifest_path).entries) {
        previous.emplace(e.sample_dir, std::move(e));
      }
    } catch (const std::exception& e) {
      log.record("manifest_ignored", manifest_path.string(), e.what());
    }
  }

  const std::vector<ViewConfig> views = cfg.view_configs();
  DatasetRun run;
  for (const fs::path& mesh_path : meshes) {
    const auto start = Clock::now();
    std::optional<TriMesh> mesh;
    bool mesh_loaded = false;
    for (const ViewConfig& view : views) {
      const std::string sample_dir = (fs::path(mesh_path.stem()) / view.label).generic_string();
      auto it = previous.find(sample_dir);
      if (it != previous.end() && it->second.source == mesh_path.generic_string() &&
          verify_entry(cfg.output_root, it->second)) {
        log.record("reuse", sample_dir, {}, elapsed_ms(start));
        run.manifest.entries.push_back(it->second);
        ++run.reused;
        continue;
      }
      if (!mesh_loaded) {
        mesh = load_usable_mesh(mesh_path, log, start);
        mesh_loaded = true;
        if (!mesh) {
          ++run.skipped_meshes;
        }
      }
      if (!mesh) {
        break;
      }
      if (auto entry = render_sample(*mesh, mesh_path, view, cfg, log, Clock::now())) {
        run.manifest.entries.push_back(std::move(*entry));
        ++run.rendered;
      }
    }
  }
  write_manifest(run.manifest, manifest_path);
  return run;
}

RoundtripReport roundtrip_check(const fs::path& mesh_path, const ViewConfig& view,
                                const DatasetConfig& cfg) {
  return roundtrip_check(load_mesh(mesh_path), view, cfg);
}

RoundtripReport roundtrip_check(const TriMesh& mesh, const ViewConfig& view,
                                const DatasetConfig& cfg) {
  const TriMesh prepared = cfg.normalize ? normalize_unit_box(mesh).mesh : mesh;
  RenderOptions options;
  options.layers = cfg.layers;
  options.threads = cfg.threads;
  const PeeledMapSet set = render_peeled(prepared, view, options);

  RoundtripReport report;
  report.bbox_diagonal = prepared.bounds().diagonal();
  BackprojectOptions to_mesh_frame;
  // meta holds the pose but no unit box, so this lands in the frame of `prepared`.
  to_mesh_frame.world_frame = true;
  report.cloud = backproject_maps(set, to_mesh_frame);
  report.point_count = report.cloud.size();
  if (report.cloud.empty()) {
    report.status = RoundtripStatus::kOutOfFrame;
    return report;
  }

  const Bvh bvh(prepared);
  std::vector<double> distances(report.cloud.size());
  parallel_for(distances.size(), cfg.threads,
               [&](std::size_t i) { distances[i] = bvh.distance_to_surface(report.cloud.points[i]); });
  report.max_surface_distance = *std::max_element(distances.begin(), distances.end());

  const PointCloud reference = sample_surface(prepared, report.cloud.size(), cfg.seed);
  report.chamfer = chamfer(report.cloud, reference, cfg.threads);
  return report;
}

json to_json(const RoundtripReport& report) {
  json j{{"status", report.status == RoundtripStatus::kOk ? "ok" : "out_of_frame"},
         {"point_count", report.point_count},
         {"bbox_diagonal", report.bbox_diagonal}};
  if (report.status == RoundtripStatus::kOk) {
    j["chamfer_sum"] = report.chamfer.sum;
    j["chamfer_mean_fwd"] = report.chamfer.mean_fwd;
    j["chamfer_mean_bwd"] = report.chamfer.mean_bwd;
    j["max_surface_distance"] = report.max_surface_distance;
  }
  return j;
}

}  // namespace peel
