#pragma once

#include "peel/camera.hpp"
#include "peel/losses.hpp"
#include "peel/peel_maps.hpp"
#include "peel/point_cloud.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace peel {

struct DatasetConfig {
  std::vector<double> views{0.0, 45.0, 60.0, 90.0};
  int layers = 4;
  int resolution = 512;
  double distance = kDefaultViewDistance;
  std::optional<Intrinsics> intrinsics;  // default: Intrinsics::centered(resolution, resolution)
  std::uint64_t seed = 0;
  std::filesystem::path output_root;
  bool normalize = true;
  DepthEncoding depth_encoding = DepthEncoding::kFloat32Pfm;
  int threads = 0;

  /// Throws ArgumentError: resolution < 32, no views, duplicate views, layers < 1.
  void validate() const;
  Intrinsics camera() const;
  std::vector<ViewConfig> view_configs() const;
};

struct FileChecksum {
  std::string name;
  std::uint32_t crc32 = 0;
};

struct ManifestEntry {
  std::string source;
  std::string view_label;
  std::string sample_dir;  // relative to the dataset root
  UnitBoxTransform unit_box;
  std::vector<FileChecksum> files;
  ValidationReport validation;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
};

void to_json(nlohmann::json& j, const Manifest& manifest);
void from_json(const nlohmann::json& j, Manifest& manifest);
Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

/// True if every file of the entry exists under root and matches its checksum.
bool verify_entry(const std::filesystem::path& root, const ManifestEntry& entry);

/// Line-delimited JSON events {event, path, reason?, duration_ms}.
class RunLog {
 public:
  explicit RunLog(std::ostream* sink = nullptr) : sink_(sink) {}

  void record(const std::string& event, const std::string& path, const std::string& reason = {},
              double duration_ms = 0.0);

  const std::vector<nlohmann::json>& events() const { return events_; }
  std::size_t count(const std::string& event) const;

 private:
  std::ostream* sink_;
  std::vector<nlohmann::json> events_;
};

/// Normalizes, renders and encodes one (mesh, view) pair into
/// <output_root>/<mesh stem>/<view label>/. Unloadable meshes and I/O failures
/// are logged and yield nullopt.
std::optional<ManifestEntry> generate_sample(const std::filesystem::path& mesh_path,
                                             const ViewConfig& view, const DatasetConfig& cfg,
                                             RunLog& log);

struct DatasetRun {
  Manifest manifest;
  std::size_t rendered = 0;
  std::size_t reused = 0;
  std::size_t skipped_meshes = 0;
};

/// Every .obj/.ply under input_dir times every configured view. Samples already
/// listed in an existing manifest with valid checksums are reused. Writes
/// <output_root>/manifest.json. Throws ArgumentError if input_dir holds no mesh files.
DatasetRun generate_dataset(const std::filesystem::path& input_dir, const DatasetConfig& cfg,
                            RunLog& log);

enum class RoundtripStatus { kOk, kOutOfFrame };

struct RoundtripReport {
  RoundtripStatus status = RoundtripStatus::kOk;
  std::size_t point_count = 0;
  ChamferResult chamfer;
  double max_surface_distance = 0.0;
  double bbox_diagonal = 0.0;  // of the (normalized) mesh that was rendered
  PointCloud cloud;            // reconstruction in the rendered mesh's frame
};

/// Render, back-project, and compare against the surface: point-to-mesh distance
/// and Chamfer against an equally sized area-weighted surface sample.
RoundtripReport roundtrip_check(const std::filesystem::path& mesh_path, const ViewConfig& view,
                                const DatasetConfig& cfg);
RoundtripReport roundtrip_check(const TriMesh& mesh, const ViewConfig& view,
                                const DatasetConfig& cfg);

nlohmann::json to_json(const RoundtripReport& report);

}  // namespace peel
