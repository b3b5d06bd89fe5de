#include "oracles.hpp"

#include "peel/dataset.hpp"
#include "peel/errors.hpp"
#include "peel/image_io.hpp"
#include "peel/primitives.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

namespace peel {
namespace {

namespace fs = std::filesystem;
using testing::scratch_dir;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path mesh_dir(const std::string& name, int count) {
  const auto dir = scratch_dir(name);
  const TriMesh meshes[] = {make_icosphere(2, 0.7, {0.1, 0.2, 0.0}), make_humanoid(),
                            make_box({0, 0, 0}, {1, 2, 0.5})};
  for (int i = 0; i < count; ++i) {
    write_obj(meshes[i % 3], dir / ("mesh" + std::to_string(i) + ".obj"));
  }
  return dir;
}

DatasetConfig small_config(const fs::path& out) {
  DatasetConfig cfg;
  cfg.resolution = 48;
  cfg.output_root = out;
  cfg.threads = 2;
  return cfg;
}

TEST(Dataset, SingleSampleFiles) {
  const auto in = mesh_dir("ds_single_in", 1);
  const auto out = scratch_dir("ds_single_out");
  RunLog log;
  const auto views = small_config(out).view_configs();
  const auto entry = generate_sample(in / "mesh0.obj", views[1], small_config(out), log);
  ASSERT_TRUE(entry);
  EXPECT_EQ(entry->sample_dir, "mesh0/45");
  EXPECT_EQ(entry->files.size(), 9u);
  EXPECT_TRUE(entry->validation.clean());
  EXPECT_TRUE(verify_entry(out, *entry));
  const PeeledMapSet back = decode_maps(out / entry->sample_dir);
  EXPECT_TRUE(back.meta.validation->clean());
  ASSERT_TRUE(back.meta.unit_box);
  EXPECT_EQ(back.meta.unit_box->scale, entry->unit_box.scale);
  EXPECT_EQ(log.count("render"), 1u);
}

TEST(Dataset, EmptyMeshIsSkipped) {
  const auto in = scratch_dir("ds_empty_in");
  std::ofstream(in / "empty.obj") << "# nothing here\nv 0 0 0\n";
  RunLog log;
  const auto cfg = small_config(scratch_dir("ds_empty_out"));
  EXPECT_FALSE(generate_sample(in / "empty.obj", cfg.view_configs()[0], cfg, log));
  ASSERT_EQ(log.count("skip"), 1u);
  EXPECT_EQ(log.events()[0]["reason"], "empty mesh");
}

TEST(Dataset, FullRunAndNoOpRerun) {
  const auto in = mesh_dir("ds_full_in", 3);
  const auto out = scratch_dir("ds_full_out");
  const auto cfg = small_config(out);
  RunLog log;
  const DatasetRun first = generate_dataset(in, cfg, log);
  EXPECT_EQ(first.manifest.entries.size(), 12u);
  EXPECT_EQ(first.rendered, 12u);
  for (const auto& e : first.manifest.entries) {
    EXPECT_TRUE(e.validation.clean()) << e.sample_dir;
    EXPECT_EQ(e.files.size(), 9u);
    EXPECT_TRUE(verify_entry(out, e));
  }
  const std::string manifest = slurp(out / "manifest.json");
  const Manifest parsed = read_manifest(out / "manifest.json");
  EXPECT_EQ(parsed.entries.size(), 12u);

  RunLog again;
  const DatasetRun second = generate_dataset(in, cfg, again);
  EXPECT_EQ(second.rendered, 0u);
  EXPECT_EQ(second.reused, 12u);
  EXPECT_EQ(slurp(out / "manifest.json"), manifest);
  EXPECT_EQ(again.count("render"), 0u);
}

TEST(Dataset, DamagedSampleIsRerendered) {
  const auto in = mesh_dir("ds_damage_in", 1);
  const auto out = scratch_dir("ds_damage_out");
  const auto cfg = small_config(out);
  RunLog log;
  generate_dataset(in, cfg, log);
  const std::string manifest = slurp(out / "manifest.json");
  std::ofstream(out / "mesh0" / "60" / "rgb_3.png", std::ios::binary) << "corrupt";
  RunLog again;
  const DatasetRun second = generate_dataset(in, cfg, again);
  EXPECT_EQ(second.rendered, 1u);
  EXPECT_EQ(second.reused, 3u);
  EXPECT_EQ(slurp(out / "manifest.json"), manifest);
}

TEST(Dataset, Deterministic) {
  const auto in = mesh_dir("ds_det_in", 2);
  const auto a = scratch_dir("ds_det_a");
  const auto b = scratch_dir("ds_det_b");
  RunLog log;
  auto cfg = small_config(a);
  generate_dataset(in, cfg, log);
  cfg.output_root = b;
  cfg.threads = 1;
  generate_dataset(in, cfg, log);
  std::size_t compared = 0;
  for (const auto& item : fs::recursive_directory_iterator(a)) {
    if (!item.is_regular_file()) {
      continue;
    }
    const auto rel = fs::relative(item.path(), a);
    EXPECT_EQ(slurp(item.path()), slurp(b / rel)) << rel;
    ++compared;
  }
  EXPECT_EQ(compared, 2u * 4u * 9u + 1u);
}

TEST(Dataset, CorruptMeshIsSkippedOthersContinue) {
  const auto in = mesh_dir("ds_corrupt_in", 1);
  std::ofstream(in / "broken.ply") << "ply\nformat ascii 1.0\nelement vertex 3\n";
  const auto out = scratch_dir("ds_corrupt_out");
  RunLog log;
  const DatasetRun run = generate_dataset(in, small_config(out), log);
  EXPECT_EQ(run.manifest.entries.size(), 4u);
  EXPECT_EQ(run.skipped_meshes, 1u);
  EXPECT_EQ(log.count("skip"), 1u);
}

TEST(Dataset, NoMeshesIsAnError) {
  const auto in = scratch_dir("ds_nomesh_in");
  RunLog log;
  EXPECT_THROW(generate_dataset(in, small_config(scratch_dir("ds_nomesh_out")), log),
               ArgumentError);
}

TEST(Dataset, LogIsJsonLines) {
  const auto in = mesh_dir("ds_log_in", 1);
  std::ostringstream sink;
  RunLog log(&sink);
  generate_dataset(in, small_config(scratch_dir("ds_log_out")), log);
  std::istringstream lines(sink.str());
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_TRUE(j.contains("event"));
    EXPECT_TRUE(j.contains("path"));
    EXPECT_TRUE(j.contains("duration_ms"));
    ++n;
  }
  EXPECT_EQ(n, 4);
}

TEST(Dataset, ConfigValidation) {
  DatasetConfig cfg;
  cfg.views = {0.0, 0.0};
  EXPECT_THROW(cfg.validate(), ArgumentError);
  cfg = DatasetConfig{};
  cfg.layers = 0;
  EXPECT_THROW(cfg.validate(), ArgumentError);
  cfg = DatasetConfig{};
  cfg.resolution = 0;
  EXPECT_THROW(cfg.validate(), ArgumentError);
}

TEST(Roundtrip, IcosphereReconstruction) {
  DatasetConfig cfg;
  cfg.normalize = false;
  cfg.resolution = 128;
  const auto view = cfg.view_configs()[0];
  const auto report = roundtrip_check(make_icosphere(4, 0.5), view, cfg);
  ASSERT_EQ(report.status, RoundtripStatus::kOk);
  EXPECT_GT(report.point_count, 1000u);
  for (const Vec3& p : report.cloud.points) {
    EXPECT_NEAR(p.norm(), 0.5, 1e-3);
  }
  EXPECT_LE(report.max_surface_distance, 1e-6);
  EXPECT_LT(report.chamfer.mean_fwd, 1e-3);
}

TEST(Roundtrip, CubeFacesAndOutOfFrame) {
  DatasetConfig cfg;
  cfg.resolution = 64;
  const auto view = cfg.view_configs()[2];
  const TriMesh cube = make_box({-3, -3, -3}, {5, 5, 5});
  const auto ok = roundtrip_check(cube, view, cfg);
  ASSERT_EQ(ok.status, RoundtripStatus::kOk);
  for (const Vec3& p : ok.cloud.points) {
    EXPECT_NEAR(p.cwiseAbs().maxCoeff(), 0.5, 1e-6);
  }

  cfg.normalize = false;
  TriMesh far = make_icosphere(2, 0.5, {100.0, 0.0, 0.0});
  const auto out = roundtrip_check(far, view, cfg);
  EXPECT_EQ(out.status, RoundtripStatus::kOutOfFrame);
  EXPECT_EQ(out.point_count, 0u);
  EXPECT_EQ(to_json(out)["status"], "out_of_frame");
}

}  // namespace
}  // namespace peel
