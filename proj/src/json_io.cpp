#include "peel/json_io.hpp"

#include "peel/errors.hpp"

#include <fstream>

namespace peel {

using nlohmann::json;

void to_json(json& j, const Intrinsics& intr) {
  j = json{{"fx", intr.fx},       {"fy", intr.fy},         {"cx", intr.cx},
           {"cy", intr.cy},       {"width", intr.width},   {"height", intr.height}};
}

void from_json(const json& j, Intrinsics& intr) {
  j.at("fx").get_to(intr.fx);
  j.at("fy").get_to(intr.fy);
  j.at("cx").get_to(intr.cx);
  j.at("cy").get_to(intr.cy);
  j.at("width").get_to(intr.width);
  j.at("height").get_to(intr.height);
  intr.validate();
}

void to_json(json& j, const RigidPose& pose) {
  json rotation = json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      rotation.push_back(pose.rotation(r, c));
    }
  }
  j = json{{"rotation", rotation},
           {"translation", {pose.translation.x(), pose.translation.y(), pose.translation.z()}}};
}

void from_json(const json& j, RigidPose& pose) {
  const auto rotation = j.at("rotation").get<std::vector<double>>();
  const auto translation = j.at("translation").get<std::vector<double>>();
  if (rotation.size() != 9 || translation.size() != 3) {
    throw ArgumentError("pose: rotation needs 9 values and translation 3");
  }
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      pose.rotation(r, c) = rotation[3 * r + c];
    }
  }
  pose.translation = Vec3{translation[0], translation[1], translation[2]};
  pose.validate();
}

void to_json(json& j, const ViewConfig& view) {
  to_json(j, view.intrinsics);
  j["pose"] = view.pose;
  j["label"] = view.label;
}

void from_json(const json& j, ViewConfig& view) {
  from_json(j, view.intrinsics);
  if (j.contains("pose")) {
    view.pose = j.at("pose").get<RigidPose>();
  }
  view.label = j.value("label", "");
}

void to_json(json& j, const UnitBoxTransform& t) {
  j = json{{"scale", t.scale},
           {"translation", {t.translation.x(), t.translation.y(), t.translation.z()}}};
}

void from_json(const json& j, UnitBoxTransform& t) {
  j.at("scale").get_to(t.scale);
  const auto tr = j.at("translation").get<std::vector<double>>();
  if (tr.size() != 3) {
    throw ArgumentError("unit_box: translation needs 3 values");
  }
  t.translation = Vec3{tr[0], tr[1], tr[2]};
}

void to_json(json& j, const ValidationReport& report) {
  j = json{{"non_finite", report.non_finite},
           {"negative_depth", report.negative_depth},
           {"monotonicity", report.monotonicity},
           {"background_color", report.background_color},
           {"shape", report.shape},
           {"total", report.total()}};
}

void from_json(const json& j, ValidationReport& report) {
  report = ValidationReport{};
  report.non_finite = j.value("non_finite", std::size_t{0});
  report.negative_depth = j.value("negative_depth", std::size_t{0});
  report.monotonicity = j.value("monotonicity", std::size_t{0});
  report.background_color = j.value("background_color", std::size_t{0});
  report.shape = j.value("shape", std::size_t{0});
}

void to_json(json& j, const ChamferResult& result) {
  j = json{{"sum", result.sum}, {"mean_fwd", result.mean_fwd}, {"mean_bwd", result.mean_bwd}};
}

void to_json(json& j, const LossWeights& w) {
  j = json{{"gamma", w.gamma},
           {"lambda_depth", w.lambda_depth},
           {"lambda_rgb", w.lambda_rgb},
           {"lambda_cham", w.lambda_cham},
           {"lambda_smooth", w.lambda_smooth}};
}

void to_json(json& j, const LossBreakdown& l) {
  j = json{{"depth", l.depth},
           {"rgb", l.rgb},
           {"chamfer_sum", l.chamfer_defined ? json(l.chamfer_detail.sum) : json(nullptr)},
           {"chamfer_mean_fwd", l.chamfer_defined ? json(l.chamfer_detail.mean_fwd) : json(nullptr)},
           {"chamfer_mean_bwd", l.chamfer_defined ? json(l.chamfer_detail.mean_bwd) : json(nullptr)},
           {"chamfer_defined", l.chamfer_defined},
           {"smooth", l.smooth},
           {"adversarial", l.adversarial},
           {"total", l.total},
           {"weights", l.weights},
           {"per_pixel_mean", {{"depth", l.depth_mean}, {"rgb", l.rgb_mean}, {"smooth", l.smooth_mean}}}};
}

ViewConfig load_view_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError(path, "cannot open");
  }
  try {
    ViewConfig view = json::parse(in).get<ViewConfig>();
    view.intrinsics.validate();
    view.pose.validate();
    return view;
  } catch (const json::exception& e) {
    throw ParseError(ParseErrorKind::kMalformedData, path, e.what());
  }
}

}  // namespace peel
