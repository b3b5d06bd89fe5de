#pragma once

#include "peel/camera.hpp"
#include "peel/losses.hpp"
#include "peel/peel_maps.hpp"

#include <json.hpp>

namespace peel {

void to_json(nlohmann::json& j, const Intrinsics& intr);
void from_json(const nlohmann::json& j, Intrinsics& intr);

void to_json(nlohmann::json& j, const RigidPose& pose);
void from_json(const nlohmann::json& j, RigidPose& pose);

/// {fx, fy, cx, cy, width, height, pose: {rotation: [9 row-major], translation: [3]}, label}
void to_json(nlohmann::json& j, const ViewConfig& view);
void from_json(const nlohmann::json& j, ViewConfig& view);

void to_json(nlohmann::json& j, const UnitBoxTransform& t);
void from_json(const nlohmann::json& j, UnitBoxTransform& t);

void to_json(nlohmann::json& j, const ValidationReport& report);
void from_json(const nlohmann::json& j, ValidationReport& report);

void to_json(nlohmann::json& j, const ChamferResult& result);
void to_json(nlohmann::json& j, const LossWeights& weights);

/// {depth, rgb, chamfer_sum, chamfer_mean_fwd, chamfer_mean_bwd, smooth, adversarial, total, weights, ...}
void to_json(nlohmann::json& j, const LossBreakdown& losses);

ViewConfig load_view_config(const std::filesystem::path& path);

}  // namespace peel
