#include "peel/peel_maps.hpp"

#include "peel/errors.hpp"
#include "peel/image_io.hpp"
#include "peel/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace peel {

PeeledMapSet PeeledMapSet::blank(const Intrinsics& intr, int layers) {
  if (layers < 1) {
    throw ArgumentError("PeeledMapSet: need at least one layer");
  }
  intr.validate();
  PeeledMapSet set;
  set.intrinsics = intr;
  set.depth.assign(layers, DepthMap(intr.width, intr.height, 0.0f));
  set.rgb.assign(layers, RgbMap(intr.width, intr.height, kBackgroundRgb));
  return set;
}

bool PeeledMapSet::same_shape(const PeeledMapSet& other) const {
  if (layers() != other.layers() || rgb.size() != other.rgb.size() || width() != other.width() ||
      height() != other.height()) {
    return false;
  }
  auto layers_ok = [](const PeeledMapSet& s) {
    for (const auto& d : s.depth) {
      if (!d.same_shape(s.width(), s.height())) return false;
    }
    for (const auto& c : s.rgb) {
      if (!c.same_shape(s.width(), s.height())) return false;
    }
    return true;
  };
  return layers_ok(*this) && layers_ok(other);
}

ValidationReport validate(const PeeledMapSet& set) {
  ValidationReport report;
  auto note = [&](std::size_t& counter, ViolationKind kind, int layer, Pixel px) {
    ++counter;
    if (report.samples.size() < ValidationReport::kMaxSamples) {
      report.samples.push_back({kind, layer, px});
    }
  };

  const int w = set.width();
  const int h = set.height();
  if (set.depth.size() != set.rgb.size()) {
    note(report.shape, ViolationKind::kShape, 0, {});
  }
  for (std::size_t i = 0; i < set.depth.size(); ++i) {
    if (!set.depth[i].same_shape(w, h)) {
      note(report.shape, ViolationKind::kShape, static_cast<int>(i) + 1, {});
    }
  }
  for (std::size_t i = 0; i < set.rgb.size(); ++i) {
    if (!set.rgb[i].same_shape(w, h)) {
      note(report.shape, ViolationKind::kShape, static_cast<int>(i) + 1, {});
    }
  }
  if (report.shape > 0) {
    return report;
  }

  const int n = set.layers();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bool monotonic = true;
      bool seen_zero = false;
      float previous = 0.0f;
      for (int i = 0; i < n; ++i) {
        const float d = set.depth[i].at(x, y);
        if (!std::isfinite(d)) {
          note(report.non_finite, ViolationKind::kNonFinite, i + 1, {x, y});
          continue;
        }
        if (d < 0.0f) {
          note(report.negative_depth, ViolationKind::kNegativeDepth, i + 1, {x, y});
          continue;
        }
        if (d == 0.0f) {
          seen_zero = true;
          if (set.rgb[i].at(x, y) != kBackgroundRgb) {
            note(report.background_color, ViolationKind::kBackgroundColor, i + 1, {x, y});
          }
          continue;
        }
        if (seen_zero || !(d > previous)) {
          monotonic = false;
        }
        previous = d;
      }
      if (!monotonic) {
        note(report.monotonicity, ViolationKind::kMonotonicity, 0, {x, y});
      }
    }
  }
  return report;
}

namespace {

constexpr const char* kMetaFile = "meta.json";

std::string depth_name(int layer, DepthEncoding enc) {
  return "depth_" + std::to_string(layer) + (enc == DepthEncoding::kFloat32Pfm ? ".pfm" : ".png");
}

std::string rgb_name(int layer) { return "rgb_" + std::to_string(layer) + ".png"; }

struct DepthRange {
  double min = 0.0;
  double max = 0.0;
};

DepthRange depth_range(const PeeledMapSet& set) {
  DepthRange r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& layer : set.depth) {
    for (float d : layer.data()) {
      r.min = std::min(r.min, static_cast<double>(d));
      r.max = std::max(r.max, static_cast<double>(d));
    }
  }
  return r;
}

nlohmann::json meta_json(const PeeledMapSet& set, DepthEncoding enc,
                         const std::optional<DepthRange>& range) {
  nlohmann::json j;
  j["n"] = set.layers();
  j["width"] = set.width();
  j["height"] = set.height();
  j["intrinsics"] = set.intrinsics;
  j["view_label"] = set.meta.view_label;
  j["source"] = set.meta.source;
  j["unit_box"] = set.meta.unit_box ? nlohmann::json(*set.meta.unit_box) : nlohmann::json(nullptr);
  if (set.meta.pose) {
    j["pose"] = *set.meta.pose;
  }
  if (!set.meta.extra.empty()) {
    j["extra"] = set.meta.extra;
  }
  j["depth_format"] = enc == DepthEncoding::kFloat32Pfm ? "pfm" : "png16";
  if (range) {
    j["depth_range"] = {{"min", range->min}, {"max", range->max}};
  }
  return j;
}

}  // namespace

std::vector<std::filesystem::path> encode_maps(const PeeledMapSet& set,
                                               const std::filesystem::path& dir,
                                               const EncodeOptions& options) {
  const ValidationReport shape_check = validate(set);
  if (shape_check.shape > 0) {
    throw ArgumentError("encode_maps: layers disagree in count or resolution");
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw IoError(dir, "cannot create directory: " + ec.message());
  }

  std::optional<DepthRange> range;
  if (options.depth == DepthEncoding::kQuantized16Png) {
    range = depth_range(set);
  }

  std::vector<std::filesystem::path> written;
  for (int i = 0; i < set.layers(); ++i) {
    const auto path = dir / depth_name(i + 1, options.depth);
    if (options.depth == DepthEncoding::kFloat32Pfm) {
      write_pfm(path, set.depth[i]);
    } else {
      Image<std::uint16_t> q(set.width(), set.height());
      const double span = range->max - range->min;
      for (std::size_t k = 0; k < q.size(); ++k) {
        const double d = set.depth[i].data()[k];
        q.data()[k] = span > 0.0
                          ? static_cast<std::uint16_t>(std::lround((d - range->min) / span * 65535.0))
                          : 0;
      }
      write_png_gray16(path, q);
    }
    written.push_back(path);
  }
  for (int i = 0; i < set.layers(); ++i) {
    const auto path = dir / rgb_name(i + 1);
    write_png_rgb(path, set.rgb[i]);
    written.push_back(path);
  }

  const auto meta_path = dir / kMetaFile;
  std::ofstream out(meta_path);
  if (!out) {
    throw IoError(meta_path, "cannot open for writing");
  }
  out << meta_json(set, options.depth, range).dump(2) << '\n';
  if (!out) {
    throw IoError(meta_path, "write failed");
  }
  written.push_back(meta_path);
  return written;
}

PeeledMapSet decode_maps(const std::filesystem::path& dir) {
  const auto meta_path = dir / kMetaFile;
  if (!std::filesystem::exists(meta_path)) {
    throw DecodeError(DecodeErrorKind::kMissingFile, meta_path, "missing meta.json");
  }

  PeeledMapSet set;
  DepthEncoding enc = DepthEncoding::kFloat32Pfm;
  DepthRange range;
  int n = 0;
  try {
    std::ifstream in(meta_path);
    const nlohmann::json j = nlohmann::json::parse(in);
    n = j.at("n").get<int>();
    set.intrinsics = j.at("intrinsics").get<Intrinsics>();
    if (j.at("width").get<int>() != set.intrinsics.width ||
        j.at("height").get<int>() != set.intrinsics.height) {
      throw DecodeError(DecodeErrorKind::kResolutionMismatch, meta_path,
                        "width/height disagree with intrinsics");
    }
    set.intrinsics.validate();
    set.meta.view_label = j.value("view_label", "");
    set.meta.source = j.value("source", "");
    if (j.contains("unit_box") && !j["unit_box"].is_null()) {
      set.meta.unit_box = j["unit_box"].get<UnitBoxTransform>();
    }
    if (j.contains("pose")) {
      set.meta.pose = j["pose"].get<RigidPose>();
    }
    if (j.contains("extra")) {
      set.meta.extra = j["extra"].get<std::map<std::string, std::string>>();
    }
    const std::string format = j.value("depth_format", "pfm");
    if (format == "png16") {
      enc = DepthEncoding::kQuantized16Png;
      range.min = j.at("depth_range").at("min").get<double>();
      range.max = j.at("depth_range").at("max").get<double>();
    } else if (format != "pfm") {
      throw DecodeError(DecodeErrorKind::kMalformedJson, meta_path,
                        "unknown depth_format '" + format + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(DecodeErrorKind::kMalformedJson, meta_path, e.what());
  } catch (const ArgumentError& e) {
    throw DecodeError(DecodeErrorKind::kMalformedJson, meta_path, e.what());
  }
  if (n < 1) {
    throw DecodeError(DecodeErrorKind::kMalformedJson, meta_path, "layer count must be >= 1");
  }

  const int w = set.intrinsics.width;
  const int h = set.intrinsics.height;
  auto require = [&](const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
      throw DecodeError(DecodeErrorKind::kMissingFile, path,
                        "missing " + path.filename().string());
    }
  };
  auto check_shape = [&](const std::filesystem::path& path, int fw, int fh) {
    if (fw != w || fh != h) {
      throw DecodeError(DecodeErrorKind::kResolutionMismatch, path,
                        std::to_string(fw) + "x" + std::to_string(fh) + " layer in a " +
                            std::to_string(w) + "x" + std::to_string(h) + " set");
    }
  };

  for (int i = 1; i <= n; ++i) {
    require(dir / depth_name(i, enc));
    require(dir / rgb_name(i));
  }
  for (int i = 1; i <= n; ++i) {
    const auto path = dir / depth_name(i, enc);
    try {
      if (enc == DepthEncoding::kFloat32Pfm) {
        DepthMap d = read_pfm(path);
        check_shape(path, d.width(), d.height());
        set.depth.push_back(std::move(d));
      } else {
        const Image<std::uint16_t> q = read_png_gray16(path);
        check_shape(path, q.width(), q.height());
        DepthMap d(w, h);
        const double step = (range.max - range.min) / 65535.0;
        for (std::size_t k = 0; k < q.size(); ++k) {
          d.data()[k] = static_cast<float>(range.min + q.data()[k] * step);
        }
        set.depth.push_back(std::move(d));
      }
    } catch (const ParseError& e) {
      throw DecodeError(DecodeErrorKind::kMalformedFile, path, e.what());
    }
  }
  for (int i = 1; i <= n; ++i) {
    const auto path = dir / rgb_name(i);
    try {
      RgbMap c = read_png_rgb(path);
      check_shape(path, c.width(), c.height());
      set.rgb.push_back(std::move(c));
    } catch (const ParseError& e) {
      throw DecodeError(DecodeErrorKind::kMalformedFile, path, e.what());
    }
  }
  set.meta.validation = validate(set);
  return set;
}

}  // namespace peel
