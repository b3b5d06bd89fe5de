#include "peel/point_cloud.hpp"

#include "peel/errors.hpp"
#include "ply.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>

namespace peel {

void PointCloud::validate() const {
  if (colors.size() != points.size() || layers.size() != points.size()) {
    throw ArgumentError("point cloud: points, colors and layers differ in length");
  }
  for (const Vec3& p : points) {
    if (p.hasNaN()) {
      throw ArgumentError("point cloud: NaN coordinate");
    }
  }
}

PointCloud backproject_maps(const PeeledMapSet& set, const BackprojectOptions& options) {
  PointCloud cloud;
  const int n = set.layers();
  for (int y = 0; y < set.height(); ++y) {
    for (int x = 0; x < set.width(); ++x) {
      for (int i = 0; i < n; ++i) {
        const float d = set.depth[i].at(x, y);
        if (!(d > 0.0f) || !std::isfinite(d)) {
          continue;
        }
        Vec3 p = *backproject_pixel(set.intrinsics, {x, y}, d);
        if (options.world_frame) {
          if (set.meta.pose) {
            p = set.meta.pose->to_world(p);
          }
          if (set.meta.unit_box) {
            p = set.meta.unit_box->invert(p);
          }
        }
        cloud.push_back(p, set.rgb[i].at(x, y), static_cast<std::uint8_t>(i + 1));
      }
    }
  }
  return cloud;
}

PointCloud color_by_layer(PointCloud cloud) {
  static constexpr Rgb kPalette[] = {{255, 0, 0}, {0, 0, 255}, {0, 255, 0}, {255, 255, 0}};
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const int layer = std::max<int>(cloud.layers[i], 1);
    cloud.colors[i] = kPalette[(layer - 1) % 4];
  }
  return cloud;
}

void write_ply(const PointCloud& cloud, const std::filesystem::path& path, PlyFormat format) {
  cloud.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError(path, "cannot open for writing");
  }
  out << "ply\n"
      << (format == PlyFormat::kAscii ? "format ascii 1.0\n" : "format binary_little_endian 1.0\n")
      << "element vertex " << cloud.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n"
      << "property uchar red\nproperty uchar green\nproperty uchar blue\n"
      << "property uchar layer\n"
      << "end_header\n";
  if (format == PlyFormat::kAscii) {
    out.precision(std::numeric_limits<float>::max_digits10);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const Vec3& p = cloud.points[i];
      const Rgb& c = cloud.colors[i];
      out << static_cast<float>(p.x()) << ' ' << static_cast<float>(p.y()) << ' '
          << static_cast<float>(p.z()) << ' ' << int{c.r} << ' ' << int{c.g} << ' ' << int{c.b}
          << ' ' << int{cloud.layers[i]} << '\n';
    }
  } else {
    char record[16];
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const float xyz[3] = {static_cast<float>(cloud.points[i].x()),
                            static_cast<float>(cloud.points[i].y()),
                            static_cast<float>(cloud.points[i].z())};
      std::memcpy(record, xyz, 12);
      record[12] = static_cast<char>(cloud.colors[i].r);
      record[13] = static_cast<char>(cloud.colors[i].g);
      record[14] = static_cast<char>(cloud.colors[i].b);
      record[15] = static_cast<char>(cloud.layers[i]);
      out.write(record, 16);
    }
  }
  if (!out) {
    throw IoError(path, "write failed");
  }
}

PointCloud read_ply(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  const ply::File file = ply::read(path);
  const ply::Element* vertex = file.find("vertex");
  if (!vertex) {
    throw ParseError(ParseErrorKind::kMalformedHeader, path, "no vertex element");
  }
  const auto x = vertex->find("x"), y = vertex->find("y"), z = vertex->find("z");
  if (!x || !y || !z) {
    throw ParseError(ParseErrorKind::kMalformedHeader, path, "vertex element lacks x/y/z");
  }
  auto warn = [&](const std::string& message) {
    if (warnings) {
      warnings->push_back(path.string() + ": " + message);
    }
  };

  const auto r = vertex->find("red"), g = vertex->find("green"), b = vertex->find("blue");
  const bool has_color = r && g && b;
  const auto layer = vertex->find("layer");
  if (!has_color) {
    warn("no red/green/blue properties; colors default to white");
  }
  if (!layer) {
    warn("no layer property; layers default to 1");
  }
  const bool unit_color = has_color && (vertex->properties[*r].type == ply::Type::kFloat32 ||
                                        vertex->properties[*r].type == ply::Type::kFloat64);
  auto channel = [&](std::size_t prop, std::size_t i) {
    const double v = vertex->scalars[prop][i] * (unit_color ? 255.0 : 1.0);
    return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
  };

  PointCloud cloud;
  cloud.points.reserve(vertex->count);
  for (std::size_t i = 0; i < vertex->count; ++i) {
    const Vec3 p{vertex->scalars[*x][i], vertex->scalars[*y][i], vertex->scalars[*z][i]};
    if (p.hasNaN()) {
      throw ParseError(ParseErrorKind::kMalformedData, path, "NaN coordinate");
    }
    const Rgb color = has_color ? Rgb{channel(*r, i), channel(*g, i), channel(*b, i)} : kBackgroundRgb;
    const auto label =
        layer ? static_cast<std::uint8_t>(std::clamp(vertex->scalars[*layer][i], 0.0, 255.0)) : 1;
    cloud.push_back(p, color, label);
  }
  return cloud;
}

PointCloud sample_surface(const TriMesh& mesh, std::size_t count, std::uint64_t seed) {
  if (count < 1) {
    throw ArgumentError("sample_surface: count must be at least 1");
  }
  mesh.validate();
  std::vector<double> cumulative(mesh.triangles.size());
  double total = 0.0;
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
    total += mesh.triangle_area(i);
    cumulative[i] = total;
  }
  if (!(total > 0.0)) {
    throw DegenerateGeometryError("sample_surface: mesh has zero surface area");
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto round_channel = [](double v) {
    return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
  };

  PointCloud cloud;
  cloud.points.reserve(count);
  cloud.colors.reserve(count);
  cloud.layers.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    const double pick = unit(rng) * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    if (it == cumulative.end()) {
      --it;
    }
    const auto& tri = mesh.triangles[static_cast<std::size_t>(it - cumulative.begin())];
    const double r1 = std::sqrt(unit(rng));
    const double r2 = unit(rng);
    const double wa = 1.0 - r1;
    const double wb = r1 * (1.0 - r2);
    const double wc = r1 * r2;
    const Vec3 p = wa * mesh.vertices[tri[0]] + wb * mesh.vertices[tri[1]] + wc * mesh.vertices[tri[2]];
    Rgb color = kDefaultFlatColor;
    if (mesh.has_colors()) {
      const Vec3 c = wa * mesh.colors[tri[0]] + wb * mesh.colors[tri[1]] + wc * mesh.colors[tri[2]];
      color = {round_channel(c.x()), round_channel(c.y()), round_channel(c.z())};
    }
    cloud.push_back(p, color, 1);
  }
  return cloud;
}

}  // namespace peel
