#pragma once

#include "peel/mesh.hpp"

namespace peel {

/// Subdivided icosahedron projected onto a sphere; 20 * 4^subdivisions triangles.
TriMesh make_icosphere(int subdivisions, double radius = 1.0, const Vec3& center = Vec3::Zero());

/// Closed 12-triangle box.
TriMesh make_box(const Vec3& min, const Vec3& max);

/// Capsule-and-ellipsoid figure standing on +y, about 1.8 units tall. Parts overlap
/// and are not merged, which mimics scan meshes that are not watertight.
TriMesh make_humanoid(double arm_spread_deg = 20.0, double stride_deg = 10.0);

/// Concatenates meshes; colors are kept only if every part has them.
TriMesh merge_meshes(const std::vector<TriMesh>& parts);

/// Assigns a uniform color to every vertex.
void paint(TriMesh& mesh, const Vec3& rgb255);

}  // namespace peel
