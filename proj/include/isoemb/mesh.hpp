#pragma once

#include "isoemb/types.hpp"

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace isoemb {

using Triangle = std::array<Index, 3>;

/// Undirected edge stored in its global direction v[0] < v[1], with the two
/// incident triangles and the local edge slot each one uses.
struct MeshEdge {
  std::array<Index, 2> v;
  std::array<Index, 2> tri{-1, -1};
  std::array<int, 2> local{-1, -1};
};

/// Closed, consistently oriented, piecewise-flat triangulation.
///
/// Local edge j of a triangle joins local vertices (j+1)%3 -> (j+2)%3. The
/// affine chart of triangle t maps reference coordinates (ξ1, ξ2) to
/// v0 + ξ1 (v1 - v0) + ξ2 (v2 - v0); barycentric points are (1-ξ1-ξ2, ξ1, ξ2).
class SurfaceMesh {
 public:
  SurfaceMesh() = default;
  SurfaceMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles);

  Index num_vertices() const { return static_cast<Index>(vertices_.size()); }
  Index num_edges() const { return static_cast<Index>(edges_.size()); }
  Index num_triangles() const { return static_cast<Index>(triangles_.size()); }

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<MeshEdge>& edges() const { return edges_; }
  const Vec3& vertex(Index v) const { return vertices_[v]; }
  const Triangle& triangle(Index t) const { return triangles_[t]; }
  const MeshEdge& edge(Index e) const { return edges_[e]; }

  /// Global edge id of local edge j of triangle t.
  Index triangle_edge(Index t, int j) const { return tri_edges_[t][j]; }
  /// True when local edge j of t runs in the global (ascending) direction.
  bool edge_aligned(Index t, int j) const;

  /// Columns are the chart basis vectors v1 - v0 and v2 - v0.
  Mat32 chart(Index t) const;
  Vec3 point(Index t, const Vec3& bary) const;

  /// Euler characteristic V - E + F.
  Index euler_characteristic() const { return num_vertices() - num_edges() + num_triangles(); }

  /// Midpoint subdivision: every triangle split into four, orientation kept.
  SurfaceMesh refined() const;
  /// Same connectivity, new vertex positions.
  SurfaceMesh with_vertices(std::vector<Vec3> vertices) const;

 private:
  void build_edges();

  std::vector<Vec3> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<MeshEdge> edges_;
  std::vector<std::array<Index, 3>> tri_edges_;
};

/// Regular icosahedron inscribed in the unit sphere, refined `level` times by
/// midpoint splitting with projection of new vertices onto the sphere.
SurfaceMesh build_icosphere(int level);

/// Class-I geodesic sphere: each icosahedron face split into frequency²
/// triangles on a barycentric grid, all vertices projected to the unit sphere.
SurfaceMesh build_geodesic_sphere(int frequency);

/// Maximum Euclidean edge length.
double mesh_size(const SurfaceMesh& mesh);

/// Reference coordinate of local vertex i: (0,0), (1,0), (0,1).
Vec2 reference_vertex(int i);

// OFF: "OFF", "V F 0", V lines "x y z", F lines "3 i j k".
void write_off(const SurfaceMesh& mesh, std::ostream& out);
void write_off(const SurfaceMesh& mesh, const std::string& path);
SurfaceMesh read_off(std::istream& in);
SurfaceMesh read_off(const std::string& path);

/// Legacy ASCII VTK POLYDATA of the flat mesh.
void write_vtk(const SurfaceMesh& mesh, const std::string& path);

}  // namespace isoemb
