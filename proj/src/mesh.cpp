#include "isoemb/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace isoemb {

SurfaceMesh::SurfaceMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  for (const auto& t : triangles_) {
    for (Index v : t) {
      if (v < 0 || v >= num_vertices()) throw InvalidMesh("vertex index out of range");
    }
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) throw InvalidMesh("degenerate triangle");
  }
  build_edges();
}

void SurfaceMesh::build_edges() {
  // Directed half-edge -> (triangle, local slot); each undirected edge must be
  // seen exactly once per direction for a closed oriented surface.
  std::map<std::pair<Index, Index>, std::pair<Index, int>> directed;
  for (Index t = 0; t < num_triangles(); ++t) {
    for (int j = 0; j < 3; ++j) {
      const Index a = triangles_[t][(j + 1) % 3];
      const Index b = triangles_[t][(j + 2) % 3];
      if (!directed.emplace(std::make_pair(a, b), std::make_pair(t, j)).second) {
        throw InvalidMesh("inconsistent orientation or non-manifold edge (" + std::to_string(a) +
                          "," + std::to_string(b) + ")");
      }
    }
  }
  tri_edges_.assign(triangles_.size(), {-1, -1, -1});
  edges_.clear();
  for (const auto& [key, val] : directed) {
    const auto [a, b] = key;
    if (a > b) continue;
    auto twin = directed.find({b, a});
    if (twin == directed.end()) throw InvalidMesh("open surface: boundary edge found");
    MeshEdge e;
    e.v = {a, b};
    e.tri = {val.first, twin->second.first};
    e.local = {val.second, twin->second.second};
    const Index id = static_cast<Index>(edges_.size());
    tri_edges_[val.first][val.second] = id;
    tri_edges_[twin->second.first][twin->second.second] = id;
    edges_.push_back(e);
  }
  if (2 * num_edges() != 3 * num_triangles()) throw InvalidMesh("edge/triangle count mismatch");
}

bool SurfaceMesh::edge_aligned(Index t, int j) const {
  return triangles_[t][(j + 1) % 3] < triangles_[t][(j + 2) % 3];
}

Mat32 SurfaceMesh::chart(Index t) const {
  const auto& tri = triangles_[t];
  Mat32 c;
  c.col(0) = vertices_[tri[1]] - vertices_[tri[0]];
  c.col(1) = vertices_[tri[2]] - vertices_[tri[0]];
  return c;
}

Vec3 SurfaceMesh::point(Index t, const Vec3& bary) const {
  const auto& tri = triangles_[t];
  return bary[0] * vertices_[tri[0]] + bary[1] * vertices_[tri[1]] + bary[2] * vertices_[tri[2]];
}

SurfaceMesh SurfaceMesh::refined() const {
  std::vector<Vec3> verts = vertices_;
  std::vector<Index> mid(edges_.size());
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    mid[e] = static_cast<Index>(verts.size());
    verts.push_back(0.5 * (vertices_[edges_[e].v[0]] + vertices_[edges_[e].v[1]]));
  }
  std::vector<Triangle> tris;
  tris.reserve(4 * triangles_.size());
  for (Index t = 0; t < num_triangles(); ++t) {
    const auto& v = triangles_[t];
    // Midpoint opposite local vertex j sits on local edge j.
    const Index m0 = mid[tri_edges_[t][0]];
    const Index m1 = mid[tri_edges_[t][1]];
    const Index m2 = mid[tri_edges_[t][2]];
    tris.push_back({v[0], m2, m1});
    tris.push_back({m2, v[1], m0});
    tris.push_back({m1, m0, v[2]});
    tris.push_back({m0, m1, m2});
  }
  return SurfaceMesh(std::move(verts), std::move(tris));
}

SurfaceMesh SurfaceMesh::with_vertices(std::vector<Vec3> vertices) const {
  if (vertices.size() != vertices_.size()) throw MeshMismatch("vertex count differs");
  SurfaceMesh m = *this;
  m.vertices_ = std::move(vertices);
  return m;
}

namespace {

void icosahedron(std::vector<Vec3>& v, std::vector<Triangle>& f) {
  const double phi = 0.5 * (1.0 + std::sqrt(5.0));
  v = {Vec3(-1, phi, 0), Vec3(1, phi, 0),   Vec3(-1, -phi, 0), Vec3(1, -phi, 0),
       Vec3(0, -1, phi), Vec3(0, 1, phi),   Vec3(0, -1, -phi), Vec3(0, 1, -phi),
       Vec3(phi, 0, -1), Vec3(phi, 0, 1),   Vec3(-phi, 0, -1), Vec3(-phi, 0, 1)};
  // Rotate about x so that vertices 5 and 6 sit on the z axis.
  const double c = phi / std::sqrt(1.0 + phi * phi), s = 1.0 / std::sqrt(1.0 + phi * phi);
  for (auto& p : v) {
    p = Vec3(p.x(), c * p.y() - s * p.z(), s * p.y() + c * p.z()).normalized();
  }
  f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
       {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
       {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
}

}  // namespace

SurfaceMesh build_icosphere(int level) {
  if (level < 0 || level > 10) throw InvalidMesh("icosphere level must be in [0, 10]");
  std::vector<Vec3> v;
  std::vector<Triangle> f;
  icosahedron(v, f);
  SurfaceMesh mesh(std::move(v), std::move(f));
  for (int l = 0; l < level; ++l) {
    SurfaceMesh fine = mesh.refined();
    std::vector<Vec3> pts = fine.vertices();
    for (auto& p : pts) p.normalize();
    mesh = fine.with_vertices(std::move(pts));
  }
  return mesh;
}

SurfaceMesh build_geodesic_sphere(int frequency) {
  if (frequency < 1 || frequency > 256) throw InvalidMesh("geodesic frequency must be in [1, 256]");
  std::vector<Vec3> base;
  std::vector<Triangle> faces;
  icosahedron(base, faces);
  const int n = frequency;
  // Shared grid points are keyed combinatorially: a point with integer
  // barycentric weights (i, j, k) over face vertices (a, b, c) is identified
  // by the sorted list of (vertex, weight) pairs with nonzero weight.
  std::map<std::vector<std::pair<Index, int>>, Index> ids;
  std::vector<Vec3> verts;
  auto node = [&](const Triangle& fc, int i, int j, int k) {
    std::vector<std::pair<Index, int>> key;
    if (i) key.emplace_back(fc[0], i);
    if (j) key.emplace_back(fc[1], j);
    if (k) key.emplace_back(fc[2], k);
    std::sort(key.begin(), key.end());
    auto it = ids.find(key);
    if (it != ids.end()) return it->second;
    Vec3 p = Vec3::Zero();
    for (const auto& [vid, wgt] : key) p += (double(wgt) / n) * base[vid];
    p.normalize();
    const Index id = static_cast<Index>(verts.size());
    verts.push_back(p);
    ids.emplace(std::move(key), id);
    return id;
  };
  std::vector<Triangle> tris;
  for (const auto& fc : faces) {
    // Grid index (p, q): weight on vertex 1 is p, on vertex 2 is q.
    for (int q = 0; q < n; ++q) {
      for (int p = 0; p + q < n; ++p) {
        const Index a = node(fc, n - p - q, p, q);
        const Index b = node(fc, n - p - q - 1, p + 1, q);
        const Index c = node(fc, n - p - q - 1, p, q + 1);
        tris.push_back({a, b, c});
        if (p + q + 2 <= n) {
          const Index d = node(fc, n - p - q - 2, p + 1, q + 1);
          tris.push_back({b, d, c});
        }
      }
    }
  }
  return SurfaceMesh(std::move(verts), std::move(tris));
}

double mesh_size(const SurfaceMesh& mesh) {
  if (mesh.num_edges() == 0) throw InvalidMesh("empty mesh");
  double h = 0.0;
  for (const auto& e : mesh.edges()) h = std::max(h, (mesh.vertex(e.v[1]) - mesh.vertex(e.v[0])).norm());
  return h;
}

Vec2 reference_vertex(int i) {
  switch (i) {
    case 0: return Vec2(0.0, 0.0);
    case 1: return Vec2(1.0, 0.0);
    default: return Vec2(0.0, 1.0);
  }
}

void write_off(const SurfaceMesh& mesh, std::ostream& out) {
  out << "OFF\n" << mesh.num_vertices() << ' ' << mesh.num_triangles() << " 0\n";
  out << std::setprecision(17);
  for (const auto& p : mesh.vertices()) out << p[0] << ' ' << p[1] << ' ' << p[2] << '\n';
  for (const auto& t : mesh.triangles()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

void write_off(const SurfaceMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path);
  write_off(mesh, out);
  if (!out) throw IoError("write failed: " + path);
}

SurfaceMesh read_off(std::istream& in) {
  auto next_line = [&](std::string& line) {
    while (std::getline(in, line)) {
      const auto pos = line.find('#');
      if (pos != std::string::npos) line.erase(pos);
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };
  std::string line;
  if (!next_line(line)) throw IoError("empty OFF input");
  std::istringstream header(line);
  std::string magic;
  header >> magic;
  Index nv = -1, nf = -1;
  if (magic == "OFF") {
    if (!(header >> nv >> nf)) {
      if (!next_line(line)) throw IoError("missing OFF counts");
      std::istringstream counts(line);
      counts >> nv >> nf;
    }
  } else {
    std::istringstream counts(line);
    counts >> nv >> nf;
  }
  if (nv <= 0 || nf <= 0) throw IoError("bad OFF counts");
  std::vector<Vec3> v(nv);
  for (Index i = 0; i < nv; ++i) {
    if (!next_line(line)) throw IoError("truncated OFF vertices");
    std::istringstream ls(line);
    if (!(ls >> v[i][0] >> v[i][1] >> v[i][2])) throw IoError("bad OFF vertex line");
  }
  std::vector<Triangle> f(nf);
  for (Index i = 0; i < nf; ++i) {
    if (!next_line(line)) throw IoError("truncated OFF faces");
    std::istringstream ls(line);
    int count = 0;
    if (!(ls >> count) || count != 3) throw IoError("only triangular OFF faces are supported");
    if (!(ls >> f[i][0] >> f[i][1] >> f[i][2])) throw IoError("bad OFF face line");
  }
  SurfaceMesh mesh(std::move(v), std::move(f));
  if (mesh.euler_characteristic() != 2) throw InvalidMesh("imported mesh is not genus 0");
  return mesh;
}

SurfaceMesh read_off(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_off(in);
}

void write_vtk(const SurfaceMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path);
  out << "# vtk DataFile Version 3.0\nsurface mesh\nASCII\nDATASET POLYDATA\n";
  out << "POINTS " << mesh.num_vertices() << " double\n" << std::setprecision(17);
  for (const auto& p : mesh.vertices()) out << p[0] << ' ' << p[1] << ' ' << p[2] << '\n';
  out << "POLYGONS " << mesh.num_triangles() << ' ' << 4 * mesh.num_triangles() << '\n';
  for (const auto& t : mesh.triangles()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace isoemb
