#include "helpers.hpp"

#include <doctest.h>

#include <map>
#include <sstream>

using namespace isoemb;
using namespace testing;

TEST_SUITE("mesh") {

TEST_CASE("icosphere combinatorics") {
  const int expected[3][3] = {{12, 30, 20}, {42, 120, 80}, {162, 480, 320}};
  for (int l = 0; l < 3; ++l) {
    const SurfaceMesh m = build_icosphere(l);
    CHECK(m.num_vertices() == expected[l][0]);
    CHECK(m.num_edges() == expected[l][1]);
    CHECK(m.num_triangles() == expected[l][2]);
    CHECK(m.euler_characteristic() == 2);
  }
  CHECK_THROWS_AS(build_icosphere(11), InvalidMesh);
  CHECK_THROWS_AS(build_icosphere(-1), InvalidMesh);
}

TEST_CASE("closed and consistently oriented") {
  for (int l = 0; l < 4; ++l) {
    const SurfaceMesh m = build_icosphere(l);
    std::map<std::pair<Index, Index>, int> directed;
    for (const auto& t : m.triangles()) {
      for (int j = 0; j < 3; ++j) directed[{t[j], t[(j + 1) % 3]}]++;
    }
    for (const auto& [e, n] : directed) {
      CHECK(n == 1);
      CHECK(directed.count({e.second, e.first}) == 1);
    }
    for (const auto& e : m.edges()) {
      CHECK(e.tri[0] >= 0);
      CHECK(e.tri[1] >= 0);
    }
    // Outward orientation: normals of all faces point away from the origin.
    for (Index t = 0; t < m.num_triangles(); ++t) {
      const Mat32 c = m.chart(t);
      const Vec3 n = c.col(0).cross(c.col(1));
      CHECK(n.dot(m.point(t, Vec3(1, 1, 1) / 3.0)) > 0.0);
    }
    for (const auto& v : m.vertices()) CHECK(std::abs(v.norm() - 1.0) <= 1e-12);
  }
}

TEST_CASE("geodesic sphere counts") {
  for (int f = 1; f <= 5; ++f) {
    const SurfaceMesh m = build_geodesic_sphere(f);
    CHECK(m.num_triangles() == 20 * f * f);
    CHECK(m.euler_characteristic() == 2);
  }
  // Frequency 2 and one midpoint refinement share the combinatorics.
  CHECK(build_geodesic_sphere(2).num_vertices() == build_icosphere(1).num_vertices());
}

TEST_CASE("mesh_size") {
  CHECK(mesh_size(build_icosphere(0)) == doctest::Approx(4.0 / std::sqrt(10.0 + 2.0 * std::sqrt(5.0))).epsilon(1e-12));
  // Regular tetrahedron with edge 2: every face an equilateral triangle of side 2.
  const double s = 1.0 / std::sqrt(2.0);
  const SurfaceMesh tet({Vec3(s, s, s), Vec3(s, -s, -s), Vec3(-s, s, -s), Vec3(-s, -s, s)},
                        {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}});
  CHECK(mesh_size(tet) == doctest::Approx(2.0).epsilon(1e-14));
  // Flat refinement halves h exactly.
  CHECK(mesh_size(tet.refined()) == doctest::Approx(1.0).epsilon(1e-14));
  // The first split is a geometric exception: the icosahedron edge against the
  // level-1 maximum chord 1/φ.
  const double phi = 0.5 * (1.0 + std::sqrt(5.0));
  CHECK(mesh_size(build_icosphere(1)) == doctest::Approx(1.0 / phi).epsilon(1e-12));
  for (int l = 1; l < 5; ++l) {
    const double ratio = mesh_size(build_icosphere(l)) / mesh_size(build_icosphere(l + 1));
    CHECK(ratio >= 1.8);
    CHECK(ratio <= 2.1);
  }
}

TEST_CASE("invalid meshes are rejected") {
  CHECK_THROWS_AS(SurfaceMesh({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)}, {{0, 1, 2}}), InvalidMesh);
  CHECK_THROWS_AS(SurfaceMesh({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)}, {{0, 1, 3}}), InvalidMesh);
}

TEST_CASE("quadrature exactness") {
  auto exact = [](int a, int b) { return std::tgamma(a + 1.0) * std::tgamma(b + 1.0) / std::tgamma(a + b + 3.0); };
  for (int d = 0; d <= kMaxQuadratureDegree; ++d) {
    const QuadratureRule& q = quadrature_rule(d);
    double wsum = 0.0;
    for (double w : q.weights) wsum += w;
    CHECK(wsum == doctest::Approx(0.5).epsilon(1e-14));
    for (int a = 0; a <= d; ++a) {
      for (int b = 0; a + b <= d; ++b) {
        double s = 0.0;
        for (std::size_t i = 0; i < q.size(); ++i) s += q.weights[i] * std::pow(q.points[i][1], a) * std::pow(q.points[i][2], b);
        CHECK(std::abs(s - exact(a, b)) <= 1e-13 * exact(a, b));
      }
    }
  }
  const QuadratureRule& c = quadrature_rule(1);
  CHECK(c.size() == 1);
  CHECK(c.weights[0] == doctest::Approx(0.5));
  CHECK((c.points[0] - Vec3::Constant(1.0 / 3.0)).norm() <= 1e-15);
  const QuadratureRule& q3 = quadrature_rule(3);
  double x2y = 0.0;
  for (std::size_t i = 0; i < q3.size(); ++i) x2y += q3.weights[i] * q3.points[i][1] * q3.points[i][1] * q3.points[i][2];
  CHECK(x2y == doctest::Approx(1.0 / 60.0).epsilon(1e-14));
  CHECK_THROWS_AS(quadrature_rule(31), UnsupportedDegree);
}

TEST_CASE("OFF round trip") {
  const SurfaceMesh m = build_icosphere(1);
  std::stringstream ss;
  write_off(m, ss);
  const SurfaceMesh back = read_off(ss);
  REQUIRE(back.num_vertices() == m.num_vertices());
  REQUIRE(back.num_triangles() == m.num_triangles());
  for (Index i = 0; i < m.num_vertices(); ++i) CHECK(back.vertex(i) == m.vertex(i));
  for (Index t = 0; t < m.num_triangles(); ++t) CHECK(back.triangle(t) == m.triangle(t));
  std::stringstream bad("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n4 0 1 2 0\n");
  CHECK_THROWS_AS(read_off(bad), IoError);
}

TEST_CASE("edge orientation helpers") {
  const SurfaceMesh m = build_icosphere(1);
  for (Index t = 0; t < m.num_triangles(); ++t) {
    for (int j = 0; j < 3; ++j) {
      const MeshEdge& e = m.edge(m.triangle_edge(t, j));
      const Index a = m.triangle(t)[(j + 1) % 3], b = m.triangle(t)[(j + 2) % 3];
      CHECK(e.v[0] < e.v[1]);
      CHECK(m.edge_aligned(t, j) == (a == e.v[0]));
      CHECK(std::min(a, b) == e.v[0]);
      CHECK(std::max(a, b) == e.v[1]);
    }
  }
}

}
