#include "helpers.hpp"

#include <doctest.h>

using namespace isoemb;
using namespace testing;

namespace {

// Barycentric point of triangle t on local edge j at fraction mu of the global edge direction.
Vec3 edge_bary(const SurfaceMesh& m, Index t, int j, double mu) {
  const MeshEdge& e = m.edge(m.triangle_edge(t, j));
  Vec3 b = Vec3::Zero();
  for (int i = 0; i < 3; ++i) {
    if (m.triangle(t)[i] == e.v[0]) b[i] = 1.0 - mu;
    if (m.triangle(t)[i] == e.v[1]) b[i] = mu;
  }
  return b;
}

double smooth(const Vec3& q) { return std::sin(2.0 * q.x()) + q.y() * q.z() * q.z() + std::exp(0.5 * q.z()); }

Vec3 smooth_gradient(const Vec3& q) {
  return Vec3(2.0 * std::cos(2.0 * q.x()), q.z() * q.z(), 2.0 * q.y() * q.z() + 0.5 * std::exp(0.5 * q.z()));
}

}  // namespace

TEST_SUITE("lagrange") {

TEST_CASE("dimensions") {
  auto m = sphere_mesh(0);
  CHECK(LagrangeSpace(m, 1).dim() == 12);
  CHECK(LagrangeSpace(m, 2).dim() == 42);
  CHECK(LagrangeSpace(m, 5).dim() == 252);
  auto m2 = sphere_mesh(2);
  for (int k = 1; k <= 8; ++k) {
    const LagrangeSpace s(m2, k);
    CHECK(s.dim() == m2->num_vertices() + m2->num_edges() * (k - 1) + m2->num_triangles() * (k - 1) * (k - 2) / 2);
    CHECK(s.local_size() == (k + 1) * (k + 2) / 2);
  }
  CHECK_THROWS_AS(LagrangeSpace(m, 0), UnsupportedDegree);
  CHECK_THROWS_AS(LagrangeSpace(m, 9), UnsupportedDegree);
}

TEST_CASE("DOF maps agree across shared edges") {
  auto m = sphere_mesh(1);
  for (int k : {1, 3, 5}) {
    const LagrangeSpace s(m, k);
    for (Index t = 0; t < m->num_triangles(); ++t) {
      const auto dofs = s.element_dofs(t);
      for (int a = 0; a < s.local_size(); ++a) {
        const auto& l = s.lattice()[a];
        const Vec3 b(l[0], l[1], l[2]);
        CHECK((m->point(t, b / k) - s.nodes()[dofs[a]]).norm() <= 1e-14);
      }
    }
  }
}

TEST_CASE("partition of unity") {
  auto m = sphere_mesh(0);
  for (int k = 1; k <= 8; ++k) {
    const LagrangeSpace s(m, k);
    const QuadratureRule& q = quadrature_rule(2 * k + 3);
    const LagrangeTabulation& tab = s.tabulate(q);
    for (std::size_t i = 0; i < q.size(); ++i) {
      CHECK(std::abs(tab.value.row(i).sum() - 1.0) <= 1e-13);
      CHECK(std::abs(tab.d1.row(i).sum()) <= 1e-11);
      CHECK(std::abs(tab.d2.row(i).sum()) <= 1e-11);
    }
  }
}

TEST_CASE("interpolation examples and reproduction") {
  auto m = sphere_mesh(0);
  std::mt19937_64 rng(7);
  for (int k = 1; k <= 6; ++k) {
    auto s = std::make_shared<const LagrangeSpace>(m, k);
    const FeField c = interpolate(s, [](const Vec3&) { return 2.5; });
    CHECK((c.coefficients().array() == 2.5).all());
    // An ambient polynomial of degree k restricts to a chart polynomial of degree k.
    auto poly = [k](const Vec3& x) { return std::pow(x.x() + 0.3 * x.y() - 0.2 * x.z() + 0.1, k) + (k >= 2 ? x.y() * x.z() : 0.0); };
    const FeField f = interpolate(s, poly);
    for (Index t : {0, 7, 19}) {
      for (int i = 0; i < 20; ++i) {
        const Vec3 b = random_bary(rng);
        const FieldSample fs = eval_with_gradient(f, t, b);
        CHECK(std::abs(fs.value[0] - poly(m->point(t, b))) <= 1e-12);
      }
    }
    const FeField sq = interpolate(s, [](const Vec3& x) { return x.squaredNorm(); });
    if (k >= 2) {
      const Vec3 b(0.2, 0.5, 0.3);
      CHECK(std::abs(eval_with_gradient(sq, 4, b).value[0] - m->point(4, b).squaredNorm()) <= 1e-13);
    }
  }
}

TEST_CASE("gradients") {
  auto m = sphere_mesh(1);
  const Index t = 5;
  const Mat32 e = m->chart(t);
  const Vec3 v0 = m->vertex(m->triangle(t)[0]);
  // Linear function equal to the chart coordinate ξ1 on triangle t.
  const Mat2 gram = e.transpose() * e;
  const Vec3 c = e * gram.inverse().col(0);
  for (int k : {1, 4}) {
    auto s = std::make_shared<const LagrangeSpace>(m, k);
    const FeField lin = interpolate(s, [&](const Vec3& x) { return c.dot(x - v0); });
    const FieldSample fs = eval_with_gradient(lin, t, Vec3(0.1, 0.6, 0.3));
    CHECK(std::abs(fs.gradient(0, 0) - 1.0) <= 1e-12);
    CHECK(std::abs(fs.gradient(0, 1)) <= 1e-12);
    const FeField one = interpolate(s, [](const Vec3&) { return 1.0; });
    CHECK(eval_with_gradient(one, t, Vec3(0.3, 0.3, 0.4)).gradient.norm() <= 1e-12);
  }
  auto s = std::make_shared<const LagrangeSpace>(m, 5);
  const FeField f = interpolate(s, [](const Vec3& x) -> Vec3 { return Vec3(std::sin(3 * x.x()), x.y() * x.z(), std::exp(x.z())); });
  std::mt19937_64 rng(2);
  const double h = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    Vec3 b = random_bary(rng);
    b = 0.8 * b + Vec3::Constant(0.2 / 3.0);
    const FieldSample fs = eval_with_gradient(f, 3, b);
    const Vec3 d1 = (eval_with_gradient(f, 3, b + Vec3(-h, h, 0)).value - eval_with_gradient(f, 3, b - Vec3(-h, h, 0)).value) / (2 * h);
    const Vec3 d2 = (eval_with_gradient(f, 3, b + Vec3(-h, 0, h)).value - eval_with_gradient(f, 3, b - Vec3(-h, 0, h)).value) / (2 * h);
    CHECK((fs.gradient.col(0) - d1).norm() <= 1e-7);
    CHECK((fs.gradient.col(1) - d2).norm() <= 1e-7);
  }
}

TEST_CASE("fields are continuous across edges") {
  auto m = placed_mesh(*ellipsoid(), 1);
  auto s = std::make_shared<const LagrangeSpace>(m, 4);
  const FeField f = interpolate(s, [](const Vec3& x) -> Vec3 { return Vec3(std::cos(x.x()), x.y() * x.y(), x.z()); });
  const LineRule& g = gauss_legendre(5);
  double worst = 0.0;
  for (Index e = 0; e < m->num_edges(); ++e) {
    const MeshEdge& me = m->edge(e);
    for (double mu : g.points) {
      const Vec3 a = eval_with_gradient(f, me.tri[0], edge_bary(*m, me.tri[0], me.local[0], mu)).value;
      const Vec3 b = eval_with_gradient(f, me.tri[1], edge_bary(*m, me.tri[1], me.local[1], mu)).value;
      worst = std::max(worst, (a - b).norm());
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("interpolation of a lifted smooth function converges") {
  const auto sph = unit_sphere();
  const int k = 3;
  std::vector<double> hs, linf, l2, h1;
  const QuadratureRule& q = quadrature_rule(2 * k + 4);
  for (int level = 1; level <= 3; ++level) {
    auto m = sphere_mesh(level);
    auto s = std::make_shared<const LagrangeSpace>(m, k);
    const FeField f = interpolate(s, [&](const Vec3& x) { return smooth(sph->closest_point(x)); });
    double emax = 0.0, e2 = 0.0, g2 = 0.0;
    for (Index t = 0; t < m->num_triangles(); ++t) {
      const Mat32 e = m->chart(t);
      const double area = e.col(0).cross(e.col(1)).norm();
      const Mat2 ginv = (e.transpose() * e).inverse();
      for (std::size_t i = 0; i < q.size(); ++i) {
        const Vec3 x = m->point(t, q.points[i]);
        const FieldSample fs = eval_with_gradient(f, t, q.points[i]);
        const double err = fs.value[0] - smooth(sph->closest_point(x));
        const Eigen::RowVector2d exact = smooth_gradient(sph->closest_point(x)).transpose() * sph->jacobian(x) * e;
        const Eigen::RowVector2d de = fs.gradient.row(0) - exact;
        emax = std::max(emax, std::abs(err));
        e2 += q.weights[i] * area * err * err;
        g2 += q.weights[i] * area * de * ginv * de.transpose();
      }
    }
    hs.push_back(mesh_size(*m));
    linf.push_back(emax);
    l2.push_back(std::sqrt(e2));
    h1.push_back(std::sqrt(g2));
  }
  for (int i = 1; i < 3; ++i) {
    CHECK(slope(linf[i - 1], linf[i], hs[i - 1], hs[i]) == doctest::Approx(k + 1).epsilon(0.3 / (k + 1)));
    CHECK(slope(l2[i - 1], l2[i], hs[i - 1], hs[i]) == doctest::Approx(k + 1).epsilon(0.3 / (k + 1)));
    CHECK(slope(h1[i - 1], h1[i], hs[i - 1], hs[i]) == doctest::Approx(k).epsilon(0.3 / k));
  }
}

TEST_CASE("field arithmetic") {
  auto s = std::make_shared<const LagrangeSpace>(sphere_mesh(0), 2);
  const FeField a = interpolate(s, [](const Vec3& x) -> Vec3 { return x; });
  const FeField b = interpolate(s, [](const Vec3& x) -> Vec3 { return 2.0 * x; });
  CHECK(((2.0 * a - b).coefficients()).norm() == 0.0);
  CHECK((a + a).coefficients() == b.coefficients());
  CHECK(a.same_space(b));
  CHECK(a.coefficients().size() == 3 * s->dim());
}

TEST_CASE("rigid motion basis") {
  auto s = std::make_shared<const LagrangeSpace>(sphere_mesh(0), 2);
  const FeField c(s, 3, interpolate(s, [](const Vec3&) -> Vec3 { return Vec3(1, 2, 3); }).coefficients());
  const auto rb = rigid_motion_basis(c);
  for (Index n = 0; n < s->dim(); ++n) {
    CHECK((rb[2].node_vector(n) - Vec3(-2, 1, 0)).norm() == 0.0);
    CHECK((rb[3].node_vector(n) - Vec3(1, 0, 0)).norm() == 0.0);
    CHECK((rb[5].node_vector(n) - Vec3(0, 0, 1)).norm() == 0.0);
  }
  const auto sph = unit_sphere();
  auto mesh = sphere_mesh(0);
  auto space = std::make_shared<const LagrangeSpace>(mesh, 2);
  const MetricContext ctx = reference_context(sph, mesh, 2, 7);
  const FeField r = identity_field(space, *sph);
  const auto basis = rigid_motion_basis(r);
  Eigen::Matrix<double, 6, 6> gram;
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) gram(i, j) = inner_vector(basis[i], basis[j], ctx);
  }
  const Eigen::Matrix<double, 6, 1> ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>>(gram).eigenvalues();
  CHECK(ev[0] > 1e-3 * ev[5]);
  // Translations of the unit sphere: Gram = area · I.
  CHECK(gram(3, 3) == doctest::Approx(gram(4, 4)).epsilon(1e-10));
}

}
