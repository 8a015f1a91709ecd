#include "helpers.hpp"

#include <doctest.h>

using namespace isoemb;
using namespace testing;

namespace {

std::vector<std::shared_ptr<const ReferenceManifold>> all_manifolds() {
  return {unit_sphere(), ellipsoid(),
          std::make_shared<const ReferenceManifold>(ReferenceManifold::revolution(ricci_example_curve())),
          std::make_shared<const ReferenceManifold>(ReferenceManifold::revolution(revolution_flow_curve(1.0)))};
}

Vec3 probe(const ReferenceManifold& m, std::mt19937_64& rng, double spread) {
  std::uniform_real_distribution<double> u(-spread, spread);
  const Vec3 q = m.closest_point(m.place_from_unit_sphere(random_unit(rng)));
  return q + u(rng) * m.normal(q);
}

}  // namespace

TEST_SUITE("refgeom") {

TEST_CASE("closest point examples") {
  const Vec3 a = unit_sphere()->closest_point(Vec3(0.3, 0.4, 0.0));
  CHECK((a - Vec3(0.6, 0.8, 0.0)).norm() <= 1e-14);
  const Vec3 b = ellipsoid()->closest_point(Vec3(1.0, 0.0, 0.0));
  CHECK((b - Vec3(0.5, 0.0, 0.0)).norm() <= 1e-14);
  const Vec3 c = ellipsoid()->closest_point(Vec3(0.0, 0.0, 3.0));
  CHECK((c - Vec3(0.0, 0.0, 1.0)).norm() <= 1e-14);
  const Projection pr = unit_sphere()->project(Vec3(2.0, 0.0, 0.0));
  CHECK(pr.distance == doctest::Approx(1.0));
  CHECK((pr.normal - Vec3(1, 0, 0)).norm() <= 1e-14);
}

TEST_CASE("idempotence, normal alignment and unit normals") {
  std::mt19937_64 rng(11);
  for (const auto& m : all_manifolds()) {
    CAPTURE(m->name());
    for (int i = 0; i < 1000; ++i) {
      const Vec3 p = probe(*m, rng, 0.05);
      const Projection pr = m->project(p);
      CHECK((m->closest_point(pr.point) - pr.point).norm() <= 1e-12);
      CHECK(std::abs(pr.normal.norm() - 1.0) <= 1e-12);
      const Vec3 d = p - pr.point;
      CHECK(d.cross(pr.normal).norm() <= 1e-10);
      CHECK(std::abs(d.dot(pr.normal) - pr.distance) <= 1e-12);
    }
  }
}

TEST_CASE("ellipsoid closest point against dense sampling") {
  const auto m = ellipsoid();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> r(0.9, 1.1);
  const int n = 1000;
  std::vector<Vec3> samples;
  samples.reserve(n * n);
  for (int i = 0; i < n; ++i) {
    const double th = M_PI * (i + 0.5) / n;
    for (int j = 0; j < n; ++j) {
      const double ph = 2.0 * M_PI * j / n;
      samples.emplace_back(0.5 * std::sin(th) * std::cos(ph), 0.5 * std::sin(th) * std::sin(ph), std::cos(th));
    }
  }
  for (int trial = 0; trial < 4; ++trial) {
    const Vec3 p = r(rng) * random_unit(rng);
    const Vec3 q = m->closest_point(p);
    CHECK(std::abs(4.0 * q.x() * q.x() + 4.0 * q.y() * q.y() + q.z() * q.z() - 1.0) <= 1e-13);
    double best = 1e300;
    for (const auto& s : samples) best = std::min(best, (s - p).norm());
    const double mine = (q - p).norm();
    CHECK(mine <= best + 1e-6);
    CHECK(best - mine <= 1e-4);
  }
}

TEST_CASE("Jacobian") {
  const auto s = unit_sphere();
  const Vec3 n = Vec3(1, 2, 2) / 3.0;
  CHECK((s->jacobian(n) - (Mat3::Identity() - n * n.transpose())).norm() <= 1e-13);
  std::mt19937_64 rng(3);
  const double eps = 1e-5;
  for (const auto& m : all_manifolds()) {
    CAPTURE(m->name());
    for (int i = 0; i < 100; ++i) {
      const Vec3 p = probe(*m, rng, 0.05);
      const Vec3 w = random_unit(rng);
      const Vec3 fd = (m->closest_point(p + eps * w) - m->closest_point(p - eps * w)) / (2.0 * eps);
      CHECK((fd - m->jacobian(p) * w).norm() <= 1e-6);
    }
    for (int i = 0; i < 100; ++i) {
      const Vec3 q = probe(*m, rng, 0.0);
      const Projection pr = m->project(q);
      const Mat3 da = m->jacobian(q);
      CHECK((da * pr.normal).norm() <= 1e-12);
      // Tangent vectors pass through unchanged.
      Vec3 t = random_unit(rng);
      t -= t.dot(pr.normal) * pr.normal;
      CHECK((da * t - t).norm() <= 1e-10);
    }
  }
}

TEST_CASE("Gaussian curvature of the manifolds") {
  CHECK(unit_sphere()->gaussian_curvature(Vec3(0, 0, 1)) == doctest::Approx(1.0));
  // Semi-axes (½,½,1): K = c²/(a²b²) at the poles and a²/(b²c²) on the x axis.
  CHECK(ellipsoid()->gaussian_curvature(Vec3(0, 0, 1)) == doctest::Approx(16.0));
  CHECK(ellipsoid()->gaussian_curvature(Vec3(0.5, 0, 0)) == doctest::Approx(1.0));
}

TEST_CASE("pullback at a tangency point is the flat first fundamental form") {
  const double a = 0.2;
  std::vector<Vec3> v = {Vec3(a, 0, 1), Vec3(-0.5 * a, 0.5 * std::sqrt(3.0) * a, 1),
                         Vec3(-0.5 * a, -0.5 * std::sqrt(3.0) * a, 1), Vec3(0, 0, -0.5)};
  auto mesh = std::make_shared<const SurfaceMesh>(v, std::vector<Triangle>{{0, 1, 2}, {0, 3, 1}, {1, 3, 2}, {2, 3, 0}});
  const PulledBackMetric g(unit_sphere(), mesh, induced_metric());
  const Mat32 e = mesh->chart(0);
  const Sym2 at = g(0, Vec3::Constant(1.0 / 3.0), 0.0);
  CHECK((at - e.transpose() * e).norm() <= 1e-14);
  // Away from the tangency point the lift shrinks lengths.
  const Sym2 off = g(0, Vec3(1, 0, 0), 0.0);
  CHECK(off(0, 0) < (e.transpose() * e)(0, 0));
}

TEST_CASE("pullbacks are tt-continuous and positive definite") {
  for (const auto& m : all_manifolds()) {
    CAPTURE(m->name());
    auto mesh = placed_mesh(*m, 2);
    const PulledBackMetric g(m, mesh, induced_metric());
    const ChartTensorFn f = g.at(0.0);
    double worst = 0.0;
    for (Index e = 0; e < mesh->num_edges(); ++e) {
      for (double j : tt_jump(*mesh, f, e, 5)) worst = std::max(worst, j);
    }
    CHECK(worst <= 1e-10);
    const QuadratureRule& q = quadrature_rule(9);
    double lo = 1e300;
    for (Index t = 0; t < mesh->num_triangles(); ++t) {
      for (const auto& b : q.points) {
        const Sym2 s = f(t, b);
        CHECK(std::abs(s(0, 1) - s(1, 0)) <= 1e-15);
        lo = std::min(lo, Eigen::SelfAdjointEigenSolver<Mat2>(s).eigenvalues()[0]);
      }
    }
    CHECK(lo > 0.0);
  }
}

TEST_CASE("sphere area through the pulled-back volume form") {
  auto s = unit_sphere();
  auto mesh = placed_mesh(*s, 4);
  const PulledBackMetric g(s, mesh, induced_metric());
  const MetricContext ctx(mesh, g.at(0.0), 14);
  double area = 0.0;
  for (Index t = 0; t < mesh->num_triangles(); ++t) {
    for (int q = 0; q < ctx.points_per_element(); ++q) area += ctx.volume(t, q);
  }
  CHECK(std::abs(area - 4.0 * M_PI) <= 1e-8);
}

TEST_CASE("pullback of a time-dependent tensor carries its rate") {
  auto s = unit_sphere();
  auto mesh = placed_mesh(*s, 1);
  const AmbientTensor val = [](double t, const Vec3&) -> Mat3 { return (1.0 + t * t) * Mat3::Identity(); };
  const AmbientTensor rate = [](double t, const Vec3&) -> Mat3 { return 2.0 * t * Mat3::Identity(); };
  const PulledBackMetric g(s, mesh, val, rate);
  REQUIRE(g.has_rate());
  const Vec3 b(0.2, 0.3, 0.5);
  const Sym2 fd = (g(3, b, 0.5 + 1e-6) - g(3, b, 0.5 - 1e-6)) / 2e-6;
  CHECK((g.rate(3, b, 0.5) - fd).norm() <= 1e-8);
  const PulledBackMetric plain(s, mesh, val);
  CHECK_FALSE(plain.has_rate());
}

}
