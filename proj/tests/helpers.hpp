#pragma once

#include "isoemb/experiments.hpp"

#include <cmath>
#include <memory>
#include <random>
#include <vector>

namespace testing {

using namespace isoemb;

inline std::shared_ptr<const ReferenceManifold> unit_sphere() {
  return std::make_shared<const ReferenceManifold>(ReferenceManifold::sphere(1.0));
}

inline std::shared_ptr<const ReferenceManifold> ellipsoid() {
  return std::make_shared<const ReferenceManifold>(ReferenceManifold::ellipsoid(Vec3(0.5, 0.5, 1.0)));
}

inline std::shared_ptr<const SurfaceMesh> sphere_mesh(int level) {
  return std::make_shared<const SurfaceMesh>(build_icosphere(level));
}

inline std::shared_ptr<const SurfaceMesh> placed_mesh(const ReferenceManifold& m, int level) {
  return std::make_shared<const SurfaceMesh>(place_on_manifold(build_icosphere(level), m));
}

inline double slope(double e1, double e2, double h1, double h2) { return std::log(e1 / e2) / std::log(h1 / h2); }

/// g_{M_h} = R_h(a*g_M) as a metric context.
inline MetricContext reference_context(std::shared_ptr<const ReferenceManifold> m,
                                       std::shared_ptr<const SurfaceMesh> mesh, int kg, int quad) {
  const PulledBackMetric ref(m, mesh, induced_metric());
  return MetricContext(regge_interpolate(build_regge_space(mesh, kg), ref, 0.0), quad);
}

inline FeField identity_field(std::shared_ptr<const LagrangeSpace> space, const ReferenceManifold& m) {
  return interpolate(space, [&](const Vec3& x) -> Vec3 { return m.closest_point(x); });
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return Vec3(n(rng), n(rng), n(rng)).normalized();
}

inline Vec3 random_bary(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double a = u(rng), b = u(rng);
  if (a + b > 1.0) {
    a = 1.0 - a;
    b = 1.0 - b;
  }
  return Vec3(1.0 - a - b, a, b);
}

}  // namespace testing
