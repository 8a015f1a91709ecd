#include "isoemb/refgeom.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace isoemb {
namespace {

constexpr int kMaxNewton = 50;

Mat3 tangent_projector(const Vec3& n) { return Mat3::Identity() - n * n.transpose(); }

Projection project_sphere(const ReferenceManifold::Sphere& s, const Vec3& p) {
  const double r = p.norm();
  if (r < 1e-300) throw ClosestPointDiverged("sphere projection of the center");
  Projection out;
  out.normal = p / r;
  out.point = s.radius * out.normal;
  out.distance = r - s.radius;
  out.shape = tangent_projector(out.normal) / s.radius;
  return out;
}

Projection project_ellipsoid(const ReferenceManifold::Ellipsoid& el, const Vec3& p) {
  const Vec3 a2 = el.semiaxes.cwiseProduct(el.semiaxes);
  const Vec3 pa = p.cwiseProduct(a2);  // p_i a_i²
  auto phi = [&](double t, double& dphi) {
    double f = -1.0;
    dphi = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double d = a2[i] + t;
      const double term = p[i] * p[i] * a2[i] / (d * d);
      f += term;
      dphi -= 2.0 * term / d;
    }
    return f;
  };
  // φ is decreasing and convex on (-min a², ∞); keep a bracket around Newton.
  double lo = -a2.minCoeff();
  double hi = std::max(1.0, p.norm() * el.semiaxes.maxCoeff());
  double t = 0.0;
  double dphi = 0.0;
  double f = phi(t, dphi);
  bool converged = false;
  for (int it = 0; it < kMaxNewton; ++it) {
    if (std::abs(f) <= 1e-14) {
      converged = true;
      break;
    }
    if (f > 0.0) lo = t; else hi = t;
    double next = t - f / dphi;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    t = next;
    f = phi(t, dphi);
  }
  if (!converged && std::abs(f) > 1e-14) {
    throw ClosestPointDiverged("ellipsoid Newton iteration did not converge");
  }
  Projection out;
  for (int i = 0; i < 3; ++i) out.point[i] = pa[i] / (a2[i] + t);
  Vec3 grad;
  for (int i = 0; i < 3; ++i) grad[i] = 2.0 * out.point[i] / a2[i];
  const double gn = grad.norm();
  out.normal = grad / gn;
  out.distance = (p - out.point).dot(out.normal);
  Mat3 hess = Mat3::Zero();
  for (int i = 0; i < 3; ++i) hess(i, i) = 2.0 / a2[i];
  const Mat3 P = tangent_projector(out.normal);
  out.shape = P * hess * P / gn;
  return out;
}

Projection project_revolution(const ReferenceManifold::Revolution& rev, const Vec3& p) {
  const auto& prof = rev.profile;
  const double rho = std::hypot(p[0], p[1]);
  const double theta = std::atan2(p[1], p[0]);
  auto dist2 = [&](double s) {
    const auto v = prof.eval(s);
    return (v.x - rho) * (v.x - rho) + (v.z - p[2]) * (v.z - p[2]);
  };
  // Coarse scan, then Newton on the stationarity condition.
  constexpr int kSamples = 64;
  double best_s = 0.0, best_d = dist2(0.0);
  for (int i = 1; i <= kSamples; ++i) {
    const double s = std::numbers::pi * i / kSamples;
    const double d = dist2(s);
    if (d < best_d) {
      best_d = d;
      best_s = s;
    }
  }
  double s = best_s;
  bool converged = false;
  for (int it = 0; it < kMaxNewton; ++it) {
    const auto v = prof.eval(s);
    const double f = (v.x - rho) * v.dx + (v.z - p[2]) * v.dz;
    const double df = v.dx * v.dx + v.dz * v.dz + (v.x - rho) * v.ddx + (v.z - p[2]) * v.ddz;
    if (std::abs(f) <= 1e-15) {
      converged = true;
      break;
    }
    if (!(df > 0.0)) break;
    double next = s - f / df;
    if (next <= 0.0 || next >= std::numbers::pi) {
      // The minimizer sits at a pole: the axis point.
      const double pole = next <= 0.0 ? 0.0 : std::numbers::pi;
      if (std::abs(s - pole) < 1e-14) {
        converged = true;
        break;
      }
      next = pole;
    }
    s = next;
  }
  if (!converged) {
    const auto v = prof.eval(s);
    const double f = (v.x - rho) * v.dx + (v.z - p[2]) * v.dz;
    const bool at_pole = s == 0.0 || s == std::numbers::pi;
    if (!at_pole && std::abs(f) > 1e-12) {
      throw ClosestPointDiverged("revolution profile Newton iteration did not converge");
    }
  }
  const auto v = prof.eval(s);
  const double c = std::cos(theta), sn = std::sin(theta);
  const double speed = std::hypot(v.dx, v.dz);
  Projection out;
  out.point = Vec3(v.x * c, v.x * sn, v.z);
  const double km = -(v.dx * v.ddz - v.ddx * v.dz) / (speed * speed * speed);
  const bool pole = v.x < 1e-13;
  if (pole) {
    out.point = Vec3(0.0, 0.0, v.z);
    out.normal = Vec3(0.0, 0.0, v.dx >= 0.0 ? 1.0 : -1.0);
    out.shape = km * tangent_projector(out.normal);
  } else {
    out.normal = Vec3(-v.dz * c, -v.dz * sn, v.dx) / speed;
    const Vec3 em = Vec3(v.dx * c, v.dx * sn, v.dz) / speed;
    const Vec3 et(-sn, c, 0.0);
    const double kp = -v.dz / (speed * v.x);
    out.shape = km * em * em.transpose() + kp * et * et.transpose();
  }
  out.distance = (p - out.point).dot(out.normal);
  return out;
}

}  // namespace

ReferenceManifold ReferenceManifold::sphere(double radius) {
  if (!(radius > 0.0)) throw InvalidMesh("sphere radius must be positive");
  return ReferenceManifold(Sphere{radius});
}

ReferenceManifold ReferenceManifold::ellipsoid(const Vec3& semiaxes) {
  if (!(semiaxes.minCoeff() > 0.0)) throw InvalidMesh("ellipsoid semiaxes must be positive");
  return ReferenceManifold(Ellipsoid{semiaxes});
}

ReferenceManifold ReferenceManifold::revolution(RevolutionProfile profile) {
  if (!profile.eval) throw InvalidMesh("revolution profile needs an evaluator");
  return ReferenceManifold(Revolution{std::move(profile)});
}

std::string ReferenceManifold::name() const {
  return std::visit(
      [](const auto& k) -> std::string {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Sphere>) return "sphere";
        else if constexpr (std::is_same_v<K, Ellipsoid>) return "ellipsoid";
        else return "revolution";
      },
      kind_);
}

Projection ReferenceManifold::project(const Vec3& p) const {
  return std::visit(
      [&](const auto& k) -> Projection {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Sphere>) return project_sphere(k, p);
        else if constexpr (std::is_same_v<K, Ellipsoid>) return project_ellipsoid(k, p);
        else return project_revolution(k, p);
      },
      kind_);
}

Mat3 ReferenceManifold::jacobian(const Vec3& p) const {
  const Projection pr = project(p);
  const Mat3 lhs = Mat3::Identity() + pr.distance * pr.shape;
  return lhs.inverse() * tangent_projector(pr.normal);
}

Vec3 ReferenceManifold::place_from_unit_sphere(const Vec3& u) const {
  const Vec3 dir = u.normalized();
  return std::visit(
      [&](const auto& k) -> Vec3 {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Sphere>) {
          return k.radius * dir;
        } else if constexpr (std::is_same_v<K, Ellipsoid>) {
          return dir.cwiseProduct(k.semiaxes);
        } else {
          const double s = std::acos(std::clamp(dir[2], -1.0, 1.0));
          const double th = std::atan2(dir[1], dir[0]);
          const auto v = k.profile.eval(s);
          return Vec3(v.x * std::cos(th), v.x * std::sin(th), v.z);
        }
      },
      kind_);
}

double ReferenceManifold::gaussian_curvature(const Vec3& q) const {
  return std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Sphere>) {
          return 1.0 / (k.radius * k.radius);
        } else if constexpr (std::is_same_v<K, Ellipsoid>) {
          const Vec3 a2 = k.semiaxes.cwiseProduct(k.semiaxes);
          double s = 0.0;
          for (int i = 0; i < 3; ++i) s += q[i] * q[i] / (a2[i] * a2[i]);
          return 1.0 / (a2.prod() * s * s);
        } else {
          const Projection pr = project(q);
          // Product of the two nonzero eigenvalues of the Weingarten map.
          Eigen::SelfAdjointEigenSolver<Mat3> es(pr.shape);
          const Vec3 ev = es.eigenvalues();
          // One eigenvalue is ~0 (normal); take the two of largest magnitude.
          std::array<double, 3> e{ev[0], ev[1], ev[2]};
          std::sort(e.begin(), e.end(), [](double x, double y) { return std::abs(x) < std::abs(y); });
          return e[1] * e[2];
        }
      },
      kind_);
}

SurfaceMesh project_to_manifold(const SurfaceMesh& mesh, const ReferenceManifold& manifold) {
  std::vector<Vec3> pts;
  pts.reserve(mesh.num_vertices());
  for (const auto& p : mesh.vertices()) pts.push_back(manifold.closest_point(p));
  return mesh.with_vertices(std::move(pts));
}

SurfaceMesh place_on_manifold(const SurfaceMesh& sphere_mesh, const ReferenceManifold& manifold) {
  std::vector<Vec3> pts;
  pts.reserve(sphere_mesh.num_vertices());
  for (const auto& p : sphere_mesh.vertices()) {
    pts.push_back(manifold.closest_point(manifold.place_from_unit_sphere(p)));
  }
  return sphere_mesh.with_vertices(std::move(pts));
}

LiftedPoint lift(const ReferenceManifold& manifold, const SurfaceMesh& mesh, Index tri,
                 const Vec3& bary) {
  const Vec3 x = mesh.point(tri, bary);
  const Projection pr = manifold.project(x);
  const Mat3 lhs = Mat3::Identity() + pr.distance * pr.shape;
  const Mat3 da = lhs.inverse() * tangent_projector(pr.normal);
  return {pr.point, da * mesh.chart(tri)};
}

PulledBackMetric::PulledBackMetric(std::shared_ptr<const ReferenceManifold> manifold,
                                   std::shared_ptr<const SurfaceMesh> mesh, AmbientTensor value,
                                   AmbientTensor rate)
    : manifold_(std::move(manifold)),
      mesh_(std::move(mesh)),
      value_(std::move(value)),
      rate_(std::move(rate)) {}

Sym2 PulledBackMetric::operator()(Index tri, const Vec3& bary, double t) const {
  const LiftedPoint lp = lift(*manifold_, *mesh_, tri, bary);
  Sym2 s = lp.frame.transpose() * value_(t, lp.point) * lp.frame;
  s(1, 0) = s(0, 1) = 0.5 * (s(0, 1) + s(1, 0));
  return s;
}

Sym2 PulledBackMetric::rate(Index tri, const Vec3& bary, double t) const {
  if (!rate_) throw Error("MissingRate", "pulled-back tensor has no time derivative");
  const LiftedPoint lp = lift(*manifold_, *mesh_, tri, bary);
  Sym2 s = lp.frame.transpose() * rate_(t, lp.point) * lp.frame;
  s(1, 0) = s(0, 1) = 0.5 * (s(0, 1) + s(1, 0));
  return s;
}

ChartTensorFn PulledBackMetric::at(double t) const {
  return [self = *this, t](Index tri, const Vec3& bary) { return self(tri, bary, t); };
}

ChartTensorFn PulledBackMetric::rate_at(double t) const {
  return [self = *this, t](Index tri, const Vec3& bary) { return self.rate(tri, bary, t); };
}

AmbientTensor induced_metric() {
  return [](double, const Vec3&) { return Mat3::Identity(); };
}

}  // namespace isoemb
