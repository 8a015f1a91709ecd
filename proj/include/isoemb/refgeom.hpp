#pragma once

#include "isoemb/mesh.hpp"
#include "isoemb/types.hpp"

#include <functional>
#include <memory>
#include <variant>

namespace isoemb {

/// Meridian curve (x(s), z(s)), s in [0, π], x(0) = x(π) = 0, x > 0 inside.
/// Rotating it about the z axis gives a genus-0 surface of revolution.
struct RevolutionProfile {
  struct Sample {
    double x, dx, ddx;
    double z, dz, ddz;
  };
  std::function<Sample(double s)> eval;
};

/// Result of projecting an ambient point onto the manifold.
struct Projection {
  Vec3 point;      // a(p)
  Vec3 normal;     // outward unit normal at a(p)
  double distance; // signed: negative inside
  Mat3 shape;      // Weingarten map dn at a(p), symmetric, kills the normal
};

/// Analytic closed reference surface: closest point a(p), its Jacobian Da,
/// normal and Weingarten map.
class ReferenceManifold {
 public:
  struct Sphere {
    double radius = 1.0;
  };
  struct Ellipsoid {
    Vec3 semiaxes = Vec3::Ones();
  };
  struct Revolution {
    RevolutionProfile profile;
  };

  static ReferenceManifold sphere(double radius = 1.0);
  static ReferenceManifold ellipsoid(const Vec3& semiaxes);
  static ReferenceManifold revolution(RevolutionProfile profile);

  std::string name() const;

  Projection project(const Vec3& p) const;
  Vec3 closest_point(const Vec3& p) const { return project(p).point; }
  /// Da(p) = (I + d S)^{-1} (I - n nᵀ), exact for a C² surface inside its reach.
  Mat3 jacobian(const Vec3& p) const;
  Vec3 normal(const Vec3& q) const { return project(q).normal; }

  /// Image of a unit-sphere point under the standard parametrization
  /// (radial scale / axis scale / profile rotation), used to place meshes.
  Vec3 place_from_unit_sphere(const Vec3& u) const;

  /// Gaussian curvature of the manifold itself at a point on it.
  double gaussian_curvature(const Vec3& q) const;

  const std::variant<Sphere, Ellipsoid, Revolution>& kind() const { return kind_; }

 private:
  explicit ReferenceManifold(std::variant<Sphere, Ellipsoid, Revolution> k) : kind_(std::move(k)) {}
  std::variant<Sphere, Ellipsoid, Revolution> kind_;
};

/// Replace every vertex by its closest point; connectivity unchanged.
SurfaceMesh project_to_manifold(const SurfaceMesh& mesh, const ReferenceManifold& manifold);

/// Map a unit-sphere mesh onto the manifold (parametrization, then projection).
SurfaceMesh place_on_manifold(const SurfaceMesh& sphere_mesh, const ReferenceManifold& manifold);

/// Symmetric ambient bilinear form G(t, q) acting on tangent vectors of M at q.
using AmbientTensor = std::function<Mat3(double t, const Vec3& q)>;

/// Chart-coordinate symmetric tensor on mesh triangles.
using ChartTensorFn = std::function<Sym2(Index tri, const Vec3& bary)>;

/// Lift of a point of M_h: a(x) and the pushed-forward chart frame Da·E_i.
struct LiftedPoint {
  Vec3 point;
  Mat32 frame;
};

LiftedPoint lift(const ReferenceManifold& manifold, const SurfaceMesh& mesh, Index tri,
                 const Vec3& bary);

/// a*σ in triangle charts: (Da E_i)ᵀ G(t, a(x)) (Da E_j).
class PulledBackMetric {
 public:
  PulledBackMetric(std::shared_ptr<const ReferenceManifold> manifold,
                   std::shared_ptr<const SurfaceMesh> mesh, AmbientTensor value,
                   AmbientTensor rate = {});

  Sym2 operator()(Index tri, const Vec3& bary, double t) const;
  bool has_rate() const { return static_cast<bool>(rate_); }
  /// Chart representation of a*(∂_t σ); requires has_rate().
  Sym2 rate(Index tri, const Vec3& bary, double t) const;

  ChartTensorFn at(double t) const;
  ChartTensorFn rate_at(double t) const;

  const SurfaceMesh& mesh() const { return *mesh_; }
  const ReferenceManifold& manifold() const { return *manifold_; }

 private:
  std::shared_ptr<const ReferenceManifold> manifold_;
  std::shared_ptr<const SurfaceMesh> mesh_;
  AmbientTensor value_;
  AmbientTensor rate_;
};

/// Induced Euclidean metric of M as an ambient tensor (identity on tangents).
AmbientTensor induced_metric();

}  // namespace isoemb
