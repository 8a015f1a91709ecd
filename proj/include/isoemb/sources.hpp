#pragma once

#include "isoemb/refgeom.hpp"
#include "isoemb/types.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace isoemb {

using EmbeddingFn = std::function<Vec3(double t, const Vec3& q)>;
/// Ambient Jacobian of some extension of r(t, ·) off M.
using EmbeddingJacobianFn = std::function<Mat3(double t, const Vec3& q)>;
using ScalarFieldFn = std::function<double(double t, const Vec3& q)>;

/// Evolving metric g(t) on a reference manifold M, as an ambient bilinear form
/// on T_qM, with its time derivative and, when known, the embedding realizing it.
class MetricSource {
 public:
  MetricSource(std::string name, std::shared_ptr<const ReferenceManifold> manifold, AmbientTensor metric,
               AmbientTensor rate, double t_end);

  const std::string& name() const { return name_; }
  const std::shared_ptr<const ReferenceManifold>& manifold() const { return manifold_; }
  double t_end() const { return t_end_; }
  bool positive_curvature() const { return positive_curvature_; }
  void set_positive_curvature(bool v) { positive_curvature_ = v; }

  /// Throws OutOfInterval outside [0, t_end].
  void check_time(double t) const;

  Mat3 metric(double t, const Vec3& q) const;
  /// Analytic rate when provided, else 4th-order central differences (step 1e-4).
  Mat3 rate(double t, const Vec3& q) const;
  bool has_analytic_rate() const { return static_cast<bool>(rate_); }

  bool has_embedding() const { return static_cast<bool>(embedding_); }
  void set_embedding(EmbeddingFn r, EmbeddingJacobianFn dr);
  Vec3 embedding(double t, const Vec3& q) const;
  Mat3 embedding_jacobian(double t, const Vec3& q) const;

  /// r(0, ·): the full embedding at t = 0 when known, else the registered
  /// initial embedding, else the inclusion of M.
  void set_initial_embedding(EmbeddingFn r0) { initial_ = std::move(r0); }
  Vec3 initial_embedding(const Vec3& q) const;

  /// Gaussian curvature of g(t) at q, when the source knows it.
  bool has_curvature() const { return static_cast<bool>(curvature_); }
  void set_curvature(ScalarFieldFn k) { curvature_ = std::move(k); }
  double curvature(double t, const Vec3& q) const;

  AmbientTensor metric_fn() const;
  AmbientTensor rate_fn() const;

  /// a*g(t) and a*∂_t g(t) on a mesh.
  PulledBackMetric pullback(std::shared_ptr<const SurfaceMesh> mesh) const;

 private:
  std::string name_;
  std::shared_ptr<const ReferenceManifold> manifold_;
  AmbientTensor metric_, rate_;
  EmbeddingFn embedding_;
  EmbeddingJacobianFn jacobian_;
  EmbeddingFn initial_;
  ScalarFieldFn curvature_;
  double t_end_;
  bool positive_curvature_ = true;
};

/// r(t,p) = diag(1 - t/2, 1 - t/2, 1 - 2t/3) p on the (½, ½, 1) ellipsoid, t in [0, 1].
MetricSource ellipsoid_flow();

/// Revolution metric on S² with x(s,t) = sin s ((1 - 0.32t) + 0.48t (cos²s - 1)²), z = cos s.
MetricSource revolution_flow();
/// Generating curve of revolution_flow at time t.
RevolutionProfile revolution_flow_curve(double t);

/// g(t) = e^{2tλ} g_0 with g_0 the induced metric of M.
MetricSource conformal_path(std::shared_ptr<const ReferenceManifold> manifold,
                            std::function<double(const Vec3&)> lambda, double t_end = 1.0);

/// Axisymmetric metric h ds² + m dθ² sampled on s_i = iπ/n, i = 0..n.
struct AxisymProfile {
  std::vector<double> s;
  std::vector<double> h;
  std::vector<double> m;
  double time = 0.0;

  int intervals() const { return static_cast<int>(s.size()) - 1; }
};

/// Profile of a revolution surface: h = x'² + z'², m = x².
AxisymProfile sample_profile(const RevolutionProfile& curve, int intervals);

/// Gaussian curvature at grid nodes; 4th-order differences, pole values by
/// reflection (√m odd, h even). Throws DegenerateProfile if m <= 0 inside.
std::vector<double> axisym_curvature(const AxisymProfile& profile);

/// 2π ∫ √(h m) ds by the trapezoidal rule.
double axisym_area(const AxisymProfile& profile);
/// 2π ∫ κ √(h m) ds by the trapezoidal rule.
double axisym_total_curvature(const AxisymProfile& profile, const std::vector<double>& kappa);

/// Normalized Ricci flow of an axisymmetric metric, solved for the conformal
/// factor u with g(t) = e^{2u(s,t)} g(0): ∂_t u = κ̄ − e^{−2u}(κ_0 − Δ_0 u).
class RicciTrajectory {
 public:
  const AxisymProfile& initial() const { return initial_; }
  double kappa_bar() const { return kappa_bar_; }
  double t_end() const { return times_.back(); }
  double step() const { return tau_; }
  int steps() const { return steps_; }
  const std::vector<double>& times() const { return times_; }

  /// Conformal factor and its time derivative at arbitrary (s, t).
  double u(double s, double t) const;
  double u_t(double s, double t) const;

  AxisymProfile profile(double t) const;
  std::vector<double> curvature(double t) const;
  /// Finite-volume area Σ V_i e^{2u_i} (the discretely conserved quantity).
  double discrete_area(double t) const;

 private:
  friend std::shared_ptr<const RicciTrajectory> ricci_axisym_run(const AxisymProfile&, double, double, double);
  void nodal(double t, std::vector<double>& u, std::vector<double>& ut) const;
  double interpolate_s(const std::vector<double>& v, double s) const;

  AxisymProfile initial_;
  std::vector<double> kappa0_, volume_;
  double kappa_bar_ = 0.0;
  double tau_ = 0.0;
  int steps_ = 0;
  std::vector<double> times_;
  std::vector<std::vector<double>> u_, ut_;
};

/// RK4 method of lines; tau <= 0 selects the stability-limited step.
/// Snapshots every `snapshot_dt` carry u and u_t for cubic Hermite
/// interpolation in time. Throws CurvatureNegative, StepUnstable.
std::shared_ptr<const RicciTrajectory> ricci_axisym_run(const AxisymProfile& initial, double tau, double t_end,
                                                       double snapshot_dt = 1e-3);

/// Lift to M = S²: g(t,q) = e^{2u(s(q),t)} Dr0ᵀ Dr0 with s = arccos q_z.
MetricSource ricci_source(std::shared_ptr<const RicciTrajectory> trajectory, EmbeddingFn r0,
                          EmbeddingJacobianFn dr0);

/// Example initial surface: ((0.7 sin φ + 0.1 sin 2φ) cos θ, (…) sin θ, 0.5 cos φ).
RevolutionProfile ricci_example_curve();
/// Its embedding of S²: q ↦ ((0.7 + 0.2 q_z) q_x, (0.7 + 0.2 q_z) q_y, 0.5 q_z), with Jacobian.
EmbeddingFn ricci_example_embedding();
EmbeddingJacobianFn ricci_example_jacobian();

/// CSV with columns s,h,m,kappa.
void write_profile_csv(const AxisymProfile& profile, const std::vector<double>& kappa, const std::string& path);

}  // namespace isoemb
