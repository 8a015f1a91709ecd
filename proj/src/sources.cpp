#include "isoemb/sources.hpp"

#include "isoemb/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>

namespace isoemb {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTimeSlack = 1e-12;
constexpr double kFdStep = 1e-4;
}  // namespace

MetricSource::MetricSource(std::string name, std::shared_ptr<const ReferenceManifold> manifold,
                           AmbientTensor metric, AmbientTensor rate, double t_end)
    : name_(std::move(name)),
      manifold_(std::move(manifold)),
      metric_(std::move(metric)),
      rate_(std::move(rate)),
      t_end_(t_end) {}

void MetricSource::check_time(double t) const {
  if (!(t >= -kTimeSlack && t <= t_end_ + kTimeSlack)) {
    throw OutOfInterval(name_ + ": time " + std::to_string(t) + " outside [0, " + std::to_string(t_end_) + "]");
  }
}

Mat3 MetricSource::metric(double t, const Vec3& q) const {
  check_time(t);
  return metric_(std::clamp(t, 0.0, t_end_), q);
}

Mat3 MetricSource::rate(double t, const Vec3& q) const {
  check_time(t);
  t = std::clamp(t, 0.0, t_end_);
  if (rate_) return rate_(t, q);
  const double d = kFdStep;
  auto g = [&](double s) { return metric_(s, q); };
  if (t - 2 * d >= 0.0 && t + 2 * d <= t_end_) {
    return (-g(t + 2 * d) + 8.0 * g(t + d) - 8.0 * g(t - d) + g(t - 2 * d)) / (12.0 * d);
  }
  const double sgn = t - 2 * d < 0.0 ? 1.0 : -1.0;
  const double e = sgn * d;
  return (-25.0 * g(t) + 48.0 * g(t + e) - 36.0 * g(t + 2 * e) + 16.0 * g(t + 3 * e) - 3.0 * g(t + 4 * e)) /
         (12.0 * e);
}

void MetricSource::set_embedding(EmbeddingFn r, EmbeddingJacobianFn dr) {
  embedding_ = std::move(r);
  jacobian_ = std::move(dr);
}

Vec3 MetricSource::embedding(double t, const Vec3& q) const {
  if (!embedding_) throw Error("MissingEmbedding", name_ + " has no exact embedding");
  check_time(t);
  return embedding_(std::clamp(t, 0.0, t_end_), q);
}

Mat3 MetricSource::embedding_jacobian(double t, const Vec3& q) const {
  if (!jacobian_) throw Error("MissingEmbedding", name_ + " has no embedding Jacobian");
  check_time(t);
  return jacobian_(std::clamp(t, 0.0, t_end_), q);
}

Vec3 MetricSource::initial_embedding(const Vec3& q) const {
  if (embedding_) return embedding_(0.0, q);
  if (initial_) return initial_(0.0, q);
  return q;
}

double MetricSource::curvature(double t, const Vec3& q) const {
  check_time(t);
  if (!curvature_) throw ConfigError("source '" + name_ + "' has no curvature");
  return curvature_(t, q);
}

AmbientTensor MetricSource::metric_fn() const {
  return [self = *this](double t, const Vec3& q) { return self.metric(t, q); };
}

AmbientTensor MetricSource::rate_fn() const {
  return [self = *this](double t, const Vec3& q) { return self.rate(t, q); };
}

PulledBackMetric MetricSource::pullback(std::shared_ptr<const SurfaceMesh> mesh) const {
  return PulledBackMetric(manifold_, std::move(mesh), metric_fn(), rate_fn());
}

MetricSource ellipsoid_flow() {
  auto manifold = std::make_shared<const ReferenceManifold>(ReferenceManifold::ellipsoid(Vec3(0.5, 0.5, 1.0)));
  auto scale = [](double t) { return Vec3(1.0 - t / 2.0, 1.0 - t / 2.0, 1.0 - 2.0 * t / 3.0); };
  const Vec3 dscale(-0.5, -0.5, -2.0 / 3.0);
  AmbientTensor g = [scale](double t, const Vec3&) -> Mat3 { return scale(t).cwiseAbs2().asDiagonal(); };
  AmbientTensor gd = [scale, dscale](double t, const Vec3&) -> Mat3 {
    return (2.0 * scale(t).cwiseProduct(dscale)).asDiagonal();
  };
  MetricSource src("ellipsoid", manifold, g, gd, 1.0);
  src.set_embedding([scale](double t, const Vec3& p) -> Vec3 { return scale(t).cwiseProduct(p); },
                    [scale](double t, const Vec3&) -> Mat3 { return scale(t).asDiagonal(); });
  src.set_curvature([scale](double t, const Vec3& p) {
    const Vec3 axes = scale(t).cwiseProduct(Vec3(0.5, 0.5, 1.0));
    const Vec3 x = scale(t).cwiseProduct(p);
    const Vec3 a2 = axes.cwiseAbs2();
    const double s = x.cwiseAbs2().cwiseQuotient(a2.cwiseAbs2()).sum();
    return 1.0 / (a2.prod() * s * s);
  });
  return src;
}

namespace {

// r(t,q) = (X q_x, X q_y, q_z), X = A + B ρ⁴, ρ² = q_x² + q_y²;
// A = 1 - 0.32t, B = 0.48t.
Mat3 revolution_jacobian(double a, double b, const Vec3& q) {
  const double rho2 = q[0] * q[0] + q[1] * q[1];
  const double x = a + b * rho2 * rho2;
  const Vec3 gx(4.0 * b * rho2 * q[0], 4.0 * b * rho2 * q[1], 0.0);
  Mat3 j = Mat3::Zero();
  j.row(0) = x * Vec3::UnitX().transpose() + q[0] * gx.transpose();
  j.row(1) = x * Vec3::UnitY().transpose() + q[1] * gx.transpose();
  j(2, 2) = 1.0;
  return j;
}

Mat3 revolution_jacobian_rate(const Vec3& q) {
  // ∂_t of the Jacobian: ∂_t A = -0.32, ∂_t B = 0.48, no z row.
  const double rho2 = q[0] * q[0] + q[1] * q[1];
  const double x = -0.32 + 0.48 * rho2 * rho2;
  const Vec3 gx(4.0 * 0.48 * rho2 * q[0], 4.0 * 0.48 * rho2 * q[1], 0.0);
  Mat3 j = Mat3::Zero();
  j.row(0) = x * Vec3::UnitX().transpose() + q[0] * gx.transpose();
  j.row(1) = x * Vec3::UnitY().transpose() + q[1] * gx.transpose();
  return j;
}

}  // namespace

RevolutionProfile revolution_flow_curve(double t) {
  const double a = 1.0 - 0.32 * t, b = 0.48 * t;
  return {[a, b](double s) {
    const double sn = std::sin(s), c = std::cos(s);
    const double s4 = sn * sn * sn * sn;
    RevolutionProfile::Sample v;
    v.x = sn * (a + b * s4);
    v.dx = c * (a + 5.0 * b * s4);
    v.ddx = -sn * (a + 5.0 * b * s4) + 20.0 * b * sn * sn * sn * c * c;
    v.z = c;
    v.dz = -sn;
    v.ddz = -c;
    return v;
  }};
}

MetricSource revolution_flow() {
  auto manifold = std::make_shared<const ReferenceManifold>(ReferenceManifold::sphere(1.0));
  auto coef = [](double t) { return std::pair{1.0 - 0.32 * t, 0.48 * t}; };
  AmbientTensor g = [coef](double t, const Vec3& q) -> Mat3 {
    const auto [a, b] = coef(t);
    const Mat3 j = revolution_jacobian(a, b, q);
    return j.transpose() * j;
  };
  AmbientTensor gd = [coef](double t, const Vec3& q) -> Mat3 {
    const auto [a, b] = coef(t);
    const Mat3 j = revolution_jacobian(a, b, q);
    const Mat3 jd = revolution_jacobian_rate(q);
    return jd.transpose() * j + j.transpose() * jd;
  };
  MetricSource src("revolution", manifold, g, gd, 1.0);
  src.set_embedding(
      [coef](double t, const Vec3& q) -> Vec3 {
        const auto [a, b] = coef(t);
        const double rho2 = q[0] * q[0] + q[1] * q[1];
        const double x = a + b * rho2 * rho2;
        return Vec3(x * q[0], x * q[1], q[2]);
      },
      [coef](double t, const Vec3& q) -> Mat3 {
        const auto [a, b] = coef(t);
        return revolution_jacobian(a, b, q);
      });
  src.set_curvature([](double t, const Vec3& q) {
    const double s = std::clamp(std::acos(std::clamp(q[2] / q.norm(), -1.0, 1.0)), 1e-6, std::numbers::pi - 1e-6);
    const auto c = revolution_flow_curve(t).eval(s);
    const double speed2 = c.dx * c.dx + c.dz * c.dz;
    return c.dz * (c.dx * c.ddz - c.ddx * c.dz) / (c.x * speed2 * speed2);
  });
  return src;
}

MetricSource conformal_path(std::shared_ptr<const ReferenceManifold> manifold,
                            std::function<double(const Vec3&)> lambda, double t_end) {
  AmbientTensor g = [lambda](double t, const Vec3& q) -> Mat3 {
    return std::exp(2.0 * t * lambda(q)) * Mat3::Identity();
  };
  AmbientTensor gd = [lambda](double t, const Vec3& q) -> Mat3 {
    const double l = lambda(q);
    return 2.0 * l * std::exp(2.0 * t * l) * Mat3::Identity();
  };
  return MetricSource("conformal", std::move(manifold), g, gd, t_end);
}

// ---------------------------------------------------------------- axisymmetric

AxisymProfile sample_profile(const RevolutionProfile& curve, int intervals) {
  if (intervals < 8) throw DegenerateProfile("profile needs at least 8 intervals");
  AxisymProfile p;
  for (int i = 0; i <= intervals; ++i) {
    const double s = kPi * i / intervals;
    const auto v = curve.eval(s);
    p.s.push_back(s);
    p.h.push_back(v.dx * v.dx + v.dz * v.dz);
    p.m.push_back(i == 0 || i == intervals ? 0.0 : v.x * v.x);
  }
  return p;
}

namespace {

// Value at index i in [-n, 2n] with reflection at both poles; parity +1 even, -1 odd.
double reflected(const std::vector<double>& v, int i, double parity) {
  const int n = static_cast<int>(v.size()) - 1;
  if (i < 0) return parity * v[-i];
  if (i > n) return parity * v[2 * n - i];
  return v[i];
}

double d1(const std::vector<double>& v, int i, double parity, double ds) {
  return (reflected(v, i - 2, parity) - 8.0 * reflected(v, i - 1, parity) + 8.0 * reflected(v, i + 1, parity) -
          reflected(v, i + 2, parity)) /
         (12.0 * ds);
}

// Even extrapolation to a pole from three interior values at distances 1, 2, 3 grid steps.
double pole_limit(double k1, double k2, double k3) {
  // Quadratic in σ = s² through σ = 1, 4, 9, evaluated at 0.
  return (k1 * (4.0 * 9.0) / ((4.0 - 1.0) * (9.0 - 1.0)) - k2 * (1.0 * 9.0) / ((4.0 - 1.0) * (9.0 - 4.0)) +
          k3 * (1.0 * 4.0) / ((9.0 - 1.0) * (9.0 - 4.0)));
}

void check_profile(const AxisymProfile& p) {
  const int n = p.intervals();
  if (n < 8 || p.h.size() != p.s.size() || p.m.size() != p.s.size()) {
    throw DegenerateProfile("profile arrays are inconsistent");
  }
  for (int i = 1; i < n; ++i) {
    if (!(p.m[i] > 0.0)) throw DegenerateProfile("m <= 0 at interior node " + std::to_string(i));
    if (!(p.h[i] > 0.0)) throw DegenerateProfile("h <= 0 at node " + std::to_string(i));
  }
}

}  // namespace

std::vector<double> axisym_curvature(const AxisymProfile& p) {
  check_profile(p);
  const int n = p.intervals();
  const double ds = kPi / n;
  std::vector<double> f(n + 1), sh(n + 1), a(n + 1), k(n + 1);
  for (int i = 0; i <= n; ++i) {
    f[i] = std::sqrt(std::max(0.0, p.m[i]));
    sh[i] = std::sqrt(p.h[i]);
  }
  // κ = -(f'/√h)' / (√h f); f odd and h even about each pole, so f'/√h is even.
  for (int i = 0; i <= n; ++i) a[i] = d1(f, i, -1.0, ds) / sh[i];
  for (int i = 1; i < n; ++i) k[i] = -d1(a, i, 1.0, ds) / (sh[i] * f[i]);
  k[0] = pole_limit(k[1], k[2], k[3]);
  k[n] = pole_limit(k[n - 1], k[n - 2], k[n - 3]);
  return k;
}

double axisym_area(const AxisymProfile& p) {
  const int n = p.intervals();
  double s = 0.0;
  for (int i = 1; i < n; ++i) s += std::sqrt(p.h[i] * p.m[i]);
  return 2.0 * kPi * s * (kPi / n);
}

double axisym_total_curvature(const AxisymProfile& p, const std::vector<double>& kappa) {
  const int n = p.intervals();
  double s = 0.0;
  for (int i = 1; i < n; ++i) s += kappa[i] * std::sqrt(p.h[i] * p.m[i]);
  return 2.0 * kPi * s * (kPi / n);
}

// ---------------------------------------------------------------- Ricci flow

double RicciTrajectory::interpolate_s(const std::vector<double>& v, double s) const {
  const int n = initial_.intervals();
  const double ds = kPi / n;
  const double x = std::clamp(s, 0.0, kPi) / ds;
  int i0 = static_cast<int>(std::floor(x)) - 2;
  i0 = std::clamp(i0, -2, n - 3);
  double out = 0.0;
  for (int a = 0; a < 6; ++a) {
    double w = 1.0;
    for (int b = 0; b < 6; ++b) {
      if (b != a) w *= (x - (i0 + b)) / double(a - b);
    }
    out += w * reflected(v, i0 + a, 1.0);
  }
  return out;
}

void RicciTrajectory::nodal(double t, std::vector<double>& u, std::vector<double>& ut) const {
  if (!(t >= -kTimeSlack && t <= times_.back() + kTimeSlack)) {
    throw OutOfInterval("Ricci trajectory queried at t = " + std::to_string(t));
  }
  t = std::clamp(t, 0.0, times_.back());
  std::size_t k = std::upper_bound(times_.begin(), times_.end(), t) - times_.begin();
  k = std::clamp<std::size_t>(k, 1, times_.size() - 1) - 1;
  const double t0 = times_[k], dt = times_[k + 1] - t0;
  const double th = (t - t0) / dt;
  const double h00 = 2 * th * th * th - 3 * th * th + 1, h10 = th * th * th - 2 * th * th + th;
  const double h01 = -2 * th * th * th + 3 * th * th, h11 = th * th * th - th * th;
  const double d00 = 6 * th * th - 6 * th, d10 = 3 * th * th - 4 * th + 1;
  const double d01 = -6 * th * th + 6 * th, d11 = 3 * th * th - 2 * th;
  const auto& ua = u_[k];
  const auto& ub = u_[k + 1];
  const auto& va = ut_[k];
  const auto& vb = ut_[k + 1];
  u.resize(ua.size());
  ut.resize(ua.size());
  for (std::size_t i = 0; i < ua.size(); ++i) {
    u[i] = h00 * ua[i] + h10 * dt * va[i] + h01 * ub[i] + h11 * dt * vb[i];
    ut[i] = (d00 * ua[i] + d01 * ub[i]) / dt + d10 * va[i] + d11 * vb[i];
  }
}

double RicciTrajectory::u(double s, double t) const {
  std::vector<double> a, b;
  nodal(t, a, b);
  return interpolate_s(a, s);
}

double RicciTrajectory::u_t(double s, double t) const {
  std::vector<double> a, b;
  nodal(t, a, b);
  return interpolate_s(b, s);
}

AxisymProfile RicciTrajectory::profile(double t) const {
  std::vector<double> u, ut;
  nodal(t, u, ut);
  AxisymProfile p = initial_;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double e = std::exp(2.0 * u[i]);
    p.h[i] *= e;
    p.m[i] *= e;
  }
  p.time = t;
  return p;
}

std::vector<double> RicciTrajectory::curvature(double t) const {
  // κ = κ̄ - u_t holds exactly on the grid.
  std::vector<double> u, ut;
  nodal(t, u, ut);
  std::vector<double> k(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) k[i] = kappa_bar_ - ut[i];
  return k;
}

double RicciTrajectory::discrete_area(double t) const {
  std::vector<double> u, ut;
  nodal(t, u, ut);
  double a = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) a += volume_[i] * std::exp(2.0 * u[i]);
  return 2.0 * kPi * a;
}

std::shared_ptr<const RicciTrajectory> ricci_axisym_run(const AxisymProfile& initial, double tau, double t_end,
                                                       double snapshot_dt) {
  check_profile(initial);
  if (!(t_end > 0.0)) throw InvalidStep("Ricci run needs t_end > 0");
  if (!(snapshot_dt > 0.0)) throw InvalidStep("snapshot spacing must be positive");
  auto traj = std::make_shared<RicciTrajectory>();
  RicciTrajectory& tr = *traj;
  tr.initial_ = initial;
  tr.initial_.time = 0.0;
  const int n = initial.intervals();
  const double ds = kPi / n;
  tr.kappa0_ = axisym_curvature(initial);
  for (double k : tr.kappa0_) {
    if (!(k > 0.0)) throw CurvatureNegative("initial Gaussian curvature is not positive");
  }

  std::vector<double> f(n + 1), sh(n + 1);
  for (int i = 0; i <= n; ++i) {
    f[i] = std::sqrt(std::max(0.0, initial.m[i]));
    sh[i] = std::sqrt(initial.h[i]);
  }
  // Finite volumes: cell i covers [s_i - ds/2, s_i + ds/2] ∩ [0, π]; the
  // volume density √h f and flux coefficient f/√h come from 6-point
  // interpolation (f odd, h even about the poles).
  auto interp = [&](const std::vector<double>& v, double parity, double s) {
    const double x = s / ds;
    int i0 = static_cast<int>(std::floor(x)) - 2;
    i0 = std::clamp(i0, -2, n - 3);
    double out = 0.0;
    for (int a = 0; a < 6; ++a) {
      double w = 1.0;
      for (int b = 0; b < 6; ++b) {
        if (b != a) w *= (x - (i0 + b)) / double(a - b);
      }
      out += w * reflected(v, i0 + a, parity);
    }
    return out;
  };
  const LineRule& gl = gauss_legendre(4);
  tr.volume_.assign(n + 1, 0.0);
  std::vector<double> flux(n, 0.0);  // between i and i+1
  for (int i = 0; i <= n; ++i) {
    const double lo = std::max(0.0, (i - 0.5) * ds), hi = std::min(kPi, (i + 0.5) * ds);
    double v = 0.0;
    for (std::size_t g = 0; g < gl.size(); ++g) {
      const double s = lo + (hi - lo) * gl.points[g];
      v += (hi - lo) * gl.weights[g] * interp(sh, 1.0, s) * interp(f, -1.0, s);
    }
    tr.volume_[i] = v;
  }
  for (int i = 0; i < n; ++i) {
    const double s = (i + 0.5) * ds;
    flux[i] = interp(f, -1.0, s) / interp(sh, 1.0, s) / ds;
  }
  double vk = 0.0, vs = 0.0;
  for (int i = 0; i <= n; ++i) {
    vk += tr.volume_[i] * tr.kappa0_[i];
    vs += tr.volume_[i];
  }
  tr.kappa_bar_ = vk / vs;
  const double kbar = tr.kappa_bar_;

  auto rhs = [&](const std::vector<double>& u, std::vector<double>& out) {
    out.resize(n + 1);
    for (int i = 0; i <= n; ++i) {
      double lap = 0.0;
      if (i < n) lap += flux[i] * (u[i + 1] - u[i]);
      if (i > 0) lap -= flux[i - 1] * (u[i] - u[i - 1]);
      lap /= tr.volume_[i];
      out[i] = kbar - std::exp(-2.0 * u[i]) * (tr.kappa0_[i] - lap);
    }
  };
  auto spectral_bound = [&](const std::vector<double>& u) {
    double rho = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double c = (i < n ? flux[i] : 0.0) + (i > 0 ? flux[i - 1] : 0.0);
      const double e = std::exp(-2.0 * u[i]);
      rho = std::max(rho, 2.0 * e * c / tr.volume_[i] + 2.0 * e * std::abs(tr.kappa0_[i]) + 2.0 * kbar);
    }
    return rho;
  };

  std::vector<double> u(n + 1, 0.0), k1, k2, k3, k4, tmp(n + 1), ut;
  rhs(u, ut);
  tr.times_.push_back(0.0);
  tr.u_.push_back(u);
  tr.ut_.push_back(ut);
  const int nsnap = static_cast<int>(std::ceil(t_end / snapshot_dt - 1e-9));
  double t = 0.0;
  for (int k = 1; k <= nsnap; ++k) {
    const double t_next = std::min(t_end, k * snapshot_dt);
    const double span = t_next - t;
    double step = tau > 0.0 ? tau : std::min(0.5 * ds * ds, 0.9 * 2.78 / spectral_bound(u));
    const int sub = std::max(1, static_cast<int>(std::ceil(span / step - 1e-9)));
    step = span / sub;
    for (int j = 0; j < sub; ++j) {
      rhs(u, k1);
      for (int i = 0; i <= n; ++i) tmp[i] = u[i] + 0.5 * step * k1[i];
      rhs(tmp, k2);
      for (int i = 0; i <= n; ++i) tmp[i] = u[i] + 0.5 * step * k2[i];
      rhs(tmp, k3);
      for (int i = 0; i <= n; ++i) tmp[i] = u[i] + step * k3[i];
      rhs(tmp, k4);
      for (int i = 0; i <= n; ++i) u[i] += step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      ++tr.steps_;
    }
    for (double v : u) {
      if (!std::isfinite(v) || std::abs(v) > 50.0) {
        throw StepUnstable("Ricci RK4 diverged near t = " + std::to_string(t_next));
      }
    }
    tr.tau_ = std::max(tr.tau_, step);
    t = t_next;
    rhs(u, ut);
    tr.times_.push_back(t);
    tr.u_.push_back(u);
    tr.ut_.push_back(ut);
  }
  return traj;
}

MetricSource ricci_source(std::shared_ptr<const RicciTrajectory> trajectory, EmbeddingFn r0,
                          EmbeddingJacobianFn dr0) {
  auto manifold = std::make_shared<const ReferenceManifold>(ReferenceManifold::sphere(1.0));
  auto polar = [](const Vec3& q) { return std::acos(std::clamp(q[2] / q.norm(), -1.0, 1.0)); };
  AmbientTensor g = [trajectory, dr0, polar](double t, const Vec3& q) -> Mat3 {
    const Mat3 j = dr0(0.0, q);
    return std::exp(2.0 * trajectory->u(polar(q), t)) * (j.transpose() * j);
  };
  AmbientTensor gd = [trajectory, dr0, polar](double t, const Vec3& q) -> Mat3 {
    const Mat3 j = dr0(0.0, q);
    const double s = polar(q);
    return 2.0 * trajectory->u_t(s, t) * std::exp(2.0 * trajectory->u(s, t)) * (j.transpose() * j);
  };
  MetricSource src("ricci", manifold, g, gd, trajectory->t_end());
  src.set_initial_embedding(std::move(r0));
  src.set_curvature([trajectory, polar](double t, const Vec3& q) {
    return trajectory->kappa_bar() - trajectory->u_t(polar(q), t);
  });
  return src;
}

RevolutionProfile ricci_example_curve() {
  return {[](double s) {
    const double sn = std::sin(s), c = std::cos(s);
    const double s2 = std::sin(2 * s), c2 = std::cos(2 * s);
    RevolutionProfile::Sample v;
    v.x = 0.7 * sn + 0.1 * s2;
    v.dx = 0.7 * c + 0.2 * c2;
    v.ddx = -0.7 * sn - 0.4 * s2;
    v.z = 0.5 * c;
    v.dz = -0.5 * sn;
    v.ddz = -0.5 * c;
    return v;
  }};
}

EmbeddingFn ricci_example_embedding() {
  return [](double, const Vec3& q) -> Vec3 {
    const double w = 0.7 + 0.2 * q[2];
    return Vec3(w * q[0], w * q[1], 0.5 * q[2]);
  };
}

EmbeddingJacobianFn ricci_example_jacobian() {
  return [](double, const Vec3& q) -> Mat3 {
    const double w = 0.7 + 0.2 * q[2];
    Mat3 j;
    j << w, 0.0, 0.2 * q[0],
         0.0, w, 0.2 * q[1],
         0.0, 0.0, 0.5;
    return j;
  };
}

void write_profile_csv(const AxisymProfile& p, const std::vector<double>& kappa, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path);
  out << "s,h,m,kappa\n" << std::setprecision(17);
  for (std::size_t i = 0; i < p.s.size(); ++i) {
    out << p.s[i] << ',' << p.h[i] << ',' << p.m[i] << ',' << kappa[i] << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace isoemb
