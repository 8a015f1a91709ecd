#include "isoemb/forms.hpp"

#include <cmath>

namespace isoemb {
namespace {

MatX local_coefficients(const FeField& f, Index tri) {
  const auto dofs = f.space().element_dofs(tri);
  const int nc = f.components();
  MatX c(dofs.size(), nc);
  for (std::size_t a = 0; a < dofs.size(); ++a) {
    for (int k = 0; k < nc; ++k) c(a, k) = f.coefficients()[dofs[a] * nc + k];
  }
  return c;
}

// Chart gradient of a 3-component field at point q from local coefficients.
Mat32 gradient_at(const LagrangeTabulation& tab, const MatX& c, int q) {
  Mat32 g;
  g.col(0) = (tab.d1.row(q) * c).transpose();
  g.col(1) = (tab.d2.row(q) * c).transpose();
  return g;
}

}  // namespace

Mat3 tensor_product_weight(const Sym2& h) {
  const double a = h(0, 0), b = h(1, 1), c = h(0, 1);
  Mat3 w;
  w << a * a, c * c, 2 * a * c,
       c * c, b * b, 2 * b * c,
       2 * a * c, 2 * b * c, 2 * (a * b + c * c);
  return w;
}

double pairwise_sum(const std::vector<double>& v) {
  const std::size_t n = v.size();
  if (n == 0) return 0.0;
  std::vector<double> buf(v);
  std::size_t len = n;
  while (len > 1) {
    const std::size_t half = (len + 1) / 2;
    for (std::size_t i = 0; i < len / 2; ++i) buf[i] = buf[2 * i] + buf[2 * i + 1];
    if (len % 2) buf[len / 2] = buf[len - 1];
    len = half;
  }
  return buf[0];
}

std::vector<Sym2> tabulate_metric(const DiscreteMetric& g, const QuadratureRule& rule) {
  const ReggeSpace& sp = g.space();
  const MatX& phi = sp.tabulate(rule);
  const Index nf = sp.mesh().num_triangles();
  std::vector<Sym2> out(nf * rule.size());
  for (Index t = 0; t < nf; ++t) {
    const auto coef = g.element_coefficients(t);
    for (std::size_t q = 0; q < rule.size(); ++q) out[t * rule.size() + q] = regge_value(coef, phi.row(q));
  }
  return out;
}

MetricContext::MetricContext(std::shared_ptr<const SurfaceMesh> mesh, const ChartTensorFn& g, int quad_degree)
    : mesh_(std::move(mesh)), rule_(&quadrature_rule(quad_degree)) {
  rebuild(g);
}

MetricContext::MetricContext(const DiscreteMetric& g, int quad_degree)
    : mesh_(g.space().mesh_ptr()), rule_(&quadrature_rule(quad_degree)) {
  rebuild(g);
}

void MetricContext::fill(Index tri, int q, const Sym2& g) {
  const std::size_t s = slot(tri, q);
  const double det = g.determinant();
  if (!(det > 0.0) || !(g(0, 0) > 0.0)) {
    throw DegenerateReference("reference metric not positive definite on triangle " + std::to_string(tri));
  }
  g_[s] = g;
  ginv_[s] = g.inverse();
  sqrtdet_[s] = std::sqrt(det);
  w_[s] = tensor_product_weight(ginv_[s]);
}

void MetricContext::rebuild(const ChartTensorFn& g) {
  const std::size_t n = mesh_->num_triangles() * rule_->size();
  g_.resize(n);
  ginv_.resize(n);
  sqrtdet_.resize(n);
  w_.resize(n);
  for (Index t = 0; t < mesh_->num_triangles(); ++t) {
    for (int q = 0; q < points_per_element(); ++q) {
      const Sym2 s = g(t, rule_->points[q]);
      fill(t, q, 0.5 * (s + s.transpose()));
    }
  }
  ++version_;
}

void MetricContext::rebuild(const DiscreteMetric& g) {
  if (&g.space().mesh() != mesh_.get()) throw MeshMismatch("metric lives on another mesh");
  const std::vector<Sym2> vals = tabulate_metric(g, *rule_);
  const std::size_t n = vals.size();
  g_.resize(n);
  ginv_.resize(n);
  sqrtdet_.resize(n);
  w_.resize(n);
  for (Index t = 0; t < mesh_->num_triangles(); ++t) {
    for (int q = 0; q < points_per_element(); ++q) fill(t, q, vals[slot(t, q)]);
  }
  ++version_;
}

void MetricContext::require_mesh(const SurfaceMesh& m) const {
  if (&m != mesh_.get()) throw MeshMismatch("field and metric context use different meshes");
}

double inner_vector(const FeField& u, const FeField& v, const MetricContext& ctx) {
  ctx.require_mesh(u.space().mesh());
  ctx.require_mesh(v.space().mesh());
  if (u.components() != v.components()) throw MeshMismatch("component counts differ");
  const LagrangeTabulation& tu = u.space().tabulate(ctx.rule());
  const LagrangeTabulation& tv = v.space().tabulate(ctx.rule());
  std::vector<double> parts(ctx.mesh().num_triangles());
  for (Index t = 0; t < ctx.mesh().num_triangles(); ++t) {
    const MatX vu = tu.value * local_coefficients(u, t);
    const MatX vv = tv.value * local_coefficients(v, t);
    double s = 0.0;
    for (int q = 0; q < ctx.points_per_element(); ++q) s += ctx.volume(t, q) * vu.row(q).dot(vv.row(q));
    parts[t] = s;
  }
  return pairwise_sum(parts);
}

double l2_norm(const FeField& u, const MetricContext& ctx) { return std::sqrt(std::max(0.0, inner_vector(u, u, ctx))); }

double inner_tensor(const PointTensorFn& sigma, const PointTensorFn& omega, const MetricContext& ctx) {
  std::vector<double> parts(ctx.mesh().num_triangles());
  for (Index t = 0; t < ctx.mesh().num_triangles(); ++t) {
    double s = 0.0;
    for (int q = 0; q < ctx.points_per_element(); ++q) {
      s += ctx.volume(t, q) * sym_vec(sigma(t, q)).dot(ctx.product_weight(t, q) * sym_vec(omega(t, q)));
    }
    parts[t] = s;
  }
  return pairwise_sum(parts);
}

double inner_tensor(const ChartTensorFn& sigma, const ChartTensorFn& omega, const MetricContext& ctx) {
  const auto& pts = ctx.rule().points;
  return inner_tensor(PointTensorFn([&](Index t, int q) { return sigma(t, pts[q]); }),
                      PointTensorFn([&](Index t, int q) { return omega(t, pts[q]); }), ctx);
}

namespace {

// Σ_K Σ_q vol |X_q|²_g for a tensor X built per point from 3-component fields.
template <class PointFn>
double tensor_square_norm(const MetricContext& ctx, PointFn&& fn) {
  std::vector<double> parts(ctx.mesh().num_triangles());
  for (Index t = 0; t < ctx.mesh().num_triangles(); ++t) {
    double s = 0.0;
    fn.begin(t);
    for (int q = 0; q < ctx.points_per_element(); ++q) {
      const Vec3 x = sym_vec(fn(t, q));
      s += ctx.volume(t, q) * x.dot(ctx.product_weight(t, q) * x);
    }
    parts[t] = s;
  }
  return std::max(0.0, pairwise_sum(parts));
}

struct DTerm {
  const FeField& r;
  const FeField& v;
  const LagrangeTabulation& tr;
  const LagrangeTabulation& tv;
  MatX cr, cv;
  void begin(Index t) {
    cr = local_coefficients(r, t);
    cv = local_coefficients(v, t);
  }
  Sym2 operator()(Index, int q) const { return d_odot(gradient_at(tr, cr, q), gradient_at(tv, cv, q)); }
};

struct IsoTerm {
  const FeField& r;
  const LagrangeTabulation& tr;
  std::function<Sym2(Index, int)> target;
  MatX cr;
  void begin(Index t) { cr = local_coefficients(r, t); }
  Sym2 operator()(Index t, int q) const { return pullback(gradient_at(tr, cr, q)) - target(t, q); }
};

void require_vector(const FeField& f) {
  if (f.components() != 3) throw MeshMismatch("expected a 3-component field");
}

}  // namespace

double d_norm(const FeField& r, const FeField& v, const MetricContext& ctx) {
  ctx.require_mesh(r.space().mesh());
  ctx.require_mesh(v.space().mesh());
  require_vector(r);
  require_vector(v);
  DTerm term{r, v, r.space().tabulate(ctx.rule()), v.space().tabulate(ctx.rule()), {}, {}};
  return std::sqrt(tensor_square_norm(ctx, term));
}

double graph_norm(const FeField& e, const FeField& r_star, const MetricContext& ctx) {
  if (e.space_ptr() != r_star.space_ptr()) throw MeshMismatch("graph norm needs fields on one space");
  const double l2 = l2_norm(e, ctx);
  const double d = d_norm(r_star, e, ctx);
  return std::sqrt(l2 * l2 + d * d);
}

double isometry_residual(const FeField& r, const DiscreteMetric& g_target, const MetricContext& ctx) {
  ctx.require_mesh(g_target.space().mesh());
  const std::vector<Sym2> vals = tabulate_metric(g_target, ctx.rule());
  const std::size_t nq = ctx.rule().size();
  ctx.require_mesh(r.space().mesh());
  require_vector(r);
  IsoTerm term{r, r.space().tabulate(ctx.rule()), [&](Index t, int q) { return vals[t * nq + q]; }, {}};
  return std::sqrt(tensor_square_norm(ctx, term));
}

double isometry_residual(const FeField& r, const ChartTensorFn& g_target, const MetricContext& ctx) {
  ctx.require_mesh(r.space().mesh());
  require_vector(r);
  const auto& pts = ctx.rule().points;
  IsoTerm term{r, r.space().tabulate(ctx.rule()),
               [&](Index t, int q) { return g_target(t, pts[q]); }, {}};
  return std::sqrt(tensor_square_norm(ctx, term));
}

double tensor_l2_distance(const DiscreteMetric& sigma, const ChartTensorFn& omega, const MetricContext& ctx) {
  ctx.require_mesh(sigma.space().mesh());
  const std::vector<Sym2> vals = tabulate_metric(sigma, ctx.rule());
  const std::size_t nq = ctx.rule().size();
  const auto& pts = ctx.rule().points;
  const PointTensorFn diff = [&](Index t, int q) -> Sym2 { return vals[t * nq + q] - omega(t, pts[q]); };
  return std::sqrt(std::max(0.0, inner_tensor(diff, diff, ctx)));
}

}  // namespace isoemb
