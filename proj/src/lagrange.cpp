#include "isoemb/lagrange.hpp"

namespace isoemb {
namespace {

// L_a(λ) = Π_{i<a} (kλ - i)/(i+1) and its derivative.
void lattice_factor(int k, int a, double lam, double& val, double& der) {
  val = 1.0;
  der = 0.0;
  for (int i = 0; i < a; ++i) {
    const double f = (k * lam - i) / (i + 1.0);
    const double df = k / (i + 1.0);
    der = der * f + val * df;
    val *= f;
  }
}

}  // namespace

LagrangeSpace::LagrangeSpace(std::shared_ptr<const SurfaceMesh> mesh, int degree)
    : mesh_(std::move(mesh)), degree_(degree) {
  if (degree < 1 || degree > 8) throw UnsupportedDegree("Lagrange degree " + std::to_string(degree));
  const int k = degree;
  for (int i = 0; i < 3; ++i) {
    std::array<int, 3> a{0, 0, 0};
    a[i] = k;
    lattice_.push_back(a);
  }
  for (int j = 0; j < 3; ++j) {
    const int from = (j + 1) % 3, to = (j + 2) % 3;
    for (int m = 1; m < k; ++m) {
      std::array<int, 3> a{0, 0, 0};
      a[from] = k - m;
      a[to] = m;
      lattice_.push_back(a);
    }
  }
  for (int a2 = 1; a2 < k; ++a2) {
    for (int a1 = 1; a1 + a2 < k; ++a1) lattice_.push_back({k - a1 - a2, a1, a2});
  }

  const SurfaceMesh& m = *mesh_;
  const Index nv = m.num_vertices(), ne = m.num_edges(), nf = m.num_triangles();
  const int per_edge = k - 1;
  const int per_face = (k - 1) * (k - 2) / 2;
  dim_ = nv + ne * per_edge + nf * per_face;
  const int nloc = local_size();
  dofs_.resize(nf * nloc);
  nodes_.resize(dim_);
  for (Index v = 0; v < nv; ++v) nodes_[v] = m.vertex(v);
  for (Index e = 0; e < ne; ++e) {
    const Vec3& a = m.vertex(m.edge(e).v[0]);
    const Vec3& b = m.vertex(m.edge(e).v[1]);
    for (int i = 0; i < per_edge; ++i) {
      const double s = double(i + 1) / k;
      nodes_[nv + e * per_edge + i] = (1.0 - s) * a + s * b;
    }
  }
  for (Index t = 0; t < nf; ++t) {
    Index* d = dofs_.data() + t * nloc;
    const Triangle& tri = m.triangle(t);
    for (int i = 0; i < 3; ++i) d[i] = tri[i];
    int pos = 3;
    for (int j = 0; j < 3; ++j) {
      const Index e = m.triangle_edge(t, j);
      const bool aligned = m.edge_aligned(t, j);
      for (int mm = 1; mm < k; ++mm) {
        const int along = aligned ? mm - 1 : k - 1 - mm;
        d[pos++] = nv + e * per_edge + along;
      }
    }
    for (int i = 0; i < per_face; ++i, ++pos) {
      const Index node = nv + ne * per_edge + t * per_face + i;
      d[pos] = node;
      const auto& a = lattice_[pos];
      nodes_[node] = m.point(t, Vec3(a[0], a[1], a[2]) / k);
    }
  }
}

void LagrangeSpace::shape(const Vec3& bary, VecX& values,
                          Eigen::Matrix<double, 2, Eigen::Dynamic>* grads) const {
  const int n = local_size();
  values.resize(n);
  if (grads) grads->resize(2, n);
  for (int a = 0; a < n; ++a) {
    double v[3], d[3];
    for (int c = 0; c < 3; ++c) lattice_factor(degree_, lattice_[a][c], bary[c], v[c], d[c]);
    values[a] = v[0] * v[1] * v[2];
    if (grads) {
      const double dl0 = d[0] * v[1] * v[2];
      const double dl1 = v[0] * d[1] * v[2];
      const double dl2 = v[0] * v[1] * d[2];
      // λ0 = 1 - ξ1 - ξ2, λ1 = ξ1, λ2 = ξ2.
      (*grads)(0, a) = dl1 - dl0;
      (*grads)(1, a) = dl2 - dl0;
    }
  }
}

const LagrangeTabulation& LagrangeSpace::tabulate(const QuadratureRule& rule) const {
  std::lock_guard lock(tab_mutex_);
  auto it = tab_cache_.find(rule.degree);
  if (it != tab_cache_.end()) return it->second;
  LagrangeTabulation tab;
  const int nq = static_cast<int>(rule.size()), n = local_size();
  tab.value.resize(nq, n);
  tab.d1.resize(nq, n);
  tab.d2.resize(nq, n);
  VecX vals;
  Eigen::Matrix<double, 2, Eigen::Dynamic> g;
  for (int q = 0; q < nq; ++q) {
    shape(rule.points[q], vals, &g);
    tab.value.row(q) = vals.transpose();
    tab.d1.row(q) = g.row(0);
    tab.d2.row(q) = g.row(1);
  }
  return tab_cache_.emplace(rule.degree, std::move(tab)).first->second;
}

FeField::FeField(std::shared_ptr<const LagrangeSpace> space, int components)
    : space_(std::move(space)), components_(components), coeffs_(VecX::Zero(space_->dim() * components)) {}

FeField::FeField(std::shared_ptr<const LagrangeSpace> space, int components, VecX coefficients)
    : space_(std::move(space)), components_(components), coeffs_(std::move(coefficients)) {
  if (coeffs_.size() != space_->dim() * components_) throw MeshMismatch("coefficient length mismatch");
}

FeField& FeField::operator+=(const FeField& o) {
  if (!same_space(o)) throw MeshMismatch("field spaces differ");
  coeffs_ += o.coeffs_;
  return *this;
}

FeField& FeField::operator-=(const FeField& o) {
  if (!same_space(o)) throw MeshMismatch("field spaces differ");
  coeffs_ -= o.coeffs_;
  return *this;
}

FeField& FeField::operator*=(double s) {
  coeffs_ *= s;
  return *this;
}

FieldSample eval_with_gradient(const FeField& field, Index tri, const Vec3& bary) {
  const LagrangeSpace& sp = field.space();
  VecX vals;
  Eigen::Matrix<double, 2, Eigen::Dynamic> g;
  sp.shape(bary, vals, &g);
  const int nc = field.components();
  FieldSample out;
  out.value = VecX::Zero(nc);
  out.gradient = Eigen::Matrix<double, Eigen::Dynamic, 2>::Zero(nc, 2);
  const auto dofs = sp.element_dofs(tri);
  for (int a = 0; a < sp.local_size(); ++a) {
    for (int c = 0; c < nc; ++c) {
      const double coef = field.coefficients()[dofs[a] * nc + c];
      out.value[c] += coef * vals[a];
      out.gradient(c, 0) += coef * g(0, a);
      out.gradient(c, 1) += coef * g(1, a);
    }
  }
  return out;
}

void eval_vector_at(const FeField& field, Index tri, const LagrangeTabulation& tab, int q,
                    Vec3& value, Mat32& grad) {
  const auto dofs = field.space().element_dofs(tri);
  const VecX& c = field.coefficients();
  value.setZero();
  grad.setZero();
  for (int a = 0; a < static_cast<int>(dofs.size()); ++a) {
    const Vec3 x = c.segment<3>(3 * dofs[a]);
    value += tab.value(q, a) * x;
    grad.col(0) += tab.d1(q, a) * x;
    grad.col(1) += tab.d2(q, a) * x;
  }
}

FeField interpolate(std::shared_ptr<const LagrangeSpace> space,
                    const std::function<double(const Vec3&)>& f) {
  FeField out(space, 1);
  const auto& nodes = space->nodes();
  for (Index i = 0; i < space->dim(); ++i) out.coefficients()[i] = f(nodes[i]);
  return out;
}

FeField interpolate(std::shared_ptr<const LagrangeSpace> space,
                    const std::function<Vec3(const Vec3&)>& f) {
  FeField out(space, 3);
  const auto& nodes = space->nodes();
  for (Index i = 0; i < space->dim(); ++i) out.coefficients().segment<3>(3 * i) = f(nodes[i]);
  return out;
}

std::array<FeField, 6> rigid_motion_basis(const FeField& r) {
  if (r.components() != 3) throw MeshMismatch("rigid motions need a 3-component field");
  const Index n = r.space().dim();
  std::array<FeField, 6> basis{FeField(r.space_ptr(), 3), FeField(r.space_ptr(), 3),
                               FeField(r.space_ptr(), 3), FeField(r.space_ptr(), 3),
                               FeField(r.space_ptr(), 3), FeField(r.space_ptr(), 3)};
  for (Index i = 0; i < n; ++i) {
    const Vec3 x = r.node_vector(i);
    for (int c = 0; c < 3; ++c) {
      basis[c].coefficients().segment<3>(3 * i) = Vec3::Unit(c).cross(x);
      basis[3 + c].coefficients().segment<3>(3 * i) = Vec3::Unit(c);
    }
  }
  return basis;
}

}  // namespace isoemb
