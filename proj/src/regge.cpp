#include "isoemb/regge.hpp"

#include <cmath>

namespace isoemb {
namespace {

// Jacobi P_n^{(a,0)}(x) by the three-term recurrence.
double jacobi(int n, double a, double x) {
  if (n == 0) return 1.0;
  double p0 = 1.0;
  double p1 = 0.5 * (a + 2.0) * x + 0.5 * a;
  for (int k = 2; k <= n; ++k) {
    const double c = 2.0 * k + a;
    const double a1 = 2.0 * k * (k + a) * (c - 2.0);
    const double a2 = (c - 1.0) * (c * (c - 2.0) * x + a * a);
    const double a3 = 2.0 * (k + a - 1.0) * (k - 1.0) * c;
    const double p2 = (a2 * p1 - a3 * p0) / a1;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

// Reference edge j runs from local vertex j+1 to j+2.
Vec2 edge_direction(int j) {
  return reference_vertex((j + 2) % 3) - reference_vertex((j + 1) % 3);
}

Vec3 edge_bary(int j, double mu) {
  Vec3 b = Vec3::Zero();
  b[(j + 1) % 3] = 1.0 - mu;
  b[(j + 2) % 3] = mu;
  return b;
}

}  // namespace

ReferencePolynomials::ReferencePolynomials(int degree) : degree_(degree) {
  for (int d = 0; d <= degree; ++d) {
    for (int p = d; p >= 0; --p) pq_.push_back({p, d - p});
  }
  scale_.assign(pq_.size(), 1.0);
  // Dubiner norms, computed rather than tabulated.
  const QuadratureRule& rule = quadrature_rule(std::max(2 * degree, 1));
  std::vector<double> nrm(pq_.size(), 0.0);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const VecX v = eval(rule.points[q].tail<2>());
    for (std::size_t i = 0; i < pq_.size(); ++i) nrm[i] += rule.weights[q] * v[i] * v[i];
  }
  for (std::size_t i = 0; i < pq_.size(); ++i) scale_[i] = 1.0 / std::sqrt(nrm[i]);
}

VecX ReferencePolynomials::eval(const Vec2& xi) const {
  // P_p(u/w) w^p in homogeneous form, u = 2ξ1 + ξ2 - 1, w = 1 - ξ2.
  const double u = 2.0 * xi[0] + xi[1] - 1.0;
  const double w = 1.0 - xi[1];
  const double b = 2.0 * xi[1] - 1.0;
  std::vector<double> leg(degree_ + 1);
  leg[0] = 1.0;
  if (degree_ >= 1) leg[1] = u;
  for (int n = 1; n < degree_; ++n) leg[n + 1] = ((2 * n + 1) * u * leg[n] - n * w * w * leg[n - 1]) / (n + 1);
  VecX out(size());
  for (int i = 0; i < size(); ++i) {
    const auto [p, q] = pq_[i];
    out[i] = scale_[i] * leg[p] * jacobi(q, 2.0 * p + 1.0, b);
  }
  return out;
}

ReggeSpace::ReggeSpace(std::shared_ptr<const SurfaceMesh> mesh, int kg)
    : mesh_(std::move(mesh)), kg_(kg), basis_((kg < 0 || kg > 8) ? 0 : kg) {
  if (kg < 0 || kg > 8) throw UnsupportedDegree("Regge degree " + std::to_string(kg));
  dim_ = mesh_->num_edges() * edge_size() + mesh_->num_triangles() * interior_size();

  // Reference DOF matrix: row = functional, column = shape function 3*p + c.
  const int n = local_size();
  dref_ = MatX::Zero(n, n);
  const LineRule& line = gauss_legendre(kg + 1);
  for (int j = 0; j < 3; ++j) {
    const Vec2 d = edge_direction(j);
    const Vec3 tt(d[0] * d[0], d[1] * d[1], 2.0 * d[0] * d[1]);
    for (std::size_t q = 0; q < line.size(); ++q) {
      const double mu = line.points[q];
      const VecX phi = basis_.eval(edge_bary(j, mu).tail<2>());
      for (int l = 0; l <= kg; ++l) {
        const double wl = line.weights[q] * legendre(l, 2.0 * mu - 1.0);
        for (int p = 0; p < scalar_size(); ++p) {
          for (int c = 0; c < 3; ++c) dref_(j * (kg + 1) + l, 3 * p + c) += wl * phi[p] * tt[c];
        }
      }
    }
  }
  if (kg > 0) {
    const QuadratureRule& rule = quadrature_rule(2 * kg);
    const int row0 = 3 * (kg + 1);
    const int ni = kg * (kg + 1) / 2;
    // σ : S_c' against S_c: E11:E11 = 1, E22:E22 = 1, (E12+E21):(E12+E21) = 2.
    const double pair[3] = {1.0, 1.0, 2.0};
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const VecX phi = basis_.eval(rule.points[q].tail<2>());
      for (int i = 0; i < ni; ++i) {
        for (int p = 0; p < scalar_size(); ++p) {
          const double v = rule.weights[q] * phi[i] * phi[p];
          for (int c = 0; c < 3; ++c) dref_(row0 + 3 * i + c, 3 * p + c) += v * pair[c];
        }
      }
    }
  }
  dref_lu_.compute(dref_);
  const Eigen::JacobiSVD<MatX> svd(dref_);
  const auto& sv = svd.singularValues();
  if (sv[n - 1] <= 1e-13 * sv[0]) throw SingularLocalSolve("Regge reference DOF matrix is singular");
  cond_ = sv[0] / sv[n - 1];
}

Index ReggeSpace::global_dof(Index tri, int local) const {
  const int ne = 3 * edge_size();
  if (local < ne) {
    const int j = local / edge_size();
    return mesh_->triangle_edge(tri, j) * edge_size() + local % edge_size();
  }
  return mesh_->num_edges() * edge_size() + tri * interior_size() + (local - ne);
}

double ReggeSpace::dof_scale(Index tri, int local) const {
  if (local >= 3 * edge_size()) return 1.0;
  const int j = local / edge_size();
  const int l = local % edge_size();
  const Mat32 chart = mesh_->chart(tri);
  const double len = (chart * edge_direction(j)).norm();
  const double sign = (mesh_->edge_aligned(tri, j) || l % 2 == 0) ? 1.0 : -1.0;
  return sign / len;
}

const MatX& ReggeSpace::tabulate(const QuadratureRule& rule) const {
  std::lock_guard lock(tab_mutex_);
  auto it = tab_cache_.find(rule.degree);
  if (it != tab_cache_.end()) return it->second;
  MatX tab(rule.size(), scalar_size());
  for (std::size_t q = 0; q < rule.size(); ++q) tab.row(q) = basis_.eval(rule.points[q].tail<2>()).transpose();
  return tab_cache_.emplace(rule.degree, std::move(tab)).first->second;
}

VecX ReggeSpace::reference_functionals(Index tri, const ChartTensorFn& sigma, int edge_points,
                                       int interior_degree) const {
  VecX out = VecX::Zero(local_size());
  const LineRule& line = gauss_legendre(edge_points);
  for (int j = 0; j < 3; ++j) {
    const Vec2 d = edge_direction(j);
    for (std::size_t q = 0; q < line.size(); ++q) {
      const double mu = line.points[q];
      const double stt = d.dot(sigma(tri, edge_bary(j, mu)) * d);
      for (int l = 0; l <= kg_; ++l) out[j * (kg_ + 1) + l] += line.weights[q] * stt * legendre(l, 2.0 * mu - 1.0);
    }
  }
  if (kg_ > 0) {
    const QuadratureRule& rule = quadrature_rule(interior_degree);
    const int row0 = 3 * (kg_ + 1);
    const int ni = kg_ * (kg_ + 1) / 2;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Sym2 s = sigma(tri, rule.points[q]);
      const VecX phi = basis_.eval(rule.points[q].tail<2>());
      const double w = rule.weights[q];
      for (int i = 0; i < ni; ++i) {
        out[row0 + 3 * i + 0] += w * phi[i] * s(0, 0);
        out[row0 + 3 * i + 1] += w * phi[i] * s(1, 1);
        out[row0 + 3 * i + 2] += w * phi[i] * (s(0, 1) + s(1, 0));
      }
    }
  }
  return out;
}

DiscreteMetric::DiscreteMetric(std::shared_ptr<const ReggeSpace> space, VecX dofs)
    : space_(std::move(space)), dofs_(std::move(dofs)) {
  if (dofs_.size() != space_->dim()) throw MeshMismatch("Regge DOF vector length mismatch");
}

Eigen::Matrix<double, Eigen::Dynamic, 3> DiscreteMetric::element_coefficients(Index tri) const {
  const ReggeSpace& sp = *space_;
  const int n = sp.local_size();
  VecX ref(n);
  for (int i = 0; i < n; ++i) ref[i] = dofs_[sp.global_dof(tri, i)] / sp.dof_scale(tri, i);
  const VecX c = sp.dref_lu_.solve(ref);
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>>(c.data(), sp.scalar_size(), 3);
}

Sym2 DiscreteMetric::eval(Index tri, const Vec3& bary) const {
  const VecX phi = space_->basis().eval(bary.tail<2>());
  return regge_value(element_coefficients(tri), phi.transpose());
}

std::shared_ptr<const ReggeSpace> build_regge_space(std::shared_ptr<const SurfaceMesh> mesh, int kg) {
  return std::make_shared<const ReggeSpace>(std::move(mesh), kg);
}

DiscreteMetric regge_interpolate(std::shared_ptr<const ReggeSpace> space, const ChartTensorFn& sigma) {
  const ReggeSpace& sp = *space;
  const SurfaceMesh& mesh = sp.mesh();
  const int kg = sp.degree();
  const int edge_points = kg + 3;
  const int interior_degree = 2 * kg + 3;
  VecX dofs = VecX::Zero(sp.dim());
  std::vector<char> edge_done(mesh.num_edges(), 0);
  const int ne = 3 * sp.edge_size();
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const VecX ref = sp.reference_functionals(t, sigma, edge_points, interior_degree);
    for (int i = 0; i < sp.local_size(); ++i) {
      if (i < ne) {
        const Index e = mesh.triangle_edge(t, i / sp.edge_size());
        if (edge_done[e] == 2) continue;
      }
      dofs[sp.global_dof(t, i)] = sp.dof_scale(t, i) * ref[i];
    }
    for (int j = 0; j < 3; ++j) edge_done[mesh.triangle_edge(t, j)] = 2;
  }
  return DiscreteMetric(std::move(space), std::move(dofs));
}

DiscreteMetric regge_interpolate(std::shared_ptr<const ReggeSpace> space, const PulledBackMetric& sigma,
                                 double t) {
  if (&sigma.mesh() != &space->mesh()) throw MeshMismatch("pullback and Regge space use different meshes");
  return regge_interpolate(std::move(space), sigma.at(t));
}

Sym2 eval_tensor(const DiscreteMetric& metric, Index tri, const Vec3& bary) { return metric.eval(tri, bary); }

std::vector<double> tt_jump(const SurfaceMesh& mesh, const ChartTensorFn& sigma, Index edge, int count) {
  const MeshEdge& e = mesh.edge(edge);
  if (e.tri[0] < 0 || e.tri[1] < 0 || e.tri[0] == e.tri[1]) throw BoundaryEdge("edge has a single triangle");
  const LineRule& line = gauss_legendre(count);
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t q = 0; q < line.size(); ++q) {
    double tt[2];
    for (int side = 0; side < 2; ++side) {
      const Index t = e.tri[side];
      const int j = e.local[side];
      const double mu = mesh.edge_aligned(t, j) ? line.points[q] : 1.0 - line.points[q];
      const Vec2 d = edge_direction(j);
      const double len2 = (mesh.chart(t) * d).squaredNorm();
      tt[side] = d.dot(sigma(t, edge_bary(j, mu)) * d) / len2;
    }
    out.push_back(std::abs(tt[0] - tt[1]));
  }
  return out;
}

std::vector<double> tt_jump(const DiscreteMetric& metric, Index edge, int count) {
  return tt_jump(metric.space().mesh(), [&](Index t, const Vec3& b) { return metric.eval(t, b); }, edge, count);
}

}  // namespace isoemb
