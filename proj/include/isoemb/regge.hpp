#pragma once

#include "isoemb/mesh.hpp"
#include "isoemb/quadrature.hpp"
#include "isoemb/refgeom.hpp"
#include "isoemb/types.hpp"

#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace isoemb {

/// Orthogonal (Dubiner) scalar polynomials on the reference triangle, ordered by
/// total degree so that the first n(d) = (d+1)(d+2)/2 members span P_d.
/// Normalized to unit L² norm on the reference triangle.
class ReferencePolynomials {
 public:
  explicit ReferencePolynomials(int degree);
  int degree() const { return degree_; }
  int size() const { return static_cast<int>(pq_.size()); }
  VecX eval(const Vec2& xi) const;

 private:
  int degree_;
  std::vector<std::array<int, 2>> pq_;
  std::vector<double> scale_;
};

/// Regge space of symmetric (0,2)-tensors, piecewise P_kg, tt-continuous.
///
/// Local DOFs: edge moments of local edges 0, 1, 2 (kg+1 each), then
/// 3 kg(kg+1)/2 interior moments. Global edge DOF l of edge e is
/// ∫_e σ(t,t) P_l(2μ-1) ds with t the unit tangent and μ the arclength fraction,
/// both in the global edge direction. The local shape basis is the orthogonal
/// scalar basis times {E11, E22, E12+E21}, index 3*p + c.
class ReggeSpace {
 public:
  ReggeSpace(std::shared_ptr<const SurfaceMesh> mesh, int kg);

  int degree() const { return kg_; }
  Index dim() const { return dim_; }
  int local_size() const { return 3 * scalar_size(); }
  int scalar_size() const { return basis_.size(); }
  int interior_size() const { return 3 * kg_ * (kg_ + 1) / 2; }
  int edge_size() const { return kg_ + 1; }

  const SurfaceMesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const SurfaceMesh>& mesh_ptr() const { return mesh_; }
  const ReferencePolynomials& basis() const { return basis_; }

  /// Global index of a local DOF.
  Index global_dof(Index tri, int local) const;
  /// Factor s with (global DOF) = s * (reference functional) for that local DOF.
  double dof_scale(Index tri, int local) const;

  /// Reference DOF functionals applied to the reference shape basis.
  const MatX& reference_dof_matrix() const { return dref_; }
  double reference_condition() const { return cond_; }

  /// Values of the scalar basis on a rule, nq x scalar_size().
  const MatX& tabulate(const QuadratureRule& rule) const;

  /// Reference functionals of a chart tensor field on one element, in local
  /// DOF order; `edge_points` Gauss points per edge, interior rule degree.
  VecX reference_functionals(Index tri, const ChartTensorFn& sigma, int edge_points,
                             int interior_degree) const;

 private:
  std::shared_ptr<const SurfaceMesh> mesh_;
  int kg_;
  Index dim_ = 0;
  ReferencePolynomials basis_;
  MatX dref_;
  Eigen::PartialPivLU<MatX> dref_lu_;
  double cond_ = 0.0;
  mutable std::mutex tab_mutex_;
  mutable std::map<int, MatX> tab_cache_;

  friend class DiscreteMetric;
};

/// A Regge field: global DOF values.
class DiscreteMetric {
 public:
  DiscreteMetric(std::shared_ptr<const ReggeSpace> space, VecX dofs);

  const ReggeSpace& space() const { return *space_; }
  const std::shared_ptr<const ReggeSpace>& space_ptr() const { return space_; }
  const VecX& dofs() const { return dofs_; }
  VecX& dofs() { return dofs_; }

  /// Shape-basis coefficients on one element, arranged scalar_size() x 3.
  Eigen::Matrix<double, Eigen::Dynamic, 3> element_coefficients(Index tri) const;
  Sym2 eval(Index tri, const Vec3& bary) const;

 private:
  std::shared_ptr<const ReggeSpace> space_;
  VecX dofs_;
};

/// Tensor from coefficients and a row of scalar basis values.
inline Sym2 regge_value(const Eigen::Matrix<double, Eigen::Dynamic, 3>& coef,
                        const Eigen::Ref<const Eigen::RowVectorXd>& phi) {
  const Eigen::RowVector3d s = phi * coef;
  Sym2 out;
  out << s[0], s[2], s[2], s[1];
  return out;
}

std::shared_ptr<const ReggeSpace> build_regge_space(std::shared_ptr<const SurfaceMesh> mesh, int kg);

/// Canonical interpolation of a chart tensor field.
DiscreteMetric regge_interpolate(std::shared_ptr<const ReggeSpace> space, const ChartTensorFn& sigma);
DiscreteMetric regge_interpolate(std::shared_ptr<const ReggeSpace> space,
                                 const PulledBackMetric& sigma, double t);

Sym2 eval_tensor(const DiscreteMetric& metric, Index tri, const Vec3& bary);

/// |σ_tt(K+) - σ_tt(K-)| at `count` Gauss points of an edge.
std::vector<double> tt_jump(const DiscreteMetric& metric, Index edge, int count);

/// Same for an arbitrary chart tensor field (no continuity assumed).
std::vector<double> tt_jump(const SurfaceMesh& mesh, const ChartTensorFn& sigma, Index edge, int count);

}  // namespace isoemb
