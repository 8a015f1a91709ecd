#pragma once

#include "isoemb/mesh.hpp"
#include "isoemb/quadrature.hpp"
#include "isoemb/types.hpp"

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

namespace isoemb {

/// Shape function values and chart gradients tabulated on a quadrature rule.
/// Row q, column a: value / ∂ξ1 / ∂ξ2 of local shape function a at point q.
struct LagrangeTabulation {
  MatX value;
  MatX d1;
  MatX d2;
};

/// Continuous degree-k Lagrange space on a piecewise-flat mesh.
///
/// Nodes form the equispaced barycentric lattice of each triangle. Global
/// numbering: vertices, then k-1 nodes per edge ordered from the lower vertex
/// index, then (k-1)(k-2)/2 interior nodes per triangle. Local order: the three
/// vertices, then edge nodes of local edges 0, 1, 2 in local direction, then
/// interior nodes.
class LagrangeSpace {
 public:
  LagrangeSpace(std::shared_ptr<const SurfaceMesh> mesh, int degree);

  int degree() const { return degree_; }
  Index dim() const { return dim_; }
  int local_size() const { return static_cast<int>(lattice_.size()); }

  const SurfaceMesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const SurfaceMesh>& mesh_ptr() const { return mesh_; }

  std::span<const Index> element_dofs(Index tri) const {
    return {dofs_.data() + tri * local_size(), static_cast<std::size_t>(local_size())};
  }
  /// Nodal points on M_h.
  const std::vector<Vec3>& nodes() const { return nodes_; }
  /// Integer barycentric lattice index (sum = k) of each local node.
  const std::vector<std::array<int, 3>>& lattice() const { return lattice_; }

  /// Reference shape functions at a barycentric point; grads is 2 x n.
  void shape(const Vec3& bary, VecX& values, Eigen::Matrix<double, 2, Eigen::Dynamic>* grads) const;

  const LagrangeTabulation& tabulate(const QuadratureRule& rule) const;

 private:
  std::shared_ptr<const SurfaceMesh> mesh_;
  int degree_;
  Index dim_ = 0;
  std::vector<std::array<int, 3>> lattice_;
  std::vector<Index> dofs_;
  std::vector<Vec3> nodes_;
  mutable std::mutex tab_mutex_;
  mutable std::map<int, LagrangeTabulation> tab_cache_;
};

/// Coefficients in a (vector) Lagrange space; vector components interleaved
/// per node: coefficient 3*node + c.
class FeField {
 public:
  FeField(std::shared_ptr<const LagrangeSpace> space, int components);
  FeField(std::shared_ptr<const LagrangeSpace> space, int components, VecX coefficients);

  const LagrangeSpace& space() const { return *space_; }
  const std::shared_ptr<const LagrangeSpace>& space_ptr() const { return space_; }
  int components() const { return components_; }
  const VecX& coefficients() const { return coeffs_; }
  VecX& coefficients() { return coeffs_; }

  Vec3 node_vector(Index node) const { return coeffs_.segment<3>(3 * node); }

  FeField& operator+=(const FeField& o);
  FeField& operator-=(const FeField& o);
  FeField& operator*=(double s);
  friend FeField operator+(FeField a, const FeField& b) { return a += b; }
  friend FeField operator-(FeField a, const FeField& b) { return a -= b; }
  friend FeField operator*(double s, FeField a) { return a *= s; }

  bool same_space(const FeField& o) const { return space_ == o.space_ && components_ == o.components_; }

 private:
  std::shared_ptr<const LagrangeSpace> space_;
  int components_;
  VecX coeffs_;
};

/// Value (components) and chart gradient (components x 2) at a point.
struct FieldSample {
  VecX value;
  Eigen::Matrix<double, Eigen::Dynamic, 2> gradient;
};

FieldSample eval_with_gradient(const FeField& field, Index tri, const Vec3& bary);

/// 3-component value and chart gradient [∂1 r, ∂2 r] at tabulated point q.
void eval_vector_at(const FeField& field, Index tri, const LagrangeTabulation& tab, int q,
                    Vec3& value, Mat32& grad);

/// Nodal interpolation of a function given on M_h (compose with the
/// closest-point map for functions on M).
FeField interpolate(std::shared_ptr<const LagrangeSpace> space,
                    const std::function<double(const Vec3&)>& f);
FeField interpolate(std::shared_ptr<const LagrangeSpace> space,
                    const std::function<Vec3(const Vec3&)>& f);

/// e_i x r (i = 0..2) followed by the constants e_i (i = 0..2).
std::array<FeField, 6> rigid_motion_basis(const FeField& r);

}  // namespace isoemb
