#pragma once

#include "isoemb/lagrange.hpp"
#include "isoemb/regge.hpp"
#include "isoemb/types.hpp"

#include <cstdint>
#include <memory>
#include <vector>

namespace isoemb {

/// Symmetric tensor as (S11, S22, S12).
inline Vec3 sym_vec(const Sym2& s) { return Vec3(s(0, 0), s(1, 1), 0.5 * (s(0, 1) + s(1, 0))); }

/// W with sᵀ W t = tr(G⁻¹ S G⁻¹ T) for s = sym_vec(S), t = sym_vec(T).
Mat3 tensor_product_weight(const Sym2& g_inv);

/// Quadrature-point cache of the reference metric g_{M_h}: g, g⁻¹, √det g
/// and the tensor inner-product weight on every element.
class MetricContext {
 public:
  MetricContext(std::shared_ptr<const SurfaceMesh> mesh, const ChartTensorFn& g, int quad_degree);
  MetricContext(const DiscreteMetric& g, int quad_degree);

  /// Re-evaluates the cache; bumps version().
  void rebuild(const ChartTensorFn& g);
  void rebuild(const DiscreteMetric& g);

  const SurfaceMesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const SurfaceMesh>& mesh_ptr() const { return mesh_; }
  const QuadratureRule& rule() const { return *rule_; }
  int points_per_element() const { return static_cast<int>(rule_->size()); }
  std::uint64_t version() const { return version_; }

  const Sym2& metric(Index tri, int q) const { return g_[slot(tri, q)]; }
  const Sym2& inverse(Index tri, int q) const { return ginv_[slot(tri, q)]; }
  double sqrt_det(Index tri, int q) const { return sqrtdet_[slot(tri, q)]; }
  /// Quadrature weight times √det g.
  double volume(Index tri, int q) const { return rule_->weights[q] * sqrtdet_[slot(tri, q)]; }
  const Mat3& product_weight(Index tri, int q) const { return w_[slot(tri, q)]; }

  void require_mesh(const SurfaceMesh& m) const;

 private:
  std::size_t slot(Index tri, int q) const { return static_cast<std::size_t>(tri) * rule_->size() + q; }
  void fill(Index tri, int q, const Sym2& g);

  std::shared_ptr<const SurfaceMesh> mesh_;
  const QuadratureRule* rule_;
  std::vector<Sym2> g_, ginv_;
  std::vector<double> sqrtdet_;
  std::vector<Mat3> w_;
  std::uint64_t version_ = 0;
};

/// ½(∂_i r·∂_j v + ∂_j r·∂_i v) from chart gradients.
inline Sym2 d_odot(const Mat32& grad_r, const Mat32& grad_v) { return sym_product(grad_r, grad_v); }

/// Pullback dr⊙dr.
inline Sym2 pullback(const Mat32& grad_r) { return sym_product(grad_r, grad_r); }

/// Chart tensor evaluated at the context's quadrature points of one element.
using PointTensorFn = std::function<Sym2(Index tri, int q)>;

double inner_vector(const FeField& u, const FeField& v, const MetricContext& ctx);
double l2_norm(const FeField& u, const MetricContext& ctx);

double inner_tensor(const ChartTensorFn& sigma, const ChartTensorFn& omega, const MetricContext& ctx);
double inner_tensor(const PointTensorFn& sigma, const PointTensorFn& omega, const MetricContext& ctx);

/// ‖D_r v‖ in L²(M_h).
double d_norm(const FeField& r, const FeField& v, const MetricContext& ctx);

/// (‖e‖² + ‖dr*⊙de‖²)^{1/2}.
double graph_norm(const FeField& e, const FeField& r_star, const MetricContext& ctx);

/// ‖dr⊙dr − g‖ in L²(M_h).
double isometry_residual(const FeField& r, const DiscreteMetric& g_target, const MetricContext& ctx);
double isometry_residual(const FeField& r, const ChartTensorFn& g_target, const MetricContext& ctx);

/// ‖σ − ω‖ in L²(M_h).
double tensor_l2_distance(const DiscreteMetric& sigma, const ChartTensorFn& omega, const MetricContext& ctx);

/// Values of a Regge field at every quadrature point of the context, row-major by element.
std::vector<Sym2> tabulate_metric(const DiscreteMetric& g, const QuadratureRule& rule);

/// Pairwise summation in index order.
double pairwise_sum(const std::vector<double>& v);

}  // namespace isoemb
