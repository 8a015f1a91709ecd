#pragma once

#include "isoemb/forms.hpp"
#include "isoemb/lagrange.hpp"
#include "isoemb/regge.hpp"

#include <Eigen/Sparse>

#include <array>
#include <memory>
#include <optional>
#include <string>

namespace isoemb {

using SparseMat = Eigen::SparseMatrix<double>;
using Mat6X = Eigen::Matrix<double, 6, Eigen::Dynamic>;
using Vec6 = Eigen::Matrix<double, 6, 1>;

/// Velocity system [A Bᵀ; B 0][v; λ] = [f; 0] for one reference field.
struct SaddleSystem {
  std::shared_ptr<const LagrangeSpace> space;
  SparseMat A;     // 2 (dr̂⊙dq_a, dr̂⊙dq_b)
  Mat6X B;         // (q_a, μ_i)
  VecX f;          // (∂_t g_h, dr̂⊙dq_a)
  MatX rigid;      // n x 6 coefficient columns of the rigid-motion basis
  SparseMat mass;  // vector mass matrix
  double time = 0.0;
  std::uint64_t ctx_version = 0;
};

struct VelocitySolution {
  FeField v;
  Vec6 lambda;
  double residual = 0.0;            // ‖Av + Bᵀλ − f‖
  double constraint_residual = 0.0; // ‖Bv‖
};

/// Scalar mass matrix ∫ φ_a φ_b Vol_{g_{M_h}}.
SparseMat scalar_mass_matrix(const LagrangeSpace& space, const MetricContext& ctx);
/// Scalar mass tensored with I3 (interleaved components).
SparseMat vector_mass_matrix(const LagrangeSpace& space, const MetricContext& ctx);

/// Linearized isometry operator 2(dr⊙dq_a, dr⊙dq_b) alone.
SparseMat assemble_stiffness(const FeField& r_ref, const MetricContext& ctx);

/// g_dot given analytically in charts.
SaddleSystem assemble_saddle(const FeField& r_ref, const ChartTensorFn& g_dot, const MetricContext& ctx,
                             double time = 0.0);
/// g_dot given as a Regge field.
SaddleSystem assemble_saddle(const FeField& r_ref, const DiscreteMetric& g_dot, const MetricContext& ctx,
                             double time = 0.0);

/// Bordered matrix [A Bᵀ; B 0].
SparseMat bordered_matrix(const SaddleSystem& sys);

VelocitySolution solve_saddle(const SaddleSystem& sys);

/// L²(M_h)-orthogonal projection onto RM[r_ref].
FeField project_rm(const FeField& v, const FeField& r_ref, const MetricContext& ctx);

struct KornResult {
  double constant = 0.0;  // min ‖dr⊙dv‖ / ‖v‖ over v ⟂ RM
  double eigenvalue = 0.0; // smallest constrained eigenvalue of (A, M)
  int iterations = 0;
  bool converged = false;
};

/// Block inverse subspace iteration on the constrained pencil (A, M).
KornResult korn_constant(const FeField& r_ref, const MetricContext& ctx, int max_iterations = 200,
                         double tolerance = 1e-8);

/// MatrixMarket coordinate dump of A, B and f.
void dump_matrix_market(const SaddleSystem& sys, const std::string& prefix);
void write_matrix_market(const SparseMat& m, const std::string& path);

}  // namespace isoemb
