#pragma once

#include "isoemb/forms.hpp"
#include "isoemb/lagrange.hpp"
#include "isoemb/regge.hpp"
#include "isoemb/sources.hpp"
#include "isoemb/system.hpp"

#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace isoemb {

/// How the two steps before the first full BDF3 step are produced.
enum class Startup {
  Bdf,  // BDF1 then BDF2 with extrapolated references r̂¹ = r⁰, r̂² = 2r¹ − r⁰
  Rk3,  // Heun's third-order Runge–Kutta on r' = v(r, t)
};

/// How ∂_t g_h(t_n) enters the right-hand side.
enum class RateMode {
  Regge,     // R_h(a*∂_t g(t_n))
  Analytic,  // a*∂_t g(t_n) at quadrature points
};

struct StepperOptions {
  Startup startup = Startup::Rk3;
  RateMode rate = RateMode::Regge;
  bool track_isometry = true;
  /// Directory prefix for MatrixMarket dumps of every assembled system; empty disables.
  std::string dump_prefix;
};

/// Data shared by all steps of one flow on one mesh.
struct FlowProblem {
  std::shared_ptr<const MetricSource> source;
  std::shared_ptr<const SurfaceMesh> mesh;
  std::shared_ptr<const LagrangeSpace> space;
  std::shared_ptr<const ReggeSpace> regge;
  std::shared_ptr<const MetricContext> ctx;  // g_{M_h} = R_h(a*g_M)
  std::shared_ptr<const PulledBackMetric> target;  // a*g(t), a*∂_t g(t)
  StepperOptions options;

  /// g_h(t) = R_h(a*g(t)).
  DiscreteMetric metric_at(double t) const;
  /// ∂_t g_h(t) = R_h(a*∂_t g(t)).
  DiscreteMetric rate_at(double t) const;
};

/// quad_degree < 0 selects 2k + 3.
FlowProblem make_flow_problem(std::shared_ptr<const MetricSource> source, std::shared_ptr<const SurfaceMesh> mesh,
                              int k, int kg, int quad_degree = -1, StepperOptions options = {});

struct StepDiagnostics {
  int step = 0;
  double t = 0.0;
  double lambda_norm = 0.0;      // ‖Bᵀλ‖ / ‖f‖
  double constraint_res = 0.0;   // max_i |(v, μ_i)| / (‖v‖ ‖μ_i‖)
  double isometry_res = 0.0;     // ‖dr⊙dr − g_h(t)‖
  double wall_ms = 0.0;
  double lambda_abs = 0.0;       // ‖λ‖ in the rigid-motion basis
  double rhs_norm = 0.0;         // ‖f‖
};

/// BDF history and diagnostics of one flow.
class FlowState {
 public:
  FlowState(const FlowProblem& problem, double tau);

  const FlowProblem& problem() const { return *problem_; }
  double tau() const { return tau_; }
  int index() const { return n_; }
  double time() const { return n_ * tau_; }
  /// r^n (most recent).
  const FeField& current() const { return history_.front(); }
  /// r^{n-j}, j = 0..size-1.
  const FeField& history(int j) const { return history_[j]; }
  int history_size() const { return static_cast<int>(history_.size()); }
  const std::vector<StepDiagnostics>& diagnostics() const { return diag_; }

 private:
  friend FlowState initialize(const FlowProblem&, double);
  friend void bdf3_step(FlowState&);
  friend void startup_steps(FlowState&);
  void push(FeField r, StepDiagnostics d);

  const FlowProblem* problem_;
  double tau_;
  int n_ = 0;
  std::deque<FeField> history_;
  std::vector<StepDiagnostics> diag_;
};

/// r⁰ = I_h r(0) composed with the closest-point map; then the two startup
/// steps. Throws InvalidStep for τ <= 0.
FlowState initialize(const FlowProblem& problem, double tau);

/// One BDF3 step with r̂ⁿ = 3r^{n−1} − 3r^{n−2} + r^{n−3}.
void bdf3_step(FlowState& state);

/// Advance until t >= t_end (within τ/2). `on_step` sees every accepted state.
void run_until(FlowState& state, double t_end, const std::function<void(const FlowState&)>& on_step = {});

/// Solve for the velocity with reference field r at time t, filling diagnostics.
VelocitySolution solve_velocity(const FlowProblem& problem, const FeField& r_ref, double t, StepDiagnostics& diag,
                                int step);

/// Nodal interpolant of the exact embedding at time t: I_h r(t) ∘ a.
FeField interpolate_embedding(const FlowProblem& problem, double t);

/// CSV columns: step,t,lambda_norm,constraint_res,isometry_res,wall_ms.
void write_diagnostics_csv(const std::vector<StepDiagnostics>& diag, const std::string& path);
void write_diagnostics_csv(const std::vector<StepDiagnostics>& diag, std::ostream& out);

}  // namespace isoemb
