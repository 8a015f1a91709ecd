#include "isoemb/stepper.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>

namespace isoemb {

DiscreteMetric FlowProblem::metric_at(double t) const { return regge_interpolate(regge, *target, t); }

DiscreteMetric FlowProblem::rate_at(double t) const { return regge_interpolate(regge, target->rate_at(t)); }

FlowProblem make_flow_problem(std::shared_ptr<const MetricSource> source, std::shared_ptr<const SurfaceMesh> mesh,
                              int k, int kg, int quad_degree, StepperOptions options) {
  FlowProblem p;
  p.source = source;
  p.mesh = mesh;
  p.space = std::make_shared<const LagrangeSpace>(mesh, k);
  p.regge = build_regge_space(mesh, kg);
  const PulledBackMetric reference(source->manifold(), mesh, induced_metric());
  const DiscreteMetric gmh = regge_interpolate(p.regge, reference, 0.0);
  p.ctx = std::make_shared<const MetricContext>(gmh, quad_degree < 0 ? 2 * k + 3 : quad_degree);
  p.target = std::make_shared<const PulledBackMetric>(source->pullback(mesh));
  p.options = std::move(options);
  return p;
}

FlowState::FlowState(const FlowProblem& problem, double tau) : problem_(&problem), tau_(tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidStep("time step must be positive, got " + std::to_string(tau));
}

void FlowState::push(FeField r, StepDiagnostics d) {
  history_.push_front(std::move(r));
  while (history_.size() > 3) history_.pop_back();
  ++n_;
  diag_.push_back(d);
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void finish_diagnostics(const FlowProblem& problem, const FeField& r, double t, StepDiagnostics& d) {
  if (!problem.options.track_isometry) return;
  d.isometry_res = isometry_residual(r, problem.metric_at(t), *problem.ctx);
}

}  // namespace

VelocitySolution solve_velocity(const FlowProblem& problem, const FeField& r_ref, double t, StepDiagnostics& diag,
                                int step) {
  const MetricContext& ctx = *problem.ctx;
  SaddleSystem sys = problem.options.rate == RateMode::Regge
                         ? assemble_saddle(r_ref, problem.rate_at(t), ctx, t)
                         : assemble_saddle(r_ref, problem.target->rate_at(t), ctx, t);
  if (!problem.options.dump_prefix.empty()) {
    dump_matrix_market(sys, problem.options.dump_prefix + "_step" + std::to_string(step));
  }
  VelocitySolution sol = solve_saddle(sys);
  const double fn = sys.f.norm();
  const double force = (sys.B.transpose() * sol.lambda).norm();
  diag.lambda_abs = sol.lambda.norm();
  diag.rhs_norm = fn;
  diag.lambda_norm = fn > 0.0 ? force / fn : force;
  const VecX& v = sol.v.coefficients();
  const double vnorm = std::sqrt(std::max(0.0, v.dot(sys.mass * v)));
  double worst = 0.0;
  if (vnorm > 0.0) {
    const Vec6 bv = sys.B * v;
    for (int i = 0; i < 6; ++i) {
      const double mu = std::sqrt(sys.rigid.col(i).dot(sys.mass * sys.rigid.col(i)));
      worst = std::max(worst, std::abs(bv[i]) / (vnorm * mu));
    }
  }
  diag.constraint_res = worst;
  diag.step = step;
  diag.t = t;
  return sol;
}

FeField interpolate_embedding(const FlowProblem& problem, double t) {
  const MetricSource& src = *problem.source;
  const ReferenceManifold& m = *src.manifold();
  if (t == 0.0) {
    return interpolate(problem.space, [&](const Vec3& x) -> Vec3 { return src.initial_embedding(m.closest_point(x)); });
  }
  return interpolate(problem.space, [&](const Vec3& x) -> Vec3 { return src.embedding(t, m.closest_point(x)); });
}

void startup_steps(FlowState& s) {
  const FlowProblem& p = s.problem();
  const double tau = s.tau();
  if (p.options.startup == Startup::Bdf) {
    {
      const auto start = Clock::now();
      StepDiagnostics d;
      const FeField& r0 = s.history(0);
      const VelocitySolution sol = solve_velocity(p, r0, tau, d, 1);
      FeField r1 = r0 + tau * sol.v;
      finish_diagnostics(p, r1, tau, d);
      d.wall_ms = elapsed_ms(start);
      s.push(std::move(r1), d);
    }
    {
      const auto start = Clock::now();
      StepDiagnostics d;
      const FeField& r1 = s.history(0);
      const FeField& r0 = s.history(1);
      const FeField ref = 2.0 * r1 - r0;
      const VelocitySolution sol = solve_velocity(p, ref, 2 * tau, d, 2);
      FeField r2 = (1.0 / 3.0) * (4.0 * r1 - r0 + (2.0 * tau) * sol.v);
      finish_diagnostics(p, r2, 2 * tau, d);
      d.wall_ms = elapsed_ms(start);
      s.push(std::move(r2), d);
    }
    return;
  }
  // Heun's third-order method: k1 at t, k2 at t + τ/3, k3 at t + 2τ/3.
  for (int step = 1; step <= 2; ++step) {
    const auto start = Clock::now();
    const double t = s.time();
    const FeField& y = s.history(0);
    StepDiagnostics d1, d2, d3;
    const FeField k1 = solve_velocity(p, y, t, d1, step).v;
    const FeField k2 = solve_velocity(p, y + (tau / 3.0) * k1, t + tau / 3.0, d2, step).v;
    const FeField k3 = solve_velocity(p, y + (2.0 * tau / 3.0) * k2, t + 2.0 * tau / 3.0, d3, step).v;
    FeField next = y + (tau / 4.0) * (k1 + 3.0 * k3);
    StepDiagnostics d = d1;
    for (const auto* o : {&d2, &d3}) {
      d.lambda_norm = std::max(d.lambda_norm, o->lambda_norm);
      d.lambda_abs = std::max(d.lambda_abs, o->lambda_abs);
      d.constraint_res = std::max(d.constraint_res, o->constraint_res);
    }
    d.step = step;
    d.t = t + tau;
    finish_diagnostics(p, next, t + tau, d);
    d.wall_ms = elapsed_ms(start);
    s.push(std::move(next), d);
  }
}

FlowState initialize(const FlowProblem& problem, double tau) {
  FlowState s(problem, tau);
  FeField r0 = interpolate_embedding(problem, 0.0);
  StepDiagnostics d;
  finish_diagnostics(problem, r0, 0.0, d);
  s.history_.push_front(std::move(r0));
  s.diag_.push_back(d);
  startup_steps(s);
  return s;
}

void bdf3_step(FlowState& s) {
  if (s.history_size() < 3) throw InvalidStep("BDF3 needs three history levels");
  const auto start = Clock::now();
  const FlowProblem& p = s.problem();
  const double tau = s.tau();
  const FeField& h0 = s.history(0);
  const FeField& h1 = s.history(1);
  const FeField& h2 = s.history(2);
  const FeField ref = 3.0 * h0 - 3.0 * h1 + h2;
  const double t = (s.index() + 1) * tau;
  StepDiagnostics d;
  const VelocitySolution sol = solve_velocity(p, ref, t, d, s.index() + 1);
  FeField next = (1.0 / 11.0) * (18.0 * h0 - 9.0 * h1 + 2.0 * h2 + (6.0 * tau) * sol.v);
  finish_diagnostics(p, next, t, d);
  d.wall_ms = elapsed_ms(start);
  s.push(std::move(next), d);
}

void run_until(FlowState& state, double t_end, const std::function<void(const FlowState&)>& on_step) {
  while (state.time() < t_end - 0.5 * state.tau()) {
    bdf3_step(state);
    if (on_step) on_step(state);
  }
}

void write_diagnostics_csv(const std::vector<StepDiagnostics>& diag, std::ostream& out) {
  out << "step,t,lambda_norm,constraint_res,isometry_res,wall_ms\n" << std::setprecision(17);
  for (const auto& d : diag) {
    out << d.step << ',' << d.t << ',' << d.lambda_norm << ',' << d.constraint_res << ',' << d.isometry_res << ','
        << d.wall_ms << '\n';
  }
}

void write_diagnostics_csv(const std::vector<StepDiagnostics>& diag, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path);
  write_diagnostics_csv(diag, out);
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace isoemb
