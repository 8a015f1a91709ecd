// Acceptance run: one PASS/FAIL line per criterion.
//
// Exit status is 0 when every criterion was evaluated, FAIL lines included;
// --strict also turns a FAIL into exit status 1. An exception inside a
// criterion is always fatal.

#include "isoemb/experiments.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

using namespace isoemb;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int prec = 4) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

double slope(double e1, double e2, double h1, double h2) { return std::log(e1 / e2) / std::log(h1 / h2); }

std::shared_ptr<const ReferenceManifold> unit_sphere() {
  return std::make_shared<const ReferenceManifold>(ReferenceManifold::sphere(1.0));
}

std::shared_ptr<const SurfaceMesh> placed(const SurfaceMesh& m, const ReferenceManifold& man) {
  return std::make_shared<const SurfaceMesh>(place_on_manifold(m, man));
}

MetricContext reference_context(std::shared_ptr<const ReferenceManifold> man, std::shared_ptr<const SurfaceMesh> mesh,
                                int kg, int quad) {
  const PulledBackMetric ref(std::move(man), mesh, induced_metric());
  return MetricContext(regge_interpolate(build_regge_space(mesh, kg), ref, 0.0), quad);
}

// Shared between criteria 1 and 4.
std::optional<ErrorReport> example1_report;

const ErrorReport& example1() {
  if (!example1_report) {
    FlowConfig c;  // k = k_g = 5, tau = 1e-3, T = 0.1, h targets 0.7 / 0.5 / 0.35
    auto src = make_source(c);
    example1_report = run_convergence(c, build_meshes(c.meshes, *src->manifold()));
  }
  return *example1_report;
}

Outcome convergence_order() {
  const ErrorReport& r = example1();
  std::string rows;
  bool ok = true;
  for (const auto& row : r.rows) {
    rows += " h=" + fmt(row.h) + ":" + fmt(row.graph_err, 3);
    ok = ok && row.status == "ok";
  }
  const auto e5 = r.eoc(2, &ErrorRow::graph_err);

  FlowConfig smoke;
  smoke.k = smoke.kg = 3;
  const auto t0 = std::chrono::steady_clock::now();
  const ErrorReport s = run_convergence(smoke, build_meshes(smoke.meshes, *make_source(smoke)->manifold()));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto e3 = s.eoc(2, &ErrorRow::graph_err);

  const bool p5 = ok && e5 && *e5 >= 4.5 && *e5 <= 5.7;
  const bool p3 = e3 && *e3 >= 2.5 && *e3 <= 3.7 && secs <= 300.0;
  return {p5 && p3, "k=5 EOC " + (e5 ? fmt(*e5, 3) : std::string("n/a")) + " in [4.5,5.7] (" + rows +
                        " ); empirical order check k=3 EOC " + (e3 ? fmt(*e3, 3) : std::string("n/a")) +
                        " in [2.5,3.7], " + fmt(secs, 3) + " s"};
}

Outcome regge_order() {
  auto sph = unit_sphere();
  bool pass = true;
  std::string detail;
  for (int kg = 0; kg <= 2; ++kg) {
    std::vector<double> hs, errs;
    for (int level = 1; level <= 3; ++level) {
      auto mesh = placed(build_icosphere(level), *sph);
      const PulledBackMetric pb(sph, mesh, induced_metric());
      const DiscreteMetric g = regge_interpolate(build_regge_space(mesh, kg), pb, 0.0);
      const MetricContext ctx(regge_interpolate(build_regge_space(mesh, 6), pb, 0.0), 16);
      hs.push_back(mesh_size(*mesh));
      errs.push_back(tensor_l2_distance(g, pb.at(0.0), ctx));
    }
    detail += " kg=" + std::to_string(kg) + ":";
    for (int i = 1; i < 3; ++i) {
      const double e = slope(errs[i - 1], errs[i], hs[i - 1], hs[i]);
      pass = pass && std::abs(e - (kg + 1)) <= 0.3;
      detail += " " + fmt(e, 3);
    }
  }
  return {pass, "L2 EOC vs kg+1 +- 0.3:" + detail};
}

Outcome infinitesimal_rigidity() {
  auto src = std::make_shared<const MetricSource>(ellipsoid_flow());
  auto man = src->manifold();
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> n;
  double worst = 0.0;
  for (int level = 1; level <= 3; ++level) {
    auto mesh = placed(build_icosphere(level), *man);
    auto space = std::make_shared<const LagrangeSpace>(mesh, 4);
    const MetricContext ctx = reference_context(man, mesh, 4, 11);
    const FeField r = interpolate(space, [&](const Vec3& x) -> Vec3 { return src->embedding(0.5, man->closest_point(x)); });
    const auto rb = rigid_motion_basis(r);
    for (int i = 0; i < 20; ++i) {
      FeField v = n(rng) * rb[0];
      for (int j = 1; j < 6; ++j) v += n(rng) * rb[j];
      worst = std::max(worst, d_norm(r, v, ctx) / l2_norm(v, ctx));
    }
  }
  return {worst <= 1e-11, "max ||dr.d(axr+b)|| / ||axr+b|| = " + fmt(worst, 3) + " <= 1e-11"};
}

Outcome multiplier_vanishing() {
  double worst = 0.0;
  for (const auto& row : example1().rows) worst = std::max(worst, row.max_lambda);
  return {worst <= 1e-6, "max over steps and meshes ||B^T lambda|| / ||f|| = " + fmt(worst, 3) + " <= 1e-6"};
}

Outcome pullback_identity() {
  auto sph = unit_sphere();
  auto mesh = placed(build_icosphere(2), *sph);
  auto space = std::make_shared<const LagrangeSpace>(mesh, 3);
  const FeField r = interpolate(space, [&](const Vec3& x) -> Vec3 {
    const Vec3 q = sph->closest_point(x);
    return Vec3(0.8 * q.x(), q.y() + 0.1 * q.z() * q.z(), 1.2 * q.z());
  });
  const FeField v = interpolate(space, [](const Vec3& x) -> Vec3 {
    return Vec3(std::sin(2 * x.y()), x.x() * x.z(), std::cos(x.x() + x.y()));
  });
  const QuadratureRule& rule = quadrature_rule(9);
  std::mt19937_64 rng(99);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Index t = static_cast<Index>(rng() % mesh->num_triangles());
    const Vec3& b = rule.points[rng() % rule.size()];
    const Mat32 gr = eval_with_gradient(r, t, b).gradient;
    const Mat32 gv = eval_with_gradient(v, t, b).gradient;
    for (double eps : {1.0, 1e-3}) {
      const Sym2 lhs = pullback(gr + eps * gv) - pullback(gr) - 2.0 * eps * d_odot(gr, gv);
      worst = std::max(worst, (lhs - eps * eps * pullback(gv)).cwiseAbs().maxCoeff());
    }
  }
  return {worst <= 1e-12, "max abs defect " + fmt(worst, 3) + " <= 1e-12 at 1000 points, eps in {1, 1e-3}"};
}

Outcome korn_stability() {
  auto sph = unit_sphere();
  std::vector<double> c;
  double oracle = 0.0;
  bool converged = true;
  for (int level = 0; level <= 2; ++level) {
    auto mesh = placed(build_icosphere(level), *sph);
    auto space = std::make_shared<const LagrangeSpace>(mesh, 3);
    const MetricContext ctx = reference_context(sph, mesh, 3, 9);
    const FeField r = interpolate(space, [&](const Vec3& x) -> Vec3 { return sph->closest_point(x); });
    const KornResult kr = korn_constant(r, ctx);
    converged = converged && kr.converged;
    c.push_back(kr.constant);
    if (level == 0) {
      // Smallest eigenvalue of (A, M) on ker B, densely.
      const SaddleSystem sys =
          assemble_saddle(r, [](Index, const Vec3&) -> Sym2 { return Sym2::Zero(); }, ctx);
      const MatX bt = MatX(sys.B).transpose();
      Eigen::ColPivHouseholderQR<MatX> qr(bt);
      const MatX q = qr.householderQ();
      const MatX z = q.rightCols(bt.rows() - 6);
      const MatX az = z.transpose() * MatX(sys.A) * z;
      const MatX mz = z.transpose() * MatX(sys.mass) * z;
      Eigen::GeneralizedSelfAdjointEigenSolver<MatX> ges(0.5 * (az + az.transpose()), 0.5 * (mz + mz.transpose()));
      oracle = std::sqrt(0.5 * ges.eigenvalues()[0]);
    }
  }
  const auto [lo, hi] = std::minmax_element(c.begin(), c.end());
  const double spread = (*hi - *lo) / *hi;
  const double rel = std::abs(c[0] - oracle) / oracle;
  return {converged && *lo > 0.0 && spread <= 0.25 && rel <= 1e-6,
          "constants " + fmt(c[0], 6) + ", " + fmt(c[1], 6) + ", " + fmt(c[2], 6) + "; spread " + fmt(spread, 3) +
              " <= 0.25; dense oracle rel diff " + fmt(rel, 3) + " <= 1e-6"};
}

Outcome temporal_order() {
  auto src = std::make_shared<const MetricSource>(ellipsoid_flow());
  auto mesh = placed(build_geodesic_sphere(3), *src->manifold());
  StepperOptions opt;
  opt.track_isometry = false;
  const FlowProblem p = make_flow_problem(src, mesh, 3, 3, -1, opt);
  const double T = 0.1;
  auto run = [&](double tau) {
    FlowState s = initialize(p, tau);
    run_until(s, T);
    return s.current();
  };
  const FeField ref = run(2.5e-4);
  const FeField rstar = interpolate_embedding(p, T);
  std::vector<double> e;
  for (double tau : {4e-3, 2e-3, 1e-3}) e.push_back(graph_norm(run(tau) - ref, rstar, *p.ctx));
  const double s1 = std::log2(e[0] / e[1]), s2 = std::log2(e[1] / e[2]);
  return {std::abs(s1 - 3.0) <= 0.4 && std::abs(s2 - 3.0) <= 0.4,
          "slopes " + fmt(s1, 3) + ", " + fmt(s2, 3) + " in 3 +- 0.4 (errors " + fmt(e[0], 3) + ", " + fmt(e[1], 3) +
              ", " + fmt(e[2], 3) + " vs tau = 2.5e-4 reference)"};
}

Outcome ricci_pipeline() {
  const AxisymProfile p0 = sample_profile(ricci_example_curve(), 512);
  const auto run = ricci_axisym_run(p0, 0.0, 0.4);
  const double a0 = axisym_area(p0);
  double drift = 0.0;
  for (int i = 0; i <= 40; ++i) drift = std::max(drift, std::abs(axisym_area(run->profile(0.01 * i)) / a0 - 1.0));

  const AxisymProfile round = sample_profile(revolution_flow_curve(0.0), 512);
  const auto still = ricci_axisym_run(round, 0.0, 0.4);
  double moved = 0.0;
  for (int i = 0; i <= 4; ++i) {
    const AxisymProfile p = still->profile(0.1 * i);
    for (std::size_t j = 1; j + 1 < p.s.size(); ++j) {
      moved = std::max({moved, std::abs(p.h[j] / round.h[j] - 1.0), std::abs(p.m[j] / round.m[j] - 1.0)});
    }
  }

  FlowConfig c;
  c.experiment = Experiment::Ricci;
  c.k = c.kg = 3;
  c.meshes = {{}, {3}, {}};
  c.tau = 1e-2;
  c.T = 0.4;
  const EmbeddingResult res = run_embedding(c);
  double ratio = 0.0;
  if (!res.trajectory.failed && !res.trajectory.states.empty()) {
    // Radii about the least-squares sphere through the mesh vertices.
    const FeField& r = res.trajectory.states.back();
    const SurfaceMesh& mesh = r.space().mesh();
    std::vector<Vec3> pts;
    for (Index t = 0; t < mesh.num_triangles(); ++t) {
      for (int i = 0; i < 3; ++i) pts.push_back(eval_with_gradient(r, t, Vec3::Unit(i)).value);
    }
    MatX a(pts.size(), 4);
    VecX rhs(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      a.row(i) << 2.0 * pts[i].transpose(), 1.0;
      rhs[i] = pts[i].squaredNorm();
    }
    const VecX sol = a.colPivHouseholderQr().solve(rhs);
    const Vec3 centre = sol.head<3>();
    double lo = 1e300, hi = 0.0;
    for (const Vec3& x : pts) {
      lo = std::min(lo, (x - centre).norm());
      hi = std::max(hi, (x - centre).norm());
    }
    ratio = hi / lo;
  }
  const bool pass = drift <= 1e-4 && moved <= 1e-8 && ratio > 0.0 && ratio <= 1.1;
  return {pass, "area drift " + fmt(drift, 3) + " <= 1e-4; round sphere change " + fmt(moved, 3) +
                    " <= 1e-8; radius max/min at T=0.4 " + fmt(ratio, 5) + " <= 1.1" +
                    (res.trajectory.failed ? " (embedding run failed: " + res.trajectory.failure + ")" : "")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  bool strict = false;
  std::vector<int> only;
  app.add_flag("--strict", strict, "exit 1 when any criterion fails");
  app.add_option("--only", only, "run only these criteria");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<int, Outcome (*)()>> criteria = {
      {1, convergence_order},      {2, regge_order},     {3, infinitesimal_rigidity}, {4, multiplier_vanishing},
      {5, pullback_identity},      {6, korn_stability},  {7, temporal_order},         {8, ricci_pipeline}};
  const std::set<int> selected(only.begin(), only.end());
  int failed = 0;
  for (const auto& [id, fn] : criteria) {
    if (!selected.empty() && !selected.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      std::cout << "criterion " << id << ": ERROR " << e.what() << std::endl;
      return 2;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << "  [" << fmt(secs, 3)
              << " s]" << std::endl;
    if (!o.pass) ++failed;
  }
  std::cout << failed << " failing criteria" << std::endl;
  return strict && failed > 0 ? 1 : 0;
}
