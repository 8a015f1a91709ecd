// Command-line driver: convergence studies, embedding runs, Ricci runs,
// mesh export and Korn-constant diagnostics.

#include "isoemb/experiments.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>

using namespace isoemb;

namespace {

struct Overrides {
  std::string config;
  std::string experiment;
  std::vector<int> levels;
  std::vector<int> frequencies;
  std::vector<double> target_h;
  int degree = -1;
  int regge_degree = -1;
  double tau = -1.0;
  double until = -1.0;
  std::string out;
  bool dump = false;
  bool vtk = false;
};

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "JSON configuration file");
  app->add_option("--experiment", o.experiment, "ellipsoid | revolution | conformal | ricci");
  app->add_option("--mesh-level", o.levels, "icosphere refinement level (repeatable)");
  app->add_option("--frequency", o.frequencies, "geodesic-sphere frequency (repeatable)");
  app->add_option("--target-h", o.target_h, "target mesh size (repeatable)");
  app->add_option("--degree", o.degree, "Lagrange degree k (also sets k_g unless --regge-degree)");
  app->add_option("--regge-degree", o.regge_degree, "Regge degree k_g");
  app->add_option("--tau", o.tau, "time step");
  app->add_option("--until", o.until, "final time T");
  app->add_option("--out", o.out, "output directory");
  app->add_flag("--dump-matrices", o.dump, "write MatrixMarket files of every assembled system");
  app->add_flag("--vtk", o.vtk, "export VTK surfaces at sample times");
}

FlowConfig resolve(const Overrides& o, Experiment fallback) {
  FlowConfig c = o.config.empty() ? FlowConfig{} : load_config(o.config);
  if (o.config.empty()) c.experiment = fallback;
  if (!o.experiment.empty()) c.experiment = experiment_from_string(o.experiment);
  if (!o.levels.empty() || !o.frequencies.empty() || !o.target_h.empty()) {
    c.meshes = {o.levels, o.frequencies, o.target_h};
  }
  if (o.degree != -1) {
    c.k = o.degree;
    c.kg = o.degree;
  }
  if (o.regge_degree != -1) c.kg = o.regge_degree;
  if (o.tau > 0.0) c.tau = o.tau;
  if (o.until >= 0.0) {
    c.T = o.until;
    std::erase_if(c.sample_times, [&](double s) { return s > c.T; });
  }
  if (!o.out.empty()) c.out_dir = o.out;
  if (o.dump) c.dump_matrices = true;
  if (o.vtk) c.export_vtk = true;
  c.validate();
  return c;
}

void print_report(const ErrorReport& r) {
  std::cout << std::setw(10) << "h" << std::setw(9) << "dofs" << std::setw(13) << "L2" << std::setw(13) << "D"
            << std::setw(13) << "graph" << std::setw(9) << "EOC" << std::setw(13) << "max|lam|"
            << "  status\n";
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const auto& row = r.rows[i];
    const auto e = r.eoc(i, &ErrorRow::graph_err);
    std::printf("%10.4f %8lld %12.4e %12.4e %12.4e %8s %12.4e  %s\n", row.h, static_cast<long long>(row.dofs),
                row.l2_err, row.d_err, row.graph_err, e ? std::to_string(*e).substr(0, 6).c_str() : "-",
                row.max_lambda, row.status.c_str());
  }
  if (!r.theory_regime) std::cout << "note: k != k_g or k < 5; the orders above are an empirical order check\n";
}

int cmd_converge(const Overrides& o) {
  const FlowConfig c = resolve(o, Experiment::Ellipsoid);
  auto source = make_source(c);
  const auto meshes = build_meshes(c.meshes, *source->manifold());
  const ErrorReport r = run_convergence(c, meshes);
  print_report(r);
  for (const auto& row : r.rows) {
    if (row.status != "ok") return 2;
  }
  return 0;
}

int cmd_embed(const Overrides& o, Experiment fallback) {
  const FlowConfig c = resolve(o, fallback);
  const EmbeddingResult res = run_embedding(c);
  double lam = 0.0, iso = 0.0;
  for (const auto& d : res.trajectory.diagnostics) {
    lam = std::max(lam, d.lambda_norm);
    iso = std::max(iso, d.isometry_res);
  }
  std::cout << to_string(c.experiment) << ": " << res.trajectory.diagnostics.size() << " states, max |lambda| rel "
            << lam << ", max isometry residual " << iso << '\n';
  for (const auto& f : res.files) std::cout << "wrote " << f << '\n';
  if (res.trajectory.failed) {
    std::cerr << "run aborted: " << res.trajectory.failure << '\n';
    return 2;
  }
  return 0;
}

int cmd_ricci(const Overrides& o, bool embed) {
  if (embed) return cmd_embed(o, Experiment::Ricci);
  FlowConfig c = resolve(o, Experiment::Ricci);
  const AxisymProfile p0 = sample_profile(ricci_example_curve(), c.ricci.intervals);
  auto traj = ricci_axisym_run(p0, c.ricci.tau, c.T, c.ricci.snapshot_dt);
  const double a0 = traj->discrete_area(0.0);
  std::cout << "kappa_bar " << traj->kappa_bar() << ", steps " << traj->steps() << ", tau " << traj->step() << '\n';
  std::vector<double> times = c.sample_times.empty() ? std::vector<double>{0.0, c.T} : c.sample_times;
  if (!c.out_dir.empty()) std::filesystem::create_directories(c.out_dir);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const std::vector<double> kappa = traj->curvature(times[i]);
    const auto [lo, hi] = std::minmax_element(kappa.begin(), kappa.end());
    std::cout << "t " << times[i] << ": area drift " << traj->discrete_area(times[i]) / a0 - 1.0 << ", kappa in ["
              << *lo << ", " << *hi << "]\n";
    if (!c.out_dir.empty()) {
      write_profile_csv(traj->profile(times[i]), kappa, c.out_dir + "/ricci_profile_" + std::to_string(i) + ".csv");
    }
  }
  return 0;
}

int cmd_export(const Overrides& o) {
  FlowConfig c = resolve(o, Experiment::Ellipsoid);
  if (c.out_dir.empty()) c.out_dir = ".";
  std::filesystem::create_directories(c.out_dir);
  auto source = make_source(c);
  const auto meshes = build_meshes(c.meshes, *source->manifold());
  for (std::size_t m = 0; m < meshes.size(); ++m) {
    const std::string stem = c.out_dir + "/mesh" + std::to_string(m);
    write_off(*meshes[m], stem + ".off");
    auto space = std::make_shared<const LagrangeSpace>(meshes[m], c.k);
    const ReferenceManifold& man = *source->manifold();
    const FeField r0 =
        interpolate(space, [&](const Vec3& x) -> Vec3 { return source->initial_embedding(man.closest_point(x)); });
    export_vtk(r0, stem + ".vtk", c.vtk_subdivision);
    std::cout << stem << ": h " << mesh_size(*meshes[m]) << ", " << meshes[m]->num_triangles() << " triangles\n";
  }
  return 0;
}

int cmd_korn(const Overrides& o) {
  FlowConfig c = resolve(o, Experiment::Ellipsoid);
  if (o.levels.empty() && o.frequencies.empty() && o.target_h.empty()) c.meshes = {{1, 2, 3}, {}, {}};
  if (o.degree == -1 && o.config.empty()) c.k = c.kg = 3;
  auto sphere = std::make_shared<const ReferenceManifold>(ReferenceManifold::sphere(1.0));
  for (const auto& mesh : build_meshes(c.meshes, *sphere)) {
    auto space = std::make_shared<const LagrangeSpace>(mesh, c.k);
    auto regge = build_regge_space(mesh, c.kg);
    const PulledBackMetric ref(sphere, mesh, induced_metric());
    const MetricContext ctx(regge_interpolate(regge, ref, 0.0), c.quad_degree < 0 ? 2 * c.k + 3 : c.quad_degree);
    const FeField r = interpolate(space, [&](const Vec3& x) -> Vec3 { return sphere->closest_point(x); });
    const KornResult kr = korn_constant(r, ctx);
    std::cout << "h " << mesh_size(*mesh) << ": Korn constant " << std::setprecision(10) << kr.constant
              << " (iterations " << kr.iterations << (kr.converged ? "" : ", not converged") << ")\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Isometric embedding flows with Lagrange and Regge finite elements"};
  app.require_subcommand(1);
  Overrides o;
  bool embed_ricci = false;
  auto* converge = app.add_subcommand("converge", "error table and EOC against the exact embedding");
  auto* embed = app.add_subcommand("embed", "run a flow and export the surface trajectory");
  auto* ricci = app.add_subcommand("ricci", "axisymmetric normalized Ricci flow of the example surface");
  auto* exp = app.add_subcommand("export", "write meshes (OFF) and initial surfaces (VTK)");
  auto* korn = app.add_subcommand("korn", "discrete Korn constant on the unit sphere");
  for (auto* sc : {converge, embed, ricci, exp, korn}) add_common(sc, o);
  ricci->add_flag("--embed", embed_ricci, "also run the embedding flow driven by the Ricci metric");
  CLI11_PARSE(app, argc, argv);
  try {
    if (*converge) return cmd_converge(o);
    if (*embed) return cmd_embed(o, Experiment::Revolution);
    if (*ricci) return cmd_ricci(o, embed_ricci);
    if (*exp) return cmd_export(o);
    if (*korn) return cmd_korn(o);
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  return 0;
}
