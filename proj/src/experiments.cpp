#include "isoemb/experiments.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

namespace isoemb {

using nlohmann::json;

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::Ellipsoid: return "ellipsoid";
    case Experiment::Revolution: return "revolution";
    case Experiment::Conformal: return "conformal";
    case Experiment::Ricci: return "ricci";
  }
  return "?";
}

Experiment experiment_from_string(const std::string& s) {
  if (s == "ellipsoid") return Experiment::Ellipsoid;
  if (s == "revolution") return Experiment::Revolution;
  if (s == "conformal") return Experiment::Conformal;
  if (s == "ricci") return Experiment::Ricci;
  throw ConfigError("unknown experiment '" + s + "'");
}

void FlowConfig::validate() const {
  if (k < 1 || k > 8) throw ConfigError("k must be in 1..8, got " + std::to_string(k));
  if (kg < 0 || kg > 8) throw ConfigError("kg must be in 0..8, got " + std::to_string(kg));
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("tau must be positive");
  if (!(T >= 0.0) || !std::isfinite(T)) throw ConfigError("T must be non-negative");
  for (double s : sample_times) {
    if (!(s >= 0.0 && s <= T)) throw ConfigError("sample time " + std::to_string(s) + " outside [0, T]");
  }
  if (meshes.levels.empty() && meshes.frequencies.empty() && meshes.target_h.empty()) {
    throw ConfigError("no meshes selected");
  }
  for (int l : meshes.levels) {
    if (l < 0 || l > 10) throw ConfigError("icosphere level must be in 0..10");
  }
  for (int f : meshes.frequencies) {
    if (f < 1 || f > 64) throw ConfigError("geodesic frequency must be in 1..64");
  }
  for (double h : meshes.target_h) {
    if (!(h > 0.02)) throw ConfigError("target h must exceed 0.02");
  }
  if (vtk_subdivision < 1) throw ConfigError("vtk_subdivision must be >= 1");
  if (quad_degree > 30) throw ConfigError("quad_degree must be <= 30");
  if (ricci.intervals < 16) throw ConfigError("ricci.intervals must be >= 16");
  if (!(ricci.snapshot_dt > 0.0)) throw ConfigError("ricci.snapshot_dt must be positive");
}

namespace {

template <class T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for '" + key + "': " + e.what());
  }
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

}  // namespace

FlowConfig config_from_json(const json& j) {
  check_keys(j,
             {"experiment", "k", "kg", "mesh_levels", "frequencies", "target_h", "tau", "T", "sample_times", "out_dir",
              "export_vtk", "vtk_subdivision", "dump_matrices", "quad_degree", "startup", "rate",
              "conformal_amplitude", "ricci"},
             "config");
  FlowConfig c;
  if (j.contains("experiment")) c.experiment = experiment_from_string(get_as<std::string>(j["experiment"], "experiment"));
  if (j.contains("k")) c.k = get_as<int>(j["k"], "k");
  c.kg = j.contains("kg") ? get_as<int>(j["kg"], "kg") : c.k;
  const bool any_mesh = j.contains("mesh_levels") || j.contains("frequencies") || j.contains("target_h");
  if (any_mesh) c.meshes = {};
  if (j.contains("mesh_levels")) c.meshes.levels = get_as<std::vector<int>>(j["mesh_levels"], "mesh_levels");
  if (j.contains("frequencies")) c.meshes.frequencies = get_as<std::vector<int>>(j["frequencies"], "frequencies");
  if (j.contains("target_h")) c.meshes.target_h = get_as<std::vector<double>>(j["target_h"], "target_h");
  if (j.contains("tau")) c.tau = get_as<double>(j["tau"], "tau");
  if (j.contains("T")) c.T = get_as<double>(j["T"], "T");
  if (j.contains("sample_times")) c.sample_times = get_as<std::vector<double>>(j["sample_times"], "sample_times");
  if (j.contains("out_dir")) c.out_dir = get_as<std::string>(j["out_dir"], "out_dir");
  if (j.contains("export_vtk")) c.export_vtk = get_as<bool>(j["export_vtk"], "export_vtk");
  if (j.contains("vtk_subdivision")) c.vtk_subdivision = get_as<int>(j["vtk_subdivision"], "vtk_subdivision");
  if (j.contains("dump_matrices")) c.dump_matrices = get_as<bool>(j["dump_matrices"], "dump_matrices");
  if (j.contains("quad_degree")) c.quad_degree = get_as<int>(j["quad_degree"], "quad_degree");
  if (j.contains("startup")) {
    const auto s = get_as<std::string>(j["startup"], "startup");
    if (s == "bdf") c.startup = Startup::Bdf;
    else if (s == "rk3") c.startup = Startup::Rk3;
    else throw ConfigError("startup must be 'bdf' or 'rk3'");
  }
  if (j.contains("rate")) {
    const auto s = get_as<std::string>(j["rate"], "rate");
    if (s == "regge") c.rate = RateMode::Regge;
    else if (s == "analytic") c.rate = RateMode::Analytic;
    else throw ConfigError("rate must be 'regge' or 'analytic'");
  }
  if (j.contains("conformal_amplitude")) c.conformal_amplitude = get_as<double>(j["conformal_amplitude"], "conformal_amplitude");
  if (j.contains("ricci")) {
    const json& r = j["ricci"];
    check_keys(r, {"intervals", "tau", "snapshot_dt"}, "ricci");
    if (r.contains("intervals")) c.ricci.intervals = get_as<int>(r["intervals"], "ricci.intervals");
    if (r.contains("tau")) c.ricci.tau = get_as<double>(r["tau"], "ricci.tau");
    if (r.contains("snapshot_dt")) c.ricci.snapshot_dt = get_as<double>(r["snapshot_dt"], "ricci.snapshot_dt");
  }
  c.validate();
  return c;
}

json config_to_json(const FlowConfig& c) {
  json j;
  j["experiment"] = to_string(c.experiment);
  j["k"] = c.k;
  j["kg"] = c.kg;
  if (!c.meshes.levels.empty()) j["mesh_levels"] = c.meshes.levels;
  if (!c.meshes.frequencies.empty()) j["frequencies"] = c.meshes.frequencies;
  if (!c.meshes.target_h.empty()) j["target_h"] = c.meshes.target_h;
  j["tau"] = c.tau;
  j["T"] = c.T;
  j["sample_times"] = c.sample_times;
  j["out_dir"] = c.out_dir;
  j["export_vtk"] = c.export_vtk;
  j["vtk_subdivision"] = c.vtk_subdivision;
  j["dump_matrices"] = c.dump_matrices;
  j["quad_degree"] = c.quad_degree;
  j["startup"] = c.startup == Startup::Bdf ? "bdf" : "rk3";
  j["rate"] = c.rate == RateMode::Regge ? "regge" : "analytic";
  j["conformal_amplitude"] = c.conformal_amplitude;
  j["ricci"] = {{"intervals", c.ricci.intervals}, {"tau", c.ricci.tau}, {"snapshot_dt", c.ricci.snapshot_dt}};
  return j;
}

FlowConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return config_from_json(j);
}

std::shared_ptr<const MetricSource> make_source(const FlowConfig& cfg) {
  switch (cfg.experiment) {
    case Experiment::Ellipsoid: return std::make_shared<const MetricSource>(ellipsoid_flow());
    case Experiment::Revolution: return std::make_shared<const MetricSource>(revolution_flow());
    case Experiment::Conformal: {
      auto sphere = std::make_shared<const ReferenceManifold>(ReferenceManifold::sphere(1.0));
      const double a = cfg.conformal_amplitude;
      return std::make_shared<const MetricSource>(
          conformal_path(sphere, [a](const Vec3& q) { return a * q[2]; }, std::max(cfg.T, 1.0)));
    }
    case Experiment::Ricci: {
      const AxisymProfile p0 = sample_profile(ricci_example_curve(), cfg.ricci.intervals);
      auto traj = ricci_axisym_run(p0, cfg.ricci.tau, cfg.T, cfg.ricci.snapshot_dt);
      return std::make_shared<const MetricSource>(
          ricci_source(traj, ricci_example_embedding(), ricci_example_jacobian()));
    }
  }
  throw ConfigError("unknown experiment");
}

std::vector<std::shared_ptr<const SurfaceMesh>> build_meshes(const MeshSelection& sel, const ReferenceManifold& m) {
  std::vector<std::shared_ptr<const SurfaceMesh>> out;
  if (!sel.levels.empty()) {
    for (int l : sel.levels) out.push_back(std::make_shared<const SurfaceMesh>(place_on_manifold(build_icosphere(l), m)));
    return out;
  }
  if (!sel.frequencies.empty()) {
    for (int f : sel.frequencies) {
      out.push_back(std::make_shared<const SurfaceMesh>(place_on_manifold(build_geodesic_sphere(f), m)));
    }
    return out;
  }
  for (double target : sel.target_h) {
    for (int f = 1;; ++f) {
      if (f > 64) throw ConfigError("no geodesic sphere reaches h <= " + std::to_string(target));
      auto mesh = std::make_shared<const SurfaceMesh>(place_on_manifold(build_geodesic_sphere(f), m));
      if (mesh_size(*mesh) <= target) {
        out.push_back(std::move(mesh));
        break;
      }
    }
  }
  return out;
}

Trajectory run_flow(const FlowProblem& problem, double tau, double T, const std::vector<double>& sample_times) {
  Trajectory tr;
  std::vector<double> wanted = sample_times.empty() ? std::vector<double>{T} : sample_times;
  std::sort(wanted.begin(), wanted.end());
  std::vector<int> wanted_steps;
  for (double s : wanted) wanted_steps.push_back(static_cast<int>(std::lround(s / tau)));
  std::size_t next = 0;
  auto record = [&](const FlowState& s) {
    while (next < wanted_steps.size() && wanted_steps[next] <= s.index()) {
      if (wanted_steps[next] == s.index()) {
        tr.times.push_back(s.time());
        tr.states.push_back(s.current());
      }
      ++next;
    }
  };
  std::optional<FlowState> state;
  try {
    if (T <= 0.0) {
      const FlowState check(problem, tau);
      tr.times.push_back(0.0);
      tr.states.push_back(interpolate_embedding(problem, 0.0));
      return tr;
    }
    state.emplace(initialize(problem, tau));
    // r⁰ and r¹ are still in the history after startup.
    for (int j = state->history_size() - 1; j >= 1; --j) {
      const int step = state->index() - j;
      while (next < wanted_steps.size() && wanted_steps[next] <= step) {
        if (wanted_steps[next] == step) {
          tr.times.push_back(step * tau);
          tr.states.push_back(state->history(j));
        }
        ++next;
      }
    }
    record(*state);
    run_until(*state, T, record);
  } catch (const Error& e) {
    tr.failed = true;
    tr.failure = e.what();
  }
  if (state) tr.diagnostics = state->diagnostics();
  return tr;
}

std::optional<double> ErrorReport::eoc(std::size_t i, double ErrorRow::*err) const {
  if (i == 0 || i >= rows.size()) return std::nullopt;
  const ErrorRow& a = rows[i - 1];
  const ErrorRow& b = rows[i];
  if (a.status != "ok" || b.status != "ok") return std::nullopt;
  if (!(a.*err > 0.0) || !(b.*err > 0.0) || a.h == b.h) return std::nullopt;
  return std::log(a.*err / b.*err) / std::log(a.h / b.h);
}

void ErrorReport::write_csv(std::ostream& out) const {
  out << "h,dofs,l2_err,d_err,graph_err,isometry_res,max_lambda,eoc_l2,eoc_d,eoc_graph,status\n";
  out << std::setprecision(17);
  auto opt = [&](std::optional<double> v) {
    if (v) out << *v;
  };
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const ErrorRow& r = rows[i];
    out << r.h << ',' << r.dofs << ',' << r.l2_err << ',' << r.d_err << ',' << r.graph_err << ',' << r.isometry_res
        << ',' << r.max_lambda << ',';
    opt(eoc(i, &ErrorRow::l2_err));
    out << ',';
    opt(eoc(i, &ErrorRow::d_err));
    out << ',';
    opt(eoc(i, &ErrorRow::graph_err));
    out << ',' << r.status << '\n';
  }
}

void ErrorReport::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path);
  write_csv(out);
  if (!out) throw IoError("write failed: " + path);
}

namespace {

StepperOptions stepper_options(const FlowConfig& cfg, const std::string& dump_prefix) {
  StepperOptions o;
  o.startup = cfg.startup;
  o.rate = cfg.rate;
  o.track_isometry = true;
  if (cfg.dump_matrices && !dump_prefix.empty()) o.dump_prefix = dump_prefix;
  return o;
}

void ensure_dir(const std::string& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
}

std::string status_of(const std::string& what) {
  std::string s = what.substr(0, what.find(':'));
  return "failed:" + s;
}

}  // namespace

ErrorReport run_convergence(const FlowConfig& cfg, const std::vector<std::shared_ptr<const SurfaceMesh>>& meshes) {
  cfg.validate();
  auto source = make_source(cfg);
  if (!source->has_embedding()) throw ConfigError("experiment '" + source->name() + "' has no exact embedding");
  ensure_dir(cfg.out_dir);
  ErrorReport report;
  report.theory_regime = cfg.theory_regime();
  for (std::size_t m = 0; m < meshes.size(); ++m) {
    ErrorRow row;
    row.h = mesh_size(*meshes[m]);
    const std::string tag = cfg.out_dir.empty() ? "" : cfg.out_dir + "/mesh" + std::to_string(m);
    try {
      FlowProblem p = make_flow_problem(source, meshes[m], cfg.k, cfg.kg, cfg.quad_degree, stepper_options(cfg, tag));
      row.dofs = 3 * p.space->dim();
      const Trajectory tr = run_flow(p, cfg.tau, cfg.T, {cfg.T});
      for (const auto& d : tr.diagnostics) row.max_lambda = std::max(row.max_lambda, d.lambda_norm);
      if (!tr.diagnostics.empty()) row.isometry_res = tr.diagnostics.back().isometry_res;
      if (!cfg.out_dir.empty()) write_diagnostics_csv(tr.diagnostics, tag + "_diagnostics.csv");
      if (tr.failed || tr.states.empty()) {
        row.status = status_of(tr.failed ? tr.failure : "NoState: missing final state");
      } else {
        const FeField rstar = interpolate_embedding(p, tr.times.back());
        const FeField e = tr.states.back() - rstar;
        row.l2_err = l2_norm(e, *p.ctx);
        row.d_err = d_norm(rstar, e, *p.ctx);
        row.graph_err = std::sqrt(row.l2_err * row.l2_err + row.d_err * row.d_err);
      }
    } catch (const Error& e) {
      row.status = status_of(e.what());
    }
    report.rows.push_back(row);
  }
  if (!cfg.out_dir.empty()) report.write_csv(cfg.out_dir + "/convergence.csv");
  return report;
}

double isometry_density(const FeField& r, const DiscreteMetric& g, Index tri, const Vec3& bary) {
  const FieldSample s = eval_with_gradient(r, tri, bary);
  const Mat32 grad = s.gradient;
  const Sym2 gt = g.eval(tri, bary);
  const Sym2 diff = pullback(grad) - gt;
  const Mat2 ginv = gt.inverse();
  const Mat2 a = ginv * diff;
  return std::sqrt(std::max(0.0, (a * a).trace()));
}

EmbeddingResult run_embedding(const FlowConfig& cfg) {
  cfg.validate();
  auto source = make_source(cfg);
  const auto meshes = build_meshes(cfg.meshes, *source->manifold());
  ensure_dir(cfg.out_dir);
  const std::string stem = cfg.out_dir.empty() ? "" : cfg.out_dir + "/" + to_string(cfg.experiment);
  FlowProblem p = make_flow_problem(source, meshes.front(), cfg.k, cfg.kg, cfg.quad_degree, stepper_options(cfg, stem));
  EmbeddingResult out;
  out.trajectory = run_flow(p, cfg.tau, cfg.T, cfg.sample_times);
  if (cfg.out_dir.empty()) return out;
  write_diagnostics_csv(out.trajectory.diagnostics, stem + "_diagnostics.csv");
  if (!cfg.export_vtk) return out;
  const ReferenceManifold& man = *source->manifold();
  const SurfaceMesh& mesh = *meshes.front();
  for (std::size_t i = 0; i < out.trajectory.states.size(); ++i) {
    const double t = out.trajectory.times[i];
    const DiscreteMetric g = p.metric_at(t);
    const FeField& r = out.trajectory.states[i];
    std::vector<std::pair<std::string, PointScalarFn>> data;
    data.emplace_back("isometry_residual",
                      [&r, &g](Index tri, const Vec3& bary) { return isometry_density(r, g, tri, bary); });
    if (source->has_curvature()) {
      data.emplace_back("curvature", [&, t](Index tri, const Vec3& bary) {
        return source->curvature(t, man.closest_point(mesh.point(tri, bary)));
      });
    }
    std::ostringstream name;
    name << stem << '_' << std::setw(4) << std::setfill('0') << i << ".vtk";
    export_vtk(r, name.str(), cfg.vtk_subdivision, data);
    out.files.push_back(name.str());
  }
  return out;
}

void export_vtk(const FeField& field, const std::string& path, int subdivision,
                const std::vector<std::pair<std::string, PointScalarFn>>& point_data) {
  if (field.components() != 3) throw MeshMismatch("export_vtk needs a 3-component field");
  if (subdivision < 1) throw ConfigError("subdivision must be >= 1");
  const SurfaceMesh& mesh = field.space().mesh();
  const int s = subdivision;
  const int per = (s + 1) * (s + 2) / 2;
  const Index nf = mesh.num_triangles();
  // Local lattice point (i, j), i + j <= s, at ξ = (i/s, j/s).
  std::vector<Vec3> bary;
  std::vector<std::vector<int>> id(s + 1, std::vector<int>(s + 1, -1));
  for (int j = 0; j <= s; ++j) {
    for (int i = 0; i + j <= s; ++i) {
      id[i][j] = static_cast<int>(bary.size());
      const double x = static_cast<double>(i) / s, y = static_cast<double>(j) / s;
      bary.emplace_back(1.0 - x - y, x, y);
    }
  }
  std::vector<std::array<int, 3>> cells;
  for (int j = 0; j < s; ++j) {
    for (int i = 0; i + j < s; ++i) {
      cells.push_back({id[i][j], id[i + 1][j], id[i][j + 1]});
      if (i + j + 1 < s) cells.push_back({id[i + 1][j], id[i + 1][j + 1], id[i][j + 1]});
    }
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path);
  out << "# vtk DataFile Version 3.0\nisoemb surface\nASCII\nDATASET POLYDATA\n";
  out << "POINTS " << nf * per << " double\n" << std::setprecision(17);
  VecX values;
  for (Index t = 0; t < nf; ++t) {
    const auto dofs = field.space().element_dofs(t);
    for (const Vec3& b : bary) {
      field.space().shape(b, values, nullptr);
      Vec3 x = Vec3::Zero();
      for (std::size_t a = 0; a < dofs.size(); ++a) x += values[a] * field.node_vector(dofs[a]);
      out << x[0] << ' ' << x[1] << ' ' << x[2] << '\n';
    }
  }
  const Index ncell = nf * static_cast<Index>(cells.size());
  out << "POLYGONS " << ncell << ' ' << 4 * ncell << '\n';
  for (Index t = 0; t < nf; ++t) {
    const Index base = t * per;
    for (const auto& c : cells) out << "3 " << base + c[0] << ' ' << base + c[1] << ' ' << base + c[2] << '\n';
  }
  if (!point_data.empty()) {
    out << "POINT_DATA " << nf * per << '\n';
    for (const auto& [name, fn] : point_data) {
      out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (Index t = 0; t < nf; ++t) {
        for (const Vec3& b : bary) out << fn(t, b) << '\n';
      }
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

std::vector<Vec3> read_vtk_points(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string word;
  while (in >> word) {
    if (word == "POINTS") {
      Index n = 0;
      std::string type;
      in >> n >> type;
      std::vector<Vec3> pts(n);
      for (Index i = 0; i < n; ++i) {
        if (!(in >> pts[i][0] >> pts[i][1] >> pts[i][2])) throw IoError("truncated POINTS in " + path);
      }
      return pts;
    }
  }
  throw IoError("no POINTS section in " + path);
}

}  // namespace isoemb
