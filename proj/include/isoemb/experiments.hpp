#pragma once

#include "isoemb/sources.hpp"
#include "isoemb/stepper.hpp"

#include <json.hpp>

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace isoemb {

enum class Experiment { Ellipsoid, Revolution, Conformal, Ricci };

std::string to_string(Experiment e);
Experiment experiment_from_string(const std::string& s);

/// How meshes are chosen. Exactly one list is used, in this priority:
/// icosphere levels, geodesic frequencies, target mesh sizes. A target h picks
/// the coarsest geodesic sphere whose mesh_size on the manifold is <= h.
struct MeshSelection {
  std::vector<int> levels;
  std::vector<int> frequencies;
  std::vector<double> target_h;
};

struct RicciSettings {
  int intervals = 512;
  double tau = 0.0;  // <= 0: stability-limited step
  double snapshot_dt = 1e-3;
};

struct FlowConfig {
  Experiment experiment = Experiment::Ellipsoid;
  int k = 5;
  int kg = 5;
  MeshSelection meshes{{}, {}, {0.7, 0.5, 0.35}};
  double tau = 1e-3;
  double T = 0.1;
  std::vector<double> sample_times;  // empty: only T
  std::string out_dir;               // empty: write nothing
  bool export_vtk = false;
  int vtk_subdivision = 4;
  bool dump_matrices = false;
  int quad_degree = -1;
  Startup startup = Startup::Rk3;
  RateMode rate = RateMode::Regge;
  double conformal_amplitude = 0.5;  // λ(q) = amplitude · q_z
  RicciSettings ricci;

  /// k = k_g >= 5 is where the error analysis applies.
  bool theory_regime() const { return k == kg && k >= 5; }
  /// Throws ConfigError.
  void validate() const;
};

/// Unknown keys and ill-typed values raise ConfigError.
FlowConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const FlowConfig& cfg);
FlowConfig load_config(const std::string& path);

/// The metric source of an experiment (Ricci runs the 1D flow first).
std::shared_ptr<const MetricSource> make_source(const FlowConfig& cfg);

/// Meshes of the selection placed on the manifold, coarse to fine.
std::vector<std::shared_ptr<const SurfaceMesh>> build_meshes(const MeshSelection& sel, const ReferenceManifold& m);

/// Fields sampled along one flow.
struct Trajectory {
  std::vector<double> times;
  std::vector<FeField> states;
  std::vector<StepDiagnostics> diagnostics;
  bool failed = false;
  std::string failure;  // "Kind: message" of the aborting error
};

/// Runs from r⁰ to T and keeps the states at the step nearest each sample time.
/// A failing solve stops the run; the partial trajectory is returned marked.
Trajectory run_flow(const FlowProblem& problem, double tau, double T, const std::vector<double>& sample_times);

struct ErrorRow {
  double h = 0.0;
  Index dofs = 0;
  double l2_err = 0.0;
  double d_err = 0.0;
  double graph_err = 0.0;
  double isometry_res = 0.0;
  double max_lambda = 0.0;
  std::string status = "ok";
};

struct ErrorReport {
  std::vector<ErrorRow> rows;
  bool theory_regime = false;

  /// log(e_{i-1}/e_i) / log(h_{i-1}/h_i); empty when either row failed.
  std::optional<double> eoc(std::size_t i, double ErrorRow::*err) const;
  /// Columns: h,dofs,l2_err,d_err,graph_err,isometry_res,max_lambda,eoc_l2,eoc_d,eoc_graph,status
  void write_csv(std::ostream& out) const;
  void write_csv(const std::string& path) const;
};

/// One flow per mesh to T with errors against r_h* = I_h r(T).
/// Writes convergence.csv and per-mesh diagnostics when out_dir is set.
ErrorReport run_convergence(const FlowConfig& cfg, const std::vector<std::shared_ptr<const SurfaceMesh>>& meshes);

struct EmbeddingResult {
  Trajectory trajectory;
  std::vector<std::string> files;
};

/// Flow on the first selected mesh, VTK at each sample time when enabled.
EmbeddingResult run_embedding(const FlowConfig& cfg);

/// Per-point scalar on a triangle, evaluated at barycentric coordinates.
using PointScalarFn = std::function<double(Index tri, const Vec3& bary)>;

/// Legacy ASCII VTK POLYDATA of r_h: each triangle split into s² pieces on its
/// own (s+1)(s+2)/2 lattice points, no sharing between triangles.
void export_vtk(const FeField& field, const std::string& path, int subdivision,
                const std::vector<std::pair<std::string, PointScalarFn>>& point_data = {});

/// Points of a legacy VTK file written by export_vtk.
std::vector<Vec3> read_vtk_points(const std::string& path);

/// Pointwise |dr⊙dr − g|_g on a triangle.
double isometry_density(const FeField& r, const DiscreteMetric& g, Index tri, const Vec3& bary);

}  // namespace isoemb
