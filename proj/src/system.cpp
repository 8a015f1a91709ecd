#include "isoemb/system.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>

namespace isoemb {
namespace {

MatX local_vector_coefficients(const FeField& f, Index tri) {
  const auto dofs = f.space().element_dofs(tri);
  MatX c(dofs.size(), 3);
  for (std::size_t a = 0; a < dofs.size(); ++a) c.row(a) = f.coefficients().segment<3>(3 * dofs[a]).transpose();
  return c;
}

void check_field(const FeField& r, const MetricContext& ctx) {
  if (r.components() != 3) throw MeshMismatch("reference field must have 3 components");
  ctx.require_mesh(r.space().mesh());
}

// D-vectors (S11, S22, S12) of D_r(φ_a e_c) for all local (a, c) at point q.
void d_operator(const Mat32& R, const LagrangeTabulation& tab, int q, int nloc, MatX& Bq) {
  Bq.resize(3, 3 * nloc);
  for (int a = 0; a < nloc; ++a) {
    const double g1 = tab.d1(q, a), g2 = tab.d2(q, a);
    for (int c = 0; c < 3; ++c) {
      Bq(0, 3 * a + c) = R(c, 0) * g1;
      Bq(1, 3 * a + c) = R(c, 1) * g2;
      Bq(2, 3 * a + c) = 0.5 * (R(c, 0) * g2 + R(c, 1) * g1);
    }
  }
}

void check_reference(const Mat32& R, Index tri) {
  const Mat2 G = R.transpose() * R;
  const double tr = G.trace();
  if (!(G.determinant() > 1e-12 * tr * tr)) {
    throw DegenerateReference("reference field has rank-deficient gradient on triangle " + std::to_string(tri));
  }
}

MatX rigid_columns(const FeField& r) {
  const auto basis = rigid_motion_basis(r);
  MatX u(r.coefficients().size(), 6);
  for (int i = 0; i < 6; ++i) u.col(i) = basis[i].coefficients();
  return u;
}

SaddleSystem assemble_impl(const FeField& r_ref, const PointTensorFn* g_dot, const MetricContext& ctx, double time) {
  check_field(r_ref, ctx);
  const LagrangeSpace& sp = r_ref.space();
  const LagrangeTabulation& tab = sp.tabulate(ctx.rule());
  const int nloc = sp.local_size();
  const Index n = 3 * sp.dim();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(ctx.mesh().num_triangles()) * 9 * nloc * nloc);
  VecX f = VecX::Zero(n);
  MatX Bq, Ak(3 * nloc, 3 * nloc);
  VecX fk(3 * nloc);
  for (Index t = 0; t < ctx.mesh().num_triangles(); ++t) {
    const MatX c = local_vector_coefficients(r_ref, t);
    Ak.setZero();
    fk.setZero();
    for (int q = 0; q < ctx.points_per_element(); ++q) {
      Mat32 R;
      R.col(0) = (tab.d1.row(q) * c).transpose();
      R.col(1) = (tab.d2.row(q) * c).transpose();
      check_reference(R, t);
      d_operator(R, tab, q, nloc, Bq);
      const double vol = ctx.volume(t, q);
      const Mat3& W = ctx.product_weight(t, q);
      const MatX WB = W * Bq;
      Ak.noalias() += (2.0 * vol) * Bq.transpose() * WB;
      if (g_dot) fk.noalias() += vol * WB.transpose() * sym_vec((*g_dot)(t, q));
    }
    const auto dofs = sp.element_dofs(t);
    for (int a = 0; a < nloc; ++a) {
      for (int ca = 0; ca < 3; ++ca) {
        const Index ia = 3 * dofs[a] + ca;
        f[ia] += fk[3 * a + ca];
        for (int b = 0; b < nloc; ++b) {
          for (int cb = 0; cb < 3; ++cb) trip.emplace_back(ia, 3 * dofs[b] + cb, Ak(3 * a + ca, 3 * b + cb));
        }
      }
    }
  }
  SaddleSystem sys;
  sys.space = r_ref.space_ptr();
  sys.A.resize(n, n);
  sys.A.setFromTriplets(trip.begin(), trip.end());
  sys.A.makeCompressed();
  sys.f = std::move(f);
  sys.mass = vector_mass_matrix(sp, ctx);
  sys.rigid = rigid_columns(r_ref);
  sys.B = (sys.mass * sys.rigid).transpose();
  sys.time = time;
  sys.ctx_version = ctx.version();
  return sys;
}

// A is singular exactly on the rigid motions U of r̂, which B = (MU)ᵀ controls.
// λ = G⁻¹Uᵀf with G = UᵀMU makes the rhs consistent; the singular system is
// solved with six well-conditioned coefficients pinned to zero and the result
// is then M-projected off span U.
class PinnedSolver {
 public:
  explicit PinnedSolver(const SaddleSystem& sys) : sys_(&sys), n_(sys.A.rows()) {
    if (n_ <= 6) throw SingularSystem("system too small for six constraints");
    const Eigen::ColPivHouseholderQR<MatX> qr(sys.rigid.transpose());
    if (qr.rank() < 6) throw SingularSystem("rigid-motion columns are rank deficient");
    std::vector<char> pinned(n_, 0);
    for (int i = 0; i < 6; ++i) pinned[qr.colsPermutation().indices()[i]] = 1;
    keep_.reserve(n_ - 6);
    std::vector<Index> pos(n_, -1);
    for (Index i = 0; i < n_; ++i) {
      if (!pinned[i]) {
        pos[i] = static_cast<Index>(keep_.size());
        keep_.push_back(i);
      }
    }
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(sys.A.nonZeros());
    for (int k = 0; k < sys.A.outerSize(); ++k) {
      for (SparseMat::InnerIterator it(sys.A, k); it; ++it) {
        const Index r = pos[it.row()], c = pos[it.col()];
        if (r >= 0 && c >= 0 && r >= c) trip.emplace_back(r, c, it.value());
      }
    }
    SparseMat a(n_ - 6, n_ - 6);
    a.setFromTriplets(trip.begin(), trip.end());
    ldlt_.compute(a);
    if (ldlt_.info() != Eigen::Success) throw SingularSystem("factorization of the reduced operator failed");
    const VecX& d = ldlt_.vectorD();
    const double dmax = d.cwiseAbs().maxCoeff();
    if (!(d.minCoeff() > 1e-13 * dmax)) throw SingularSystem("linearized isometry operator has a kernel beyond rigid motions");
    gram_ = sys.B * sys.rigid;
    gram_ = 0.5 * (gram_ + gram_.transpose()).eval();
    gram_ldlt_.compute(gram_);
    if (gram_ldlt_.info() != Eigen::Success) throw GramSingular("rigid-motion Gram matrix is singular");
  }

  /// Solves Av + Bᵀλ = rhs, Bv = 0.
  VecX solve(const VecX& rhs, Vec6* lambda = nullptr) const {
    const MatX& u = sys_->rigid;
    const Vec6 lam = gram_ldlt_.solve(u.transpose() * rhs);
    const VecX y = rhs - sys_->B.transpose() * lam;
    VecX yr(n_ - 6);
    for (std::size_t i = 0; i < keep_.size(); ++i) yr[i] = y[keep_[i]];
    const VecX wr = ldlt_.solve(yr);
    VecX w = VecX::Zero(n_);
    for (std::size_t i = 0; i < keep_.size(); ++i) w[keep_[i]] = wr[i];
    w -= u * gram_ldlt_.solve(sys_->B * w);
    if (!w.allFinite()) throw SingularSystem("velocity solve produced non-finite values");
    if (lambda) *lambda = lam;
    return w;
  }

 private:
  const SaddleSystem* sys_;
  Index n_;
  std::vector<Index> keep_;
  Eigen::SimplicialLDLT<SparseMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
  Eigen::Matrix<double, 6, 6> gram_;
  Eigen::LDLT<Eigen::Matrix<double, 6, 6>> gram_ldlt_;
};

}  // namespace

SparseMat scalar_mass_matrix(const LagrangeSpace& sp, const MetricContext& ctx) {
  ctx.require_mesh(sp.mesh());
  const LagrangeTabulation& tab = sp.tabulate(ctx.rule());
  const int nloc = sp.local_size();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(ctx.mesh().num_triangles()) * nloc * nloc);
  MatX Mk(nloc, nloc);
  for (Index t = 0; t < ctx.mesh().num_triangles(); ++t) {
    Mk.setZero();
    for (int q = 0; q < ctx.points_per_element(); ++q) {
      Mk.noalias() += ctx.volume(t, q) * tab.value.row(q).transpose() * tab.value.row(q);
    }
    const auto dofs = sp.element_dofs(t);
    for (int a = 0; a < nloc; ++a) {
      for (int b = 0; b < nloc; ++b) trip.emplace_back(dofs[a], dofs[b], Mk(a, b));
    }
  }
  SparseMat m(sp.dim(), sp.dim());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

SparseMat vector_mass_matrix(const LagrangeSpace& sp, const MetricContext& ctx) {
  const SparseMat s = scalar_mass_matrix(sp, ctx);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(3 * s.nonZeros());
  for (int k = 0; k < s.outerSize(); ++k) {
    for (SparseMat::InnerIterator it(s, k); it; ++it) {
      for (int c = 0; c < 3; ++c) trip.emplace_back(3 * it.row() + c, 3 * it.col() + c, it.value());
    }
  }
  SparseMat m(3 * sp.dim(), 3 * sp.dim());
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  return m;
}

SparseMat assemble_stiffness(const FeField& r_ref, const MetricContext& ctx) {
  return assemble_impl(r_ref, nullptr, ctx, 0.0).A;
}

SaddleSystem assemble_saddle(const FeField& r_ref, const ChartTensorFn& g_dot, const MetricContext& ctx,
                             double time) {
  const auto& pts = ctx.rule().points;
  const PointTensorFn fn = [&](Index t, int q) { return g_dot(t, pts[q]); };
  return assemble_impl(r_ref, &fn, ctx, time);
}

SaddleSystem assemble_saddle(const FeField& r_ref, const DiscreteMetric& g_dot, const MetricContext& ctx,
                             double time) {
  ctx.require_mesh(g_dot.space().mesh());
  const std::vector<Sym2> vals = tabulate_metric(g_dot, ctx.rule());
  const std::size_t nq = ctx.rule().size();
  const PointTensorFn fn = [&](Index t, int q) { return vals[t * nq + q]; };
  return assemble_impl(r_ref, &fn, ctx, time);
}

SparseMat bordered_matrix(const SaddleSystem& sys) {
  const Index n = sys.A.rows();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(sys.A.nonZeros() + 12 * n);
  for (int k = 0; k < sys.A.outerSize(); ++k) {
    for (SparseMat::InnerIterator it(sys.A, k); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
  }
  for (Index j = 0; j < n; ++j) {
    for (int i = 0; i < 6; ++i) {
      const double b = sys.B(i, j);
      if (b == 0.0) continue;
      trip.emplace_back(n + i, j, b);
      trip.emplace_back(j, n + i, b);
    }
  }
  SparseMat k(n + 6, n + 6);
  k.setFromTriplets(trip.begin(), trip.end());
  k.makeCompressed();
  return k;
}

VelocitySolution solve_saddle(const SaddleSystem& sys) {
  const Index n = sys.A.rows();
  if (sys.f.size() != n) throw MeshMismatch("right-hand side size mismatch");
  const PinnedSolver solver(sys);
  Vec6 lambda;
  VecX v = solver.solve(sys.f, &lambda);
  const VecX res = sys.A * v + sys.B.transpose() * lambda - sys.f;
  VelocitySolution sol{FeField(sys.space, 3, v), lambda, res.norm(), (sys.B * v).norm()};
  return sol;
}

FeField project_rm(const FeField& v, const FeField& r_ref, const MetricContext& ctx) {
  check_field(r_ref, ctx);
  if (!v.same_space(r_ref)) throw MeshMismatch("projection needs fields on one space");
  const SparseMat m = vector_mass_matrix(r_ref.space(), ctx);
  const MatX u = rigid_columns(r_ref);
  const MatX mu = m * u;
  const Eigen::Matrix<double, 6, 6> gram = u.transpose() * mu;
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> es(gram);
  const auto& ev = es.eigenvalues();
  if (!(ev[0] > 1e-13 * ev[5])) throw GramSingular("rigid-motion Gram matrix is singular");
  const Vec6 coef = gram.ldlt().solve(mu.transpose() * v.coefficients());
  return FeField(v.space_ptr(), 3, u * coef);
}

KornResult korn_constant(const FeField& r_ref, const MetricContext& ctx, int max_iterations, double tolerance) {
  SaddleSystem sys = assemble_impl(r_ref, nullptr, ctx, 0.0);
  const Index n = sys.A.rows();
  const PinnedSolver solver(sys);
  const int p = static_cast<int>(std::min<Index>(12, n - 6));
  std::mt19937_64 rng(20240607);
  std::normal_distribution<double> normal;
  MatX x(n, p);
  for (Index i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) x(i, j) = normal(rng);
  }
  KornResult out;
  double prev = 0.0;
  for (int it = 1; it <= max_iterations; ++it) {
    MatX y(n, p);
    const MatX mx = sys.mass * x;
    for (int j = 0; j < p; ++j) {
      y.col(j) = solver.solve(mx.col(j));
    }
    // Rayleigh-Ritz on span(y), with an M-orthonormal basis first.
    const MatX my = sys.mass * y;
    MatX gm = y.transpose() * my;
    gm = 0.5 * (gm + gm.transpose()).eval();
    const Eigen::LLT<MatX> llt(gm);
    if (llt.info() != Eigen::Success) throw SingularSystem("Korn iteration lost rank");
    const MatX linv = llt.matrixL().solve(MatX::Identity(p, p));
    const MatX q = y * linv.transpose();
    MatX ga = q.transpose() * (sys.A * q);
    ga = 0.5 * (ga + ga.transpose()).eval();
    const Eigen::SelfAdjointEigenSolver<MatX> es(ga);
    x = q * es.eigenvectors();
    const double theta = es.eigenvalues()[0];
    out.iterations = it;
    out.eigenvalue = theta;
    if (it > 1 && std::abs(theta - prev) <= tolerance * std::abs(theta)) {
      out.converged = true;
      break;
    }
    prev = theta;
  }
  if (!(out.eigenvalue > 0.0)) throw SingularSystem("nonpositive constrained eigenvalue");
  out.constant = std::sqrt(0.5 * out.eigenvalue);
  return out;
}

void write_matrix_market(const SparseMat& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n' << std::setprecision(17);
  for (int k = 0; k < m.outerSize(); ++k) {
    for (SparseMat::InnerIterator it(m, k); it; ++it) out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

void dump_matrix_market(const SaddleSystem& sys, const std::string& prefix) {
  write_matrix_market(sys.A, prefix + "_A.mtx");
  write_matrix_market(sys.B.sparseView(), prefix + "_B.mtx");
  std::ofstream out(prefix + "_f.mtx");
  if (!out) throw IoError("cannot open " + prefix + "_f.mtx");
  out << "%%MatrixMarket matrix array real general\n" << sys.f.size() << " 1\n" << std::setprecision(17);
  for (Index i = 0; i < sys.f.size(); ++i) out << sys.f[i] << '\n';
}

}  // namespace isoemb
