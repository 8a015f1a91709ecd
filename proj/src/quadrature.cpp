#include "isoemb/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <map>
#include <mutex>

namespace isoemb {
namespace {

// Jacobi weight (1-x)^alpha (1+x)^beta on [-1, 1], integers only.
struct JacobiRecurrence {
  int alpha;
  int beta;

  double a(int k) const {
    const double ab = alpha + beta;
    if (k == 0) return double(beta - alpha) / (ab + 2.0);
    const double s = 2.0 * k + ab;
    return double(beta * beta - alpha * alpha) / (s * (s + 2.0));
  }
  // Off-diagonal b_k, k >= 1.
  double b(int k) const {
    const double ab = alpha + beta;
    const double s = 2.0 * k + ab;
    const double num = 4.0 * k * (k + alpha) * (k + beta) * (k + ab);
    const double den = s * s * (s + 1.0) * (s - 1.0);
    return std::sqrt(num / den);
  }
  double mu0() const {
    // 2^(a+b+1) a! b! / (a+b+1)!
    double f = std::pow(2.0, alpha + beta + 1);
    for (int i = 2; i <= alpha; ++i) f *= i;
    for (int i = 2; i <= beta; ++i) f *= i;
    for (int i = 2; i <= alpha + beta + 1; ++i) f /= i;
    return f;
  }
};

// Orthonormal polynomial values q_0..q_n at x, plus q_n'.
void orthonormal_values(const JacobiRecurrence& rec, int n, double x, std::vector<double>& q,
                        double& dqn) {
  q.assign(n + 1, 0.0);
  std::vector<double> dq(n + 1, 0.0);
  q[0] = 1.0 / std::sqrt(rec.mu0());
  if (n >= 1) {
    q[1] = (x - rec.a(0)) * q[0] / rec.b(1);
    dq[1] = q[0] / rec.b(1);
  }
  for (int k = 1; k < n; ++k) {
    q[k + 1] = ((x - rec.a(k)) * q[k] - rec.b(k) * q[k - 1]) / rec.b(k + 1);
    dq[k + 1] = (q[k] + (x - rec.a(k)) * dq[k] - rec.b(k) * dq[k - 1]) / rec.b(k + 1);
  }
  dqn = dq[n];
}

// Golub-Welsch nodes, Newton-polished, Christoffel weights. Result on [-1, 1].
void gauss_jacobi(int n, int alpha, int beta, std::vector<double>& x, std::vector<double>& w) {
  JacobiRecurrence rec{alpha, beta};
  Eigen::MatrixXd jm = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    jm(k, k) = rec.a(k);
    if (k + 1 < n) {
      jm(k, k + 1) = rec.b(k + 1);
      jm(k + 1, k) = rec.b(k + 1);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jm);
  x.resize(n);
  w.resize(n);
  std::vector<double> q;
  for (int i = 0; i < n; ++i) {
    double xi = es.eigenvalues()(i);
    for (int it = 0; it < 5; ++it) {
      double dqn = 0.0;
      orthonormal_values(rec, n, xi, q, dqn);
      const double step = q[n] / dqn;
      xi -= step;
      if (std::abs(step) < 1e-17) break;
    }
    double dqn = 0.0;
    orthonormal_values(rec, n - 1, xi, q, dqn);
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += q[k] * q[k];
    x[i] = xi;
    w[i] = 1.0 / s;
  }
}

QuadratureRule make_triangle_rule(int degree) {
  QuadratureRule rule;
  rule.degree = degree;
  if (degree <= 1) {
    rule.points.push_back(Vec3(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0));
    rule.weights.push_back(0.5);
    return rule;
  }
  const int n = (degree + 2) / 2;  // ceil((degree + 1) / 2)
  std::vector<double> xa, wa, xb, wb;
  gauss_jacobi(n, 1, 0, xa, wa);
  gauss_jacobi(n, 0, 0, xb, wb);
  for (int i = 0; i < n; ++i) {
    // (1-x) weight on [-1,1] -> (1-a) on [0,1]: factor 1/4.
    const double a = 0.5 * (xa[i] + 1.0);
    const double wai = 0.25 * wa[i];
    for (int j = 0; j < n; ++j) {
      const double b = 0.5 * (xb[j] + 1.0);
      const double xi1 = a;
      const double xi2 = (1.0 - a) * b;
      rule.points.push_back(Vec3(1.0 - xi1 - xi2, xi1, xi2));
      rule.weights.push_back(wai * 0.5 * wb[j]);
    }
  }
  return rule;
}

LineRule make_line_rule(int n) {
  LineRule rule;
  std::vector<double> x, w;
  gauss_jacobi(n, 0, 0, x, w);
  for (int i = 0; i < n; ++i) {
    rule.points.push_back(0.5 * (x[i] + 1.0));
    rule.weights.push_back(0.5 * w[i]);
  }
  return rule;
}

std::mutex& cache_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

const QuadratureRule& quadrature_rule(int degree) {
  if (degree < 0 || degree > kMaxQuadratureDegree) {
    throw UnsupportedDegree("triangle quadrature degree " + std::to_string(degree));
  }
  static std::map<int, QuadratureRule> cache;
  std::lock_guard lock(cache_mutex());
  auto it = cache.find(degree);
  if (it == cache.end()) it = cache.emplace(degree, make_triangle_rule(degree)).first;
  return it->second;
}

const LineRule& gauss_legendre(int n) {
  if (n < 1 || n > 64) throw UnsupportedDegree("Gauss-Legendre points " + std::to_string(n));
  static std::map<int, LineRule> cache;
  std::lock_guard lock(cache_mutex());
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_line_rule(n)).first;
  return it->second;
}

double legendre(int n, double x) {
  if (n == 0) return 1.0;
  double p0 = 1.0, p1 = x;
  for (int k = 1; k < n; ++k) {
    const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

}  // namespace isoemb
