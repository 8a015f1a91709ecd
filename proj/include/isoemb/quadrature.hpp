#pragma once

#include "isoemb/types.hpp"

#include <vector>

namespace isoemb {

/// Quadrature on the reference triangle {ξ1, ξ2 >= 0, ξ1 + ξ2 <= 1}.
/// Points are barycentric (1-ξ1-ξ2, ξ1, ξ2); weights sum to 1/2.
struct QuadratureRule {
  int degree = 0;
  std::vector<Vec3> points;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
};

/// Gauss rule on [0, 1].
struct LineRule {
  std::vector<double> points;
  std::vector<double> weights;
  std::size_t size() const { return weights.size(); }
};

inline constexpr int kMaxQuadratureDegree = 30;

/// Rule exact for bivariate polynomials of total degree <= `degree`.
/// Degree <= 1 is the centroid rule; higher degrees use collapsed
/// Gauss-Jacobi products. Throws UnsupportedDegree above 30.
const QuadratureRule& quadrature_rule(int degree);

/// n-point Gauss-Legendre on [0, 1] (exact to degree 2n - 1).
const LineRule& gauss_legendre(int n);

/// Legendre polynomial P_n(x) on [-1, 1].
double legendre(int n, double x);

}  // namespace isoemb
