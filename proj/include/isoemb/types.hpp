#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace isoemb {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat32 = Eigen::Matrix<double, 3, 2>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Symmetric 2x2 tensor in element chart coordinates.
using Sym2 = Eigen::Matrix2d;

using Index = std::int64_t;

/// Base of every error raised by the library. The `kind()` string names the
/// failure category (e.g. "SingularSystem") so drivers can report it verbatim.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define ISOEMB_DEFINE_ERROR(Name)                                      \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& what) : Error(#Name, what) {}     \
  };

ISOEMB_DEFINE_ERROR(InvalidMesh)
ISOEMB_DEFINE_ERROR(UnsupportedDegree)
ISOEMB_DEFINE_ERROR(ClosestPointDiverged)
ISOEMB_DEFINE_ERROR(SingularLocalSolve)
ISOEMB_DEFINE_ERROR(BoundaryEdge)
ISOEMB_DEFINE_ERROR(MeshMismatch)
ISOEMB_DEFINE_ERROR(DegenerateReference)
ISOEMB_DEFINE_ERROR(SingularSystem)
ISOEMB_DEFINE_ERROR(GramSingular)
ISOEMB_DEFINE_ERROR(InvalidStep)
ISOEMB_DEFINE_ERROR(OutOfInterval)
ISOEMB_DEFINE_ERROR(DegenerateProfile)
ISOEMB_DEFINE_ERROR(CurvatureNegative)
ISOEMB_DEFINE_ERROR(StepUnstable)
ISOEMB_DEFINE_ERROR(ConfigError)
ISOEMB_DEFINE_ERROR(IoError)

#undef ISOEMB_DEFINE_ERROR

/// Component-wise symmetric product of chart gradients:
/// (a ⊙ b)_ij = ½(a_i·b_j + a_j·b_i), columns are the chart partials.
inline Sym2 sym_product(const Mat32& a, const Mat32& b) {
  Sym2 s;
  s(0, 0) = a.col(0).dot(b.col(0));
  s(1, 1) = a.col(1).dot(b.col(1));
  s(0, 1) = 0.5 * (a.col(0).dot(b.col(1)) + a.col(1).dot(b.col(0)));
  s(1, 0) = s(0, 1);
  return s;
}

}  // namespace isoemb
