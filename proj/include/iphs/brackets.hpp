#pragma once

#include <cmath>
#include <string>
#include <utility>

#include "iphs/errors.hpp"
#include "iphs/linalg.hpp"

namespace iphs {

/// Tolerance for skew-symmetry of matrices produced by arithmetic rather than entered by hand.
inline constexpr double kComputedSkewTolerance = 1e-12;

/// True iff max |M + M^T| <= tol.
inline bool is_skew(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) {
    throw UsageError("is_skew: matrix is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                     ", expected square");
  }
  if (m.size() == 0) return true;
  return (m + m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

/// Constant skew-symmetric matrix defining the bracket {a, b}_J = a^T J b.
class StructureMatrix {
 public:
  explicit StructureMatrix(Matrix entries, double tol = 0.0) : entries_(std::move(entries)) {
    if (entries_.rows() == 0) throw UsageError("StructureMatrix: dimension must be positive");
    if (!entries_.allFinite()) throw NumericError("StructureMatrix: entries must be finite");
    if (!is_skew(entries_, tol)) throw UsageError("StructureMatrix: matrix is not skew-symmetric (is_skew failed)");
  }

  Eigen::Index n() const noexcept { return entries_.rows(); }
  const Matrix& entries() const noexcept { return entries_; }

  /// The 2x2 canonical symplectic matrix [[0, 1], [-1, 0]].
  static StructureMatrix symplectic2() {
    Matrix j(2, 2);
    j << 0.0, 1.0, -1.0, 0.0;
    return StructureMatrix(std::move(j));
  }

 private:
  Matrix entries_;
};

/// Constant n x m interconnection matrix between a system and its environment.
class PortMatrix {
 public:
  explicit PortMatrix(Matrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() == 0 || entries_.cols() == 0) throw UsageError("PortMatrix: dimensions must be positive");
    if (!entries_.allFinite()) throw NumericError("PortMatrix: entries must be finite");
  }

  Eigen::Index n() const noexcept { return entries_.rows(); }
  Eigen::Index m() const noexcept { return entries_.cols(); }
  const Matrix& entries() const noexcept { return entries_; }

 private:
  Matrix entries_;
};

inline double poisson_bracket(const StructureMatrix& j, const Vector& a, const Vector& b) {
  detail::require_size(a, j.n(), "poisson_bracket (left co-vector)");
  detail::require_size(b, j.n(), "poisson_bracket (right co-vector)");
  return a.dot(j.entries() * b);
}

/// Anti-diagonal structure [[0, g], [-g^T, 0]] on R^(n+m).
inline StructureMatrix port_structure(const PortMatrix& g) {
  const Eigen::Index n = g.n();
  const Eigen::Index m = g.m();
  Matrix block = Matrix::Zero(n + m, n + m);
  block.topRightCorner(n, m) = g.entries();
  block.bottomLeftCorner(m, n) = -g.entries().transpose();
  return StructureMatrix(std::move(block));
}

}  // namespace iphs
