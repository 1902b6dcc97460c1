#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

#include "iphs/errors.hpp"

namespace iphs {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

namespace detail {

inline void require_size(const Vector& v, Eigen::Index expected, const char* what) {
  if (v.size() != expected) {
    throw UsageError(std::string(what) + ": expected length " + std::to_string(expected) + ", got " +
                     std::to_string(v.size()));
  }
}

inline bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace detail

/// max_i |a_i - b_i| / max(||a||_inf, ||b||_inf); zero when both vectors vanish.
inline double relative_difference(const Vector& a, const Vector& b) {
  const double diff = (a - b).lpNorm<Eigen::Infinity>();
  const double scale = std::max(a.lpNorm<Eigen::Infinity>(), b.lpNorm<Eigen::Infinity>());
  if (scale == 0.0) return diff;
  return diff / scale;
}

inline double relative_difference(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  if (scale == 0.0) return std::abs(a - b);
  return std::abs(a - b) / scale;
}

}  // namespace iphs
