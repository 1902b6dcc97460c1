#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <utility>

#include "iphs/errors.hpp"
#include "iphs/linalg.hpp"

namespace iphs {

/// A smooth real-valued function on R^n together with its analytic gradient.
///
/// Both callables must be pure. Copies share the underlying callables, so a
/// field can be evaluated concurrently from several threads.
class ScalarField {
 public:
  using ValueFn = std::function<double(const Vector&)>;
  using GradientFn = std::function<Vector(const Vector&)>;

  ScalarField(std::size_t dim, ValueFn value, GradientFn gradient, std::string name = "f")
      : dim_(dim),
        value_(std::make_shared<const ValueFn>(std::move(value))),
        gradient_(std::make_shared<const GradientFn>(std::move(gradient))),
        name_(std::move(name)) {
    if (dim_ == 0) throw UsageError("ScalarField: dimension must be positive");
    if (!*value_ || !*gradient_) throw UsageError("ScalarField: value and gradient must be callable");
  }

  std::size_t dim() const noexcept { return dim_; }
  const std::string& name() const noexcept { return name_; }

  double value(const Vector& x) const {
    detail::require_size(x, static_cast<Eigen::Index>(dim_), name_.c_str());
    return (*value_)(x);
  }

  Vector gradient(const Vector& x) const {
    detail::require_size(x, static_cast<Eigen::Index>(dim_), name_.c_str());
    Vector g = (*gradient_)(x);
    if (g.size() != static_cast<Eigen::Index>(dim_)) {
      throw ModelError(name_ + ": gradient has length " + std::to_string(g.size()) + ", expected " +
                       std::to_string(dim_));
    }
    return g;
  }

 private:
  std::size_t dim_;
  std::shared_ptr<const ValueFn> value_;
  std::shared_ptr<const GradientFn> gradient_;
  std::string name_;
};

inline double eval(const ScalarField& f, const Vector& x) { return f.value(x); }

inline Vector grad(const ScalarField& f, const Vector& x) { return f.gradient(x); }

struct GradientReport {
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  bool pass = false;
};

/// Compares the analytic gradient against central differences with step h.
/// The error of coordinate i is |fd_i - g_i| / max(|g_i|, 1).
inline GradientReport check_gradient(const ScalarField& f, const Vector& x, double h, double tol) {
  if (!(h > 0.0)) throw UsageError("check_gradient: step h must be positive");
  if (!(tol > 0.0)) throw UsageError("check_gradient: tolerance must be positive");

  const Vector g = f.gradient(x);
  GradientReport report;
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!std::isfinite(g[i])) {
      throw NumericError(f.name() + ": non-finite gradient at coordinate " + std::to_string(i));
    }
    probe[i] = x[i] + h;
    const double forward = f.value(probe);
    probe[i] = x[i] - h;
    const double backward = f.value(probe);
    probe[i] = x[i];
    if (!std::isfinite(forward) || !std::isfinite(backward)) {
      throw NumericError(f.name() + ": non-finite value near coordinate " + std::to_string(i));
    }
    const double fd = (forward - backward) / (2.0 * h);
    const double err = std::abs(fd - g[i]) / std::max(std::abs(g[i]), 1.0);
    if (err > report.max_relative_error || i == 0) {
      report.max_relative_error = err;
      report.worst_index = static_cast<std::size_t>(i);
    }
  }
  report.pass = report.max_relative_error <= tol;
  return report;
}

namespace fields {

inline ScalarField constant(std::size_t dim, double c) {
  return ScalarField(
      dim, [c](const Vector&) { return c; }, [dim](const Vector&) { return Vector::Zero(static_cast<Eigen::Index>(dim)).eval(); },
      "constant");
}

/// x -> s^T x
inline ScalarField linear(Vector coefficients, std::string name = "linear") {
  const auto dim = static_cast<std::size_t>(coefficients.size());
  return ScalarField(
      dim, [s = coefficients](const Vector& x) { return s.dot(x); }, [s = coefficients](const Vector&) { return s; },
      std::move(name));
}

/// x -> x^T Q x / 2 with Q symmetric.
inline ScalarField quadratic(Matrix q, std::string name = "quadratic") {
  if (q.rows() != q.cols()) throw UsageError("quadratic: Q must be square");
  if (q.size() > 0 && (q - q.transpose()).cwiseAbs().maxCoeff() > 0.0) {
    throw UsageError("quadratic: Q must be symmetric");
  }
  const auto dim = static_cast<std::size_t>(q.rows());
  return ScalarField(
      dim, [q](const Vector& x) { return 0.5 * x.dot(q * x); }, [q](const Vector& x) { return (q * x).eval(); },
      std::move(name));
}

}  // namespace fields

}  // namespace iphs
