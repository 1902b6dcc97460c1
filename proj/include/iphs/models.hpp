#pragma once

// Two compartments of ideal gas exchanging heat through an internal wall,
// compartment 2 also exchanging heat with a thermostat at temperature u.
// State x = (S1, S2), H = U1 + U2, S = S1 + S2.

#include <cmath>
#include <string>
#include <string_view>

#include "iphs/brackets.hpp"
#include "iphs/errors.hpp"
#include "iphs/linalg.hpp"
#include "iphs/smooth_functions.hpp"
#include "iphs/system.hpp"

namespace iphs::models {

inline constexpr std::string_view kTwoCompartmentLegacy = "two-compartment-legacy";
inline constexpr std::string_view kTwoCompartmentIrreversible = "two-compartment-irreversible";

struct TwoCompartmentParams {
  double lambda = 1.0;    // internal wall conductance
  double lambda_e = 0.5;  // external wall conductance
  double T0 = 300.0;      // reference temperature
  double c1 = 1.0;
  double c2 = 1.0;
  // admissible box, in temperature
  double T_min = 10.0;
  double T_max = 2000.0;
  double u_min = 10.0;
  double u_max = 2000.0;

  void validate() const {
    const auto positive = [](double v, const char* field) {
      if (!(v > 0.0) || !std::isfinite(v)) throw InvalidParameter(field, "must be finite and > 0");
    };
    positive(lambda, "lambda");
    positive(lambda_e, "lambda_e");
    positive(T0, "T0");
    positive(c1, "c1");
    positive(c2, "c2");
    positive(T_min, "T_min");
    positive(u_min, "u_min");
    if (!(T_max > T_min) || !std::isfinite(T_max)) throw InvalidParameter("T_max", "must be finite and > T_min");
    if (!(u_max > u_min) || !std::isfinite(u_max)) throw InvalidParameter("u_max", "must be finite and > u_min");
  }
};

/// T0 exp(S / c)
inline double ideal_gas_temperature(double entropy, double T0, double c) {
  if (!(c > 0.0)) throw UsageError("ideal_gas_temperature: c must be > 0");
  if (!(T0 > 0.0)) throw UsageError("ideal_gas_temperature: T0 must be > 0");
  const double t = T0 * std::exp(entropy / c);
  if (!std::isfinite(t) || !(t > 0.0)) throw DomainError("ideal_gas_temperature: temperature out of range");
  return t;
}

/// Inverse of ideal_gas_temperature: c ln(T / T0).
inline double ideal_gas_entropy(double temperature, double T0, double c) {
  if (!(temperature > 0.0)) throw DomainError("ideal_gas_entropy: temperature must be > 0");
  return c * std::log(temperature / T0);
}

/// sum_i c_i T0 exp(x_i / c_i); its gradient is the vector of temperatures.
inline ScalarField internal_energy(double T0, Vector capacities) {
  for (Eigen::Index i = 0; i < capacities.size(); ++i) {
    if (!(capacities[i] > 0.0)) throw InvalidParameter("c" + std::to_string(i + 1), "must be > 0");
  }
  if (!(T0 > 0.0)) throw InvalidParameter("T0", "must be > 0");
  const auto dim = static_cast<std::size_t>(capacities.size());
  return ScalarField(
      dim,
      [T0, c = capacities](const Vector& x) {
        double total = 0.0;
        for (Eigen::Index i = 0; i < x.size(); ++i) total += c[i] * ideal_gas_temperature(x[i], T0, c[i]);
        return total;
      },
      [T0, c = capacities](const Vector& x) {
        Vector t(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) t[i] = ideal_gas_temperature(x[i], T0, c[i]);
        return t;
      },
      "H");
}

inline ScalarField total_entropy(Eigen::Index n) { return fields::linear(Vector::Ones(n), "S"); }

inline Vector two_compartment_state(const TwoCompartmentParams& p, double T1, double T2) {
  Vector x(2);
  x << ideal_gas_entropy(T1, p.T0, p.c1), ideal_gas_entropy(T2, p.T0, p.c2);
  return x;
}

namespace detail {

inline Vector capacities(const TwoCompartmentParams& p) {
  Vector c(2);
  c << p.c1, p.c2;
  return c;
}

inline AdmissibleBox box(const TwoCompartmentParams& p) {
  AdmissibleBox b;
  b.x_lo = two_compartment_state(p, p.T_min, p.T_min);
  b.x_hi = two_compartment_state(p, p.T_max, p.T_max);
  b.u_lo = Vector::Constant(1, p.u_min);
  b.u_hi = Vector::Constant(1, p.u_max);
  return b;
}

/// lambda / (T1 T2)
inline GammaFn conduction_gamma(double lambda) {
  return GammaFn([lambda](const Vector&, const Vector& temps, const Vector&) { return lambda / (temps[0] * temps[1]); },
                 "gamma");
}

}  // namespace detail

/// Affine port: W = (0, -lambda_e), g = (0, lambda_e / T2), u = thermostat temperature.
inline IphsSystem two_compartment_legacy(const TwoCompartmentParams& p) {
  p.validate();
  LegacyPort port;
  port.m = 1;
  port.W = [le = p.lambda_e](const Vector&, const Vector&) {
    Vector w(2);
    w << 0.0, -le;
    return w;
  };
  port.g = [le = p.lambda_e](const Vector&, const Vector& temps) {
    Matrix g(2, 1);
    g << 0.0, le / temps[1];
    return g;
  };
  return IphsSystem(internal_energy(p.T0, detail::capacities(p)), total_entropy(2), StructureMatrix::symplectic2(),
                    detail::conduction_gamma(p.lambda), port, detail::box(p), std::string(kTwoCompartmentLegacy));
}

/// Irreversible port on the external wall: g = (0, 1)^T, gamma_port = lambda_e / (T2 u).
inline IphsSystem two_compartment_irreversible(const TwoCompartmentParams& p, Vector tau = Vector::Ones(1)) {
  p.validate();
  Matrix g(2, 1);
  g << 0.0, 1.0;
  GammaFn gamma_port(
      [le = p.lambda_e](const Vector&, const Vector& temps, const Vector& u) { return le / (temps[1] * u[0]); },
      "gamma_port");
  return IphsSystem(internal_energy(p.T0, detail::capacities(p)), total_entropy(2), StructureMatrix::symplectic2(),
                    detail::conduction_gamma(p.lambda), IrreversiblePort(PortMatrix(g), gamma_port, std::move(tau)),
                    detail::box(p), std::string(kTwoCompartmentIrreversible));
}

/// Both compartments with the external wall removed: only internal conduction acts.
/// Represented with a zero affine port so it still accepts a (ignored) scalar input.
inline IphsSystem two_compartment_isolated(const TwoCompartmentParams& p) {
  p.validate();
  LegacyPort port;
  port.m = 1;
  port.W = [](const Vector&, const Vector&) { return Vector::Zero(2).eval(); };
  port.g = [](const Vector&, const Vector&) { return Matrix::Zero(2, 1).eval(); };
  return IphsSystem(internal_energy(p.T0, detail::capacities(p)), total_entropy(2), StructureMatrix::symplectic2(),
                    detail::conduction_gamma(p.lambda), port, detail::box(p), "two-compartment-isolated");
}

inline bool is_builtin(std::string_view id) {
  return id == kTwoCompartmentLegacy || id == kTwoCompartmentIrreversible;
}

inline IphsSystem make_builtin(std::string_view id, const TwoCompartmentParams& p, Vector tau = Vector::Ones(1)) {
  if (id == kTwoCompartmentLegacy) return two_compartment_legacy(p);
  if (id == kTwoCompartmentIrreversible) return two_compartment_irreversible(p, std::move(tau));
  throw UsageError("unknown model '" + std::string(id) + "'");
}

}  // namespace iphs::models
