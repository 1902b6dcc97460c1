#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <variant>

#include "iphs/brackets.hpp"
#include "iphs/errors.hpp"
#include "iphs/linalg.hpp"
#include "iphs/smooth_functions.hpp"

namespace iphs {

inline constexpr double kDefaultBalanceTolerance = 1e-10;

/// Strictly positive function of (x, dH/dx, u). Every evaluation is checked;
/// a value <= 0 is a ModelError, a non-finite one a NumericError.
class GammaFn {
 public:
  using Fn = std::function<double(const Vector& x, const Vector& grad_h, const Vector& u)>;

  GammaFn(Fn fn, std::string name = "gamma")
      : fn_(std::make_shared<const Fn>(std::move(fn))), name_(std::move(name)) {
    if (!*fn_) throw UsageError("GammaFn: function must be callable");
  }

  const std::string& name() const noexcept { return name_; }

  double operator()(const Vector& x, const Vector& grad_h, const Vector& u) const {
    const double v = (*fn_)(x, grad_h, u);
    if (std::isnan(v) || std::isinf(v)) throw NumericError(name_ + " returned a non-finite value");
    if (!(v > 0.0)) {
      std::ostringstream msg;
      msg << name_ << " must be strictly positive (positivity violated), got " << v;
      throw ModelError(msg.str());
    }
    return v;
  }

 private:
  std::shared_ptr<const Fn> fn_;
  std::string name_;
};

/// Closed box of admissible states and inputs. Infinite bounds are allowed.
struct AdmissibleBox {
  Vector x_lo;
  Vector x_hi;
  Vector u_lo;
  Vector u_hi;

  static AdmissibleBox unbounded(Eigen::Index n, Eigen::Index m) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {Vector::Constant(n, -inf), Vector::Constant(n, inf), Vector::Constant(m, -inf), Vector::Constant(m, inf)};
  }

  bool contains_state(const Vector& x) const { return within(x, x_lo, x_hi); }
  bool contains_input(const Vector& u) const { return within(u, u_lo, u_hi); }

  bool bounded() const {
    return x_lo.allFinite() && x_hi.allFinite() && u_lo.allFinite() && u_hi.allFinite();
  }

 private:
  static bool within(const Vector& v, const Vector& lo, const Vector& hi) {
    if (v.size() != lo.size()) return false;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (!std::isfinite(v[i]) || v[i] < lo[i] || v[i] > hi[i]) return false;
    }
    return true;
  }
};

/// Input map of the form W(x, dH/dx) + g(x, dH/dx) u, with no output map.
struct LegacyPort {
  using AffineTermFn = std::function<Vector(const Vector& x, const Vector& grad_h)>;
  using InputMapFn = std::function<Matrix(const Vector& x, const Vector& grad_h)>;

  AffineTermFn W;
  InputMapFn g;
  Eigen::Index m = 1;
};

/// Interface carrying an irreversible phenomenon: constant g, positive
/// gamma_port(x, dH/dx, u) and the environment entropy co-input tau.
class IrreversiblePort {
 public:
  IrreversiblePort(PortMatrix g, GammaFn gamma_port, Vector tau)
      : g_(std::move(g)), gamma_port_(std::move(gamma_port)), tau_(std::move(tau)) {
    detail::require_size(tau_, g_.m(), "IrreversiblePort tau");
    if (!tau_.allFinite()) throw NumericError("IrreversiblePort: tau must be finite");
  }

  /// tau defaults to the all-ones vector.
  IrreversiblePort(PortMatrix g, GammaFn gamma_port)
      : IrreversiblePort(g, std::move(gamma_port), Vector::Ones(g.m())) {}

  const PortMatrix& g() const noexcept { return g_; }
  const GammaFn& gamma_port() const noexcept { return gamma_port_; }
  const Vector& tau() const noexcept { return tau_; }
  Eigen::Index m() const noexcept { return g_.m(); }

 private:
  PortMatrix g_;
  GammaFn gamma_port_;
  Vector tau_;
};

using PortSpec = std::variant<LegacyPort, IrreversiblePort>;

class IphsSystem {
 public:
  IphsSystem(ScalarField hamiltonian, ScalarField entropy, StructureMatrix structure, GammaFn gamma, PortSpec port,
             AdmissibleBox domain, std::string name = "iphs")
      : h_(std::move(hamiltonian)),
        s_(std::move(entropy)),
        j_(std::move(structure)),
        gamma_(std::move(gamma)),
        port_(std::move(port)),
        domain_(std::move(domain)),
        name_(std::move(name)) {
    const auto n = static_cast<std::size_t>(j_.n());
    if (h_.dim() != n || s_.dim() != n) {
      throw UsageError(name_ + ": H, S and J must share the state dimension");
    }
    if (const auto* legacy = std::get_if<LegacyPort>(&port_)) {
      if (legacy->m <= 0) throw UsageError(name_ + ": port dimension must be positive");
      if (!legacy->W || !legacy->g) throw UsageError(name_ + ": legacy port needs W and g");
    } else if (std::get<IrreversiblePort>(port_).g().n() != j_.n()) {
      throw UsageError(name_ + ": port matrix g must have n rows");
    }
    if (domain_.x_lo.size() != j_.n() || domain_.x_hi.size() != j_.n() || domain_.u_lo.size() != m() ||
        domain_.u_hi.size() != m()) {
      throw UsageError(name_ + ": admissible box dimensions do not match the system");
    }
  }

  const ScalarField& hamiltonian() const noexcept { return h_; }
  const ScalarField& entropy() const noexcept { return s_; }
  const StructureMatrix& structure() const noexcept { return j_; }
  const GammaFn& gamma() const noexcept { return gamma_; }
  const PortSpec& port() const noexcept { return port_; }
  const AdmissibleBox& domain() const noexcept { return domain_; }
  const std::string& name() const noexcept { return name_; }

  Eigen::Index n() const noexcept { return j_.n(); }
  Eigen::Index m() const noexcept {
    if (const auto* legacy = std::get_if<LegacyPort>(&port_)) return legacy->m;
    return std::get<IrreversiblePort>(port_).m();
  }
  bool has_irreversible_port() const noexcept { return std::holds_alternative<IrreversiblePort>(port_); }

  const IrreversiblePort& irreversible_port() const {
    if (const auto* p = std::get_if<IrreversiblePort>(&port_)) return *p;
    throw UnsupportedOperation(name_ + ": system has a legacy affine port");
  }

 private:
  ScalarField h_;
  ScalarField s_;
  StructureMatrix j_;
  GammaFn gamma_;
  PortSpec port_;
  AdmissibleBox domain_;
  std::string name_;
};

/// Instantaneous energy and entropy accounting at one (t, x, u).
///
/// For legacy ports there is no output: y is empty, yTu and energy_residual
/// are NaN, sigma_port is 0 and `decomposable` is false. entropy_flux is then
/// the whole port supply dS/dx^T (W + g u).
struct BalanceSample {
  double t = 0.0;
  double dH_dt = 0.0;
  double yTu = 0.0;
  double sigma_int = 0.0;
  double sigma_port = 0.0;
  double entropy_flux = 0.0;
  double dS_dt = 0.0;
  double energy_residual = 0.0;
  double entropy_residual = 0.0;
  bool decomposable = true;
};

inline bool energy_balance_holds(const BalanceSample& s, double tol) {
  return !s.decomposable || std::abs(s.energy_residual) <= tol * (1.0 + std::abs(s.yTu));
}

inline bool entropy_balance_holds(const BalanceSample& s, double tol) {
  return !s.decomposable || std::abs(s.entropy_residual) <= tol * (1.0 + std::abs(s.dS_dt));
}

/// Flow and output of an irreversible port at one point, with the factors that produced them.
struct PortTerms {
  Vector flow;
  Vector y;
  double bracket = 0.0;
  double gamma = 0.0;
};

namespace detail {

inline void require_state(const IphsSystem& sys, const Vector& x) {
  require_size(x, sys.n(), "state");
  if (!sys.domain().contains_state(x)) throw DomainError(sys.name() + ": state outside the admissible domain");
}

inline void require_input(const IphsSystem& sys, const Vector& u) {
  require_size(u, sys.m(), "input");
  if (!sys.domain().contains_input(u)) throw DomainError(sys.name() + ": input outside the admissible domain");
}

inline Vector finite_gradient(const ScalarField& f, const Vector& x) {
  Vector g = f.gradient(x);
  if (!g.allFinite()) throw NumericError(f.name() + ": non-finite gradient");
  return g;
}

/// {S_tot, H_tot}_{J_port} = (g^T dS/dx)^T u - tau^T (g^T dH/dx)
inline double irreversible_port_bracket(const IrreversiblePort& port, const Vector& grad_s, const Vector& grad_h,
                                        const Vector& u) {
  const Matrix& g = port.g().entries();
  return (g.transpose() * grad_s).dot(u) - port.tau().dot(g.transpose() * grad_h);
}

inline PortTerms irreversible_port_terms(const IrreversiblePort& port, const Vector& x, const Vector& grad_s,
                                         const Vector& grad_h, const Vector& u) {
  const Matrix& g = port.g().entries();
  PortTerms terms;
  terms.bracket = irreversible_port_bracket(port, grad_s, grad_h, u);
  terms.gamma = port.gamma_port()(x, grad_h, u);
  const double factor = terms.gamma * terms.bracket;
  terms.flow = factor * (g * u);
  terms.y = factor * (g.transpose() * grad_h);
  return terms;
}

struct DriftTerms {
  Vector grad_h;
  Vector grad_s;
  double gamma = 0.0;
  double bracket = 0.0;
  Vector drift;
};

inline DriftTerms drift_terms(const IphsSystem& sys, const Vector& x) {
  DriftTerms d;
  d.grad_h = finite_gradient(sys.hamiltonian(), x);
  d.grad_s = finite_gradient(sys.entropy(), x);
  d.gamma = sys.gamma()(x, d.grad_h, Vector());
  d.bracket = poisson_bracket(sys.structure(), d.grad_s, d.grad_h);
  d.drift = (d.gamma * d.bracket) * (sys.structure().entries() * d.grad_h);
  return d;
}

inline Vector legacy_port_flow(const LegacyPort& port, const Vector& x, const Vector& grad_h, const Vector& u) {
  const Vector w = port.W(x, grad_h);
  const Matrix g = port.g(x, grad_h);
  if (w.size() != x.size() || g.rows() != x.size() || g.cols() != u.size()) {
    throw ModelError("legacy port: W or g has the wrong shape");
  }
  return w + g * u;
}

}  // namespace detail

/// gamma(x, dH/dx) {S, H}_J J dH/dx. gamma receives an empty input vector.
inline Vector drift(const IphsSystem& sys, const Vector& x) {
  detail::require_state(sys, x);
  return detail::drift_terms(sys, x).drift;
}

inline double port_bracket(const IphsSystem& sys, const Vector& x, const Vector& u) {
  const IrreversiblePort& port = sys.irreversible_port();
  detail::require_size(x, sys.n(), "state");
  detail::require_size(u, sys.m(), "input");
  return detail::irreversible_port_bracket(port, detail::finite_gradient(sys.entropy(), x),
                                           detail::finite_gradient(sys.hamiltonian(), x), u);
}

inline Vector vector_field(const IphsSystem& sys, const Vector& x, const Vector& u) {
  detail::require_state(sys, x);
  detail::require_input(sys, u);
  const detail::DriftTerms d = detail::drift_terms(sys, x);
  if (const auto* legacy = std::get_if<LegacyPort>(&sys.port())) {
    return d.drift + detail::legacy_port_flow(*legacy, x, d.grad_h, u);
  }
  return d.drift + detail::irreversible_port_terms(sys.irreversible_port(), x, d.grad_s, d.grad_h, u).flow;
}

inline Vector output(const IphsSystem& sys, const Vector& x, const Vector& u) {
  if (!sys.has_irreversible_port()) {
    throw UnsupportedOperation(sys.name() + ": no output map is defined for a legacy affine port");
  }
  detail::require_state(sys, x);
  detail::require_input(sys, u);
  const Vector grad_h = detail::finite_gradient(sys.hamiltonian(), x);
  const Vector grad_s = detail::finite_gradient(sys.entropy(), x);
  return detail::irreversible_port_terms(sys.irreversible_port(), x, grad_s, grad_h, u).y;
}

/// Full balance record; for irreversible ports `y_out` (if given) receives the output.
inline BalanceSample balance(const IphsSystem& sys, const Vector& x, const Vector& u, double t,
                             Vector* y_out = nullptr) {
  detail::require_state(sys, x);
  detail::require_input(sys, u);
  const detail::DriftTerms d = detail::drift_terms(sys, x);

  BalanceSample s;
  s.t = t;
  s.sigma_int = d.gamma * d.bracket * d.bracket;

  if (const auto* legacy = std::get_if<LegacyPort>(&sys.port())) {
    const Vector port_flow = detail::legacy_port_flow(*legacy, x, d.grad_h, u);
    const Vector field = d.drift + port_flow;
    s.dH_dt = d.grad_h.dot(field);
    s.dS_dt = d.grad_s.dot(field);
    s.yTu = std::numeric_limits<double>::quiet_NaN();
    s.energy_residual = std::numeric_limits<double>::quiet_NaN();
    s.sigma_port = 0.0;
    s.entropy_flux = d.grad_s.dot(port_flow);
    s.entropy_residual = s.dS_dt - s.entropy_flux - s.sigma_int;
    s.decomposable = false;
    if (y_out != nullptr) *y_out = Vector();
    return s;
  }

  const IrreversiblePort& port = sys.irreversible_port();
  const PortTerms p = detail::irreversible_port_terms(port, x, d.grad_s, d.grad_h, u);
  const Vector field = d.drift + p.flow;
  s.dH_dt = d.grad_h.dot(field);
  s.dS_dt = d.grad_s.dot(field);
  s.yTu = p.y.dot(u);
  s.sigma_port = p.gamma * p.bracket * p.bracket;
  s.entropy_flux = port.tau().dot(p.y);
  s.energy_residual = s.dH_dt - s.yTu;
  s.entropy_residual = s.dS_dt - s.entropy_flux - s.sigma_int - s.sigma_port;
  s.decomposable = true;
  if (y_out != nullptr) *y_out = p.y;
  return s;
}

}  // namespace iphs
