#pragma once

// System + environment on X x Xi, and its restriction to port variables.
//
// Environment functions are linear, H_c(xi) = u^T xi and S_c(xi) = tau^T xi,
// so they are carried by their coefficient vectors u and tau.

#include <optional>
#include <string>
#include <utility>

#include "iphs/brackets.hpp"
#include "iphs/errors.hpp"
#include "iphs/linalg.hpp"
#include "iphs/smooth_functions.hpp"
#include "iphs/system.hpp"

namespace iphs {

struct ExtendedState {
  Vector x;
  Vector xi;
};

/// H_tot(x, xi) = H(x) + c^T xi on R^(n+m).
inline ScalarField separable_extension(const ScalarField& f, Vector coefficients, std::string name) {
  const auto n = static_cast<Eigen::Index>(f.dim());
  const Eigen::Index m = coefficients.size();
  return ScalarField(
      static_cast<std::size_t>(n + m),
      [f, c = coefficients, n, m](const Vector& z) { return f.value(z.head(n)) + c.dot(z.tail(m)); },
      [f, c = coefficients, n, m](const Vector& z) {
        Vector g(n + m);
        g.head(n) = f.gradient(z.head(n));
        g.tail(m) = c;
        return g;
      },
      std::move(name));
}

/// Extended system on R^(n+m). The reversible variant carries J_e = [[J, g], [-g^T, 0]]
/// and H_tot; the irreversible variant carries J_port, H_tot, S_tot and gamma_port.
class ExtendedSystem {
 public:
  ExtendedSystem(StructureMatrix j_e, ScalarField h_tot, Eigen::Index n, Eigen::Index m,
                 std::optional<ScalarField> s_tot = std::nullopt, std::optional<GammaFn> gamma_port = std::nullopt)
      : j_e_(std::move(j_e)), h_tot_(std::move(h_tot)), s_tot_(std::move(s_tot)), gamma_port_(std::move(gamma_port)),
        n_(n), m_(m) {
    if (j_e_.n() != n_ + m_ || static_cast<Eigen::Index>(h_tot_.dim()) != n_ + m_) {
      throw UsageError("ExtendedSystem: dimensions must equal n + m");
    }
    if (s_tot_.has_value() != gamma_port_.has_value()) {
      throw UsageError("ExtendedSystem: S_tot and gamma_port come together");
    }
  }

  const StructureMatrix& structure() const noexcept { return j_e_; }
  const ScalarField& hamiltonian() const noexcept { return h_tot_; }
  const std::optional<ScalarField>& entropy() const noexcept { return s_tot_; }
  Eigen::Index n() const noexcept { return n_; }
  Eigen::Index m() const noexcept { return m_; }
  bool irreversible() const noexcept { return s_tot_.has_value(); }

  /// Reversible: J_e dH_tot. Irreversible: gamma_port {S_tot, H_tot}_{J_port} J_port dH_tot.
  ExtendedState field(const ExtendedState& z) const {
    detail::require_size(z.x, n_, "extended state x");
    detail::require_size(z.xi, m_, "extended state xi");
    Vector stacked(n_ + m_);
    stacked << z.x, z.xi;
    const Vector dh = h_tot_.gradient(stacked);
    Vector rate = j_e_.entries() * dh;
    if (s_tot_) {
      const Vector ds = s_tot_->gradient(stacked);
      const double bracket = poisson_bracket(j_e_, ds, dh);
      const double gamma = (*gamma_port_)(z.x, dh.head(n_), dh.tail(m_));
      rate *= gamma * bracket;
    }
    return {rate.head(n_), rate.tail(m_)};
  }

  /// {S_tot, H_tot} evaluated through the extended structure matrix.
  double entropy_bracket(const ExtendedState& z) const {
    if (!s_tot_) throw UnsupportedOperation("ExtendedSystem: reversible extension has no entropy function");
    Vector stacked(n_ + m_);
    stacked << z.x, z.xi;
    return poisson_bracket(j_e_, s_tot_->gradient(stacked), h_tot_.gradient(stacked));
  }

 private:
  StructureMatrix j_e_;
  ScalarField h_tot_;
  std::optional<ScalarField> s_tot_;
  std::optional<GammaFn> gamma_port_;
  Eigen::Index n_;
  Eigen::Index m_;
};

namespace detail {

inline void require_port_shape(const StructureMatrix* j, const PortMatrix& g, const ScalarField& h) {
  if (j != nullptr && j->n() != g.n()) throw UsageError("embedding: J and g disagree on n");
  if (static_cast<Eigen::Index>(h.dim()) != g.n()) throw UsageError("embedding: H and g disagree on n");
}

}  // namespace detail

inline ExtendedSystem extend_reversible(const StructureMatrix& j, const PortMatrix& g, const ScalarField& h,
                                        const Vector& u) {
  detail::require_port_shape(&j, g, h);
  detail::require_size(u, g.m(), "extend_reversible input");
  const Eigen::Index n = g.n();
  const Eigen::Index m = g.m();
  Matrix block = Matrix::Zero(n + m, n + m);
  block.topLeftCorner(n, n) = j.entries();
  block.topRightCorner(n, m) = g.entries();
  block.bottomLeftCorner(m, n) = -g.entries().transpose();
  return ExtendedSystem(StructureMatrix(std::move(block)), separable_extension(h, u, "H_tot"), n, m);
}

/// Extension on X x Xi with the anti-diagonal J_port, H_tot = H + u^T xi, S_tot = S + tau^T xi.
inline ExtendedSystem extend_irreversible(const PortMatrix& g, const GammaFn& gamma_port, const ScalarField& s,
                                          const ScalarField& h, const Vector& u, const Vector& tau) {
  detail::require_port_shape(nullptr, g, h);
  detail::require_port_shape(nullptr, g, s);
  detail::require_size(u, g.m(), "extend_irreversible input");
  detail::require_size(tau, g.m(), "extend_irreversible tau");
  return ExtendedSystem(port_structure(g), separable_extension(h, u, "H_tot"), g.n(), g.m(),
                        separable_extension(s, tau, "S_tot"), gamma_port);
}

/// (x, u) -> (dx/dt, y) with dx/dt = J dH/dx + g u and y = g^T dH/dx.
class ReversiblePortMap {
 public:
  struct Result {
    Vector dxdt;
    Vector y;
  };

  ReversiblePortMap(StructureMatrix j, PortMatrix g, ScalarField h)
      : j_(std::move(j)), g_(std::move(g)), h_(std::move(h)) {
    detail::require_port_shape(&j_, g_, h_);
  }

  Result operator()(const Vector& x, const Vector& u) const {
    detail::require_size(u, g_.m(), "reversible port input");
    const Vector grad_h = h_.gradient(x);
    return {j_.entries() * grad_h + g_.entries() * u, g_.entries().transpose() * grad_h};
  }

  const ScalarField& hamiltonian() const noexcept { return h_; }

 private:
  StructureMatrix j_;
  PortMatrix g_;
  ScalarField h_;
};

inline ReversiblePortMap restrict_reversible(const StructureMatrix& j, const PortMatrix& g, const ScalarField& h) {
  return ReversiblePortMap(j, g, h);
}

/// Port maps of an interface with an irreversible phenomenon:
///   flow = gamma_port [ (g^T dS/dx)^T u - tau^T g^T dH/dx ] g u
///   y    = gamma_port [ (g^T dS/dx)^T u - tau^T g^T dH/dx ] g^T dH/dx
class IrreversiblePortMap {
 public:
  IrreversiblePortMap(IrreversiblePort port, ScalarField s, ScalarField h)
      : port_(std::move(port)), s_(std::move(s)), h_(std::move(h)) {
    detail::require_port_shape(nullptr, port_.g(), h_);
    detail::require_port_shape(nullptr, port_.g(), s_);
  }

  PortTerms operator()(const Vector& x, const Vector& u) const {
    detail::require_size(u, port_.m(), "irreversible port input");
    return detail::irreversible_port_terms(port_, x, detail::finite_gradient(s_, x), detail::finite_gradient(h_, x),
                                           u);
  }

  /// The same interface as consumed by IphsSystem.
  const IrreversiblePort& port() const noexcept { return port_; }

 private:
  IrreversiblePort port_;
  ScalarField s_;
  ScalarField h_;
};

inline IrreversiblePortMap derive_irreversible_port(const PortMatrix& g, const GammaFn& gamma_port,
                                                    const ScalarField& s, const ScalarField& h, const Vector& tau) {
  return IrreversiblePortMap(IrreversiblePort(g, gamma_port, tau), s, h);
}

}  // namespace iphs
