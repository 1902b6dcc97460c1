#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "iphs/errors.hpp"
#include "iphs/linalg.hpp"
#include "iphs/system.hpp"

namespace iphs {

/// Time-dependent input u(t) in R^m.
class InputSignal {
 public:
  struct Constant {
    Vector value;
  };
  struct Step {
    Vector before;
    Vector after;
    double t_switch = 0.0;  // `after` applies for t >= t_switch
  };
  struct Sinusoid {
    Vector mean;
    Vector amplitude;
    double period = 1.0;
    double phase = 0.0;  // radians
  };
  /// Piecewise constant: value[k] holds on [time[k], time[k+1]); value[0] before time[0].
  struct Table {
    std::vector<double> times;
    std::vector<Vector> values;
  };
  using Kind = std::variant<Constant, Step, Sinusoid, Table>;

  explicit InputSignal(Kind kind) : kind_(std::move(kind)) { validate(); }

  static InputSignal constant(Vector value) { return InputSignal(Constant{std::move(value)}); }
  static InputSignal constant(double value) { return constant(Vector::Constant(1, value)); }

  Eigen::Index dim() const {
    return std::visit(
        [](const auto& k) -> Eigen::Index {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Constant>) return k.value.size();
          if constexpr (std::is_same_v<K, Step>) return k.before.size();
          if constexpr (std::is_same_v<K, Sinusoid>) return k.mean.size();
          if constexpr (std::is_same_v<K, Table>) return k.values.front().size();
        },
        kind_);
  }

  Vector operator()(double t) const {
    return std::visit(
        [t](const auto& k) -> Vector {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Constant>) {
            return k.value;
          } else if constexpr (std::is_same_v<K, Step>) {
            return t < k.t_switch ? k.before : k.after;
          } else if constexpr (std::is_same_v<K, Sinusoid>) {
            return k.mean + std::sin(2.0 * std::numbers::pi * t / k.period + k.phase) * k.amplitude;
          } else {
            const auto it = std::upper_bound(k.times.begin(), k.times.end(), t);
            const auto idx = it == k.times.begin() ? 0 : static_cast<std::size_t>(it - k.times.begin()) - 1;
            return k.values[idx];
          }
        },
        kind_);
  }

  const Kind& kind() const noexcept { return kind_; }

 private:
  void validate() const {
    std::visit(
        [](const auto& k) {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Constant>) {
            if (k.value.size() == 0) throw UsageError("constant input: value must be non-empty");
          } else if constexpr (std::is_same_v<K, Step>) {
            if (k.before.size() == 0 || k.before.size() != k.after.size()) {
              throw UsageError("step input: before/after must be non-empty and of equal length");
            }
          } else if constexpr (std::is_same_v<K, Sinusoid>) {
            if (k.mean.size() == 0 || k.mean.size() != k.amplitude.size()) {
              throw UsageError("sinusoid input: mean/amplitude must be non-empty and of equal length");
            }
            if (!(k.period > 0.0)) throw UsageError("sinusoid input: period must be > 0");
          } else {
            if (k.times.empty() || k.times.size() != k.values.size()) {
              throw UsageError("table input: times and values must be non-empty and of equal length");
            }
            if (!std::is_sorted(k.times.begin(), k.times.end()) ||
                std::adjacent_find(k.times.begin(), k.times.end()) != k.times.end()) {
              throw UsageError("table input: times must be strictly increasing");
            }
            for (const auto& v : k.values) {
              if (v.size() != k.values.front().size() || v.size() == 0) {
                throw UsageError("table input: all values must share a non-zero length");
              }
            }
          }
        },
        kind_);
  }

  Kind kind_;
};

/// One classical Runge-Kutta step. Errors raised by the field at a stage are
/// rethrown as IntegrationError carrying the stage index (1..4).
template <typename Field>
Vector rk4_step(const Field& field, double t, const Vector& x, double h) {
  if (!(h > 0.0)) throw UsageError("rk4_step: step must be > 0");
  const auto stage = [&field](std::size_t index, double ts, const Vector& xs) -> Vector {
    try {
      Vector k = field(ts, xs);
      if (!k.allFinite()) throw NumericError("non-finite derivative");
      return k;
    } catch (const IntegrationError&) {
      throw;
    } catch (const DomainError& e) {
      throw IntegrationError(index, e.what(), true);
    } catch (const Error& e) {
      throw IntegrationError(index, e.what());
    }
  };
  const double half = 0.5 * h;
  const Vector k1 = stage(1, t, x);
  const Vector k2 = stage(2, t + half, x + half * k1);
  const Vector k3 = stage(3, t + half, x + half * k2);
  const Vector k4 = stage(4, t + h, x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<Vector> inputs;
  std::vector<Vector> outputs;  // empty vectors for legacy ports
  std::vector<BalanceSample> balances;

  std::size_t size() const noexcept { return times.size(); }
  bool empty() const noexcept { return times.empty(); }
};

enum class SimulationStatus { Ok, DomainExit, InvariantViolation };

struct SimulationResult {
  Trajectory trajectory;
  SimulationStatus status = SimulationStatus::Ok;
  std::string message;
  std::size_t failed_step = 0;  // index of the step that could not be completed or audited

  bool ok() const noexcept { return status == SimulationStatus::Ok; }
};

struct SimulationOptions {
  double tol_balance = kDefaultBalanceTolerance;
  // residuals beyond tol_balance * abort_factor stop the run
  double abort_factor = 1e3;
};

namespace detail {

inline std::size_t step_count(double t0, double t1, double h) {
  if (!(t1 > t0)) throw UsageError("simulate: t1 must be greater than t0");
  if (!(h > 0.0)) throw UsageError("simulate: step h must be > 0");
  const double span = t1 - t0;
  const double steps = std::round(span / h);
  if (steps < 1.0 || std::abs(steps * h - span) > 1e-9 * span) {
    throw UsageError("simulate: (t1 - t0) must be an integer multiple of h");
  }
  return static_cast<std::size_t>(steps);
}

}  // namespace detail

/// Fixed-step RK4 integration of vector_field(sys, x, u(t)) with a balance
/// record at every sample. Stops early on a domain exit or when a balance
/// residual exceeds tol_balance * abort_factor; the partial trajectory is kept.
inline SimulationResult simulate(const IphsSystem& sys, const Vector& x0, const InputSignal& input, double t0,
                                 double t1, double h, const SimulationOptions& options = {}) {
  const std::size_t steps = detail::step_count(t0, t1, h);
  detail::require_size(x0, sys.n(), "simulate initial state");
  if (input.dim() != sys.m()) throw UsageError("simulate: input dimension does not match the system");
  if (!sys.domain().contains_state(x0)) throw DomainError(sys.name() + ": initial state outside the admissible domain");

  SimulationResult result;
  Trajectory& traj = result.trajectory;
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.inputs.reserve(steps + 1);
  traj.outputs.reserve(steps + 1);
  traj.balances.reserve(steps + 1);

  const double abort_tol = options.tol_balance * options.abort_factor;
  const auto field = [&](double t, const Vector& x) { return vector_field(sys, x, input(t)); };

  Vector x = x0;
  for (std::size_t k = 0;; ++k) {
    const double t = t0 + static_cast<double>(k) * h;
    const Vector u = input(t);
    Vector y;
    BalanceSample sample;
    try {
      sample = balance(sys, x, u, t, &y);
    } catch (const DomainError& e) {
      result.status = SimulationStatus::DomainExit;
      result.message = e.what();
      result.failed_step = k;
      return result;
    } catch (const Error& e) {
      result.status = SimulationStatus::InvariantViolation;
      result.message = e.what();
      result.failed_step = k;
      return result;
    }
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.inputs.push_back(u);
    traj.outputs.push_back(std::move(y));
    traj.balances.push_back(sample);

    if (!energy_balance_holds(sample, abort_tol) || !entropy_balance_holds(sample, abort_tol)) {
      result.status = SimulationStatus::InvariantViolation;
      result.message = "balance residual exceeds tolerance at t = " + std::to_string(t);
      result.failed_step = k;
      return result;
    }
    if (k == steps) break;

    try {
      x = rk4_step(field, t, x, h);
    } catch (const IntegrationError& e) {
      result.status = e.domain_exit() ? SimulationStatus::DomainExit : SimulationStatus::InvariantViolation;
      result.message = e.what();
      result.failed_step = k + 1;
      return result;
    }
  }
  return result;
}

struct BalanceReport {
  std::size_t samples = 0;
  bool decomposable = true;
  double max_energy_residual = 0.0;   // NaN when not decomposable
  double max_entropy_residual = 0.0;
  double min_sigma_int = 0.0;
  double min_sigma_port = 0.0;
  double entropy_produced = 0.0;   // integral of sigma_int + sigma_port
  double entropy_exchanged = 0.0;  // integral of entropy_flux
};

/// Aggregates balance samples; integrals use the trapezoidal rule over `times`.
inline BalanceReport balance_report(std::span<const double> times, std::span<const BalanceSample> balances) {
  if (balances.empty()) throw UsageError("balance_report: empty trajectory");
  if (times.size() != balances.size()) throw UsageError("balance_report: times and samples differ in length");

  BalanceReport r;
  r.samples = balances.size();
  r.decomposable = std::all_of(balances.begin(), balances.end(), [](const auto& s) { return s.decomposable; });
  r.min_sigma_int = std::numeric_limits<double>::infinity();
  r.min_sigma_port = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < balances.size(); ++k) {
    const BalanceSample& s = balances[k];
    if (r.decomposable) r.max_energy_residual = std::max(r.max_energy_residual, std::abs(s.energy_residual));
    r.max_entropy_residual = std::max(r.max_entropy_residual, std::abs(s.entropy_residual));
    r.min_sigma_int = std::min(r.min_sigma_int, s.sigma_int);
    r.min_sigma_port = std::min(r.min_sigma_port, s.sigma_port);
    if (k > 0) {
      const double dt = times[k] - times[k - 1];
      const BalanceSample& p = balances[k - 1];
      r.entropy_produced += 0.5 * dt * (p.sigma_int + p.sigma_port + s.sigma_int + s.sigma_port);
      r.entropy_exchanged += 0.5 * dt * (p.entropy_flux + s.entropy_flux);
    }
  }
  if (!r.decomposable) r.max_energy_residual = std::numeric_limits<double>::quiet_NaN();
  return r;
}

inline BalanceReport balance_report(const Trajectory& traj) { return balance_report(traj.times, traj.balances); }

}  // namespace iphs
