#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "iphs/brackets.hpp"
#include "iphs/cli/config.hpp"
#include "iphs/cli/csv.hpp"
#include "iphs/integrate.hpp"
#include "iphs/sampling.hpp"
#include "iphs/smooth_functions.hpp"
#include "iphs/system.hpp"

namespace iphs::cli {

enum ExitCode : int { kSuccess = 0, kConfigError = 2, kInvariantViolation = 3, kDomainExit = 4 };

inline constexpr double kGradientStep = 1e-5;
inline constexpr double kGradientTolerance = 1e-5;
inline constexpr double kOrthogonalityTolerance = 1e-10;
inline constexpr double kEntropyProductionTolerance = 1e-12;

/// First sample whose residuals exceed `tol`, if any.
inline std::optional<std::size_t> first_violation(const Trajectory& traj, double tol) {
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const BalanceSample& s = traj.balances[k];
    if (!energy_balance_holds(s, tol) || !entropy_balance_holds(s, tol) || s.sigma_int < 0.0 || s.sigma_port < 0.0) {
      return k;
    }
  }
  return std::nullopt;
}

inline void write_report(std::ostream& os, const BalanceReport& r, const Trajectory& traj, const std::string& model,
                         const std::string& status) {
  std::ostringstream buf;
  buf.imbue(std::locale::classic());
  buf << std::setprecision(10);
  if (!model.empty()) buf << "model: " << model << '\n';
  buf << "status: " << status << '\n';
  buf << "samples: " << r.samples << '\n';
  buf << "time span: " << traj.times.front() << " .. " << traj.times.back() << '\n';
  if (r.decomposable) {
    buf << "max |energy_residual|: " << r.max_energy_residual << '\n';
    buf << "max |entropy_residual|: " << r.max_entropy_residual << '\n';
    buf << "max residuals: " << std::max(r.max_energy_residual, r.max_entropy_residual) << '\n';
  } else {
    buf << "max |energy_residual|: n/a (legacy port, no output map)\n";
    buf << "max |entropy_residual|: n/a (legacy port, sigma_port not decomposable)\n";
  }
  buf << "min sigma_int: " << r.min_sigma_int << '\n';
  buf << "min sigma_port: " << r.min_sigma_port << '\n';
  buf << "entropy produced: " << r.entropy_produced << '\n';
  buf << "entropy exchanged: " << r.entropy_exchanged << '\n';
  os << buf.str();
}

namespace detail {

/// Opens `path` for writing, or hands back `fallback` when the path is empty.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (path.empty()) return;
    file_.open(path, std::ios::binary);
    if (!file_) throw ConfigError("outputs", "cannot write '" + path + "'");
    stream_ = &file_;
  }
  std::ostream& get() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

}  // namespace detail

/// Simulates the configured system and writes the CSV (default: `out`) and the
/// balance report (default: `err`).
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const IphsSystem sys = validated_system(cfg);
    SimulationOptions options;
    options.tol_balance = cfg.tol_balance;
    const SimulationResult result = simulate(sys, cfg.x0, cfg.input, cfg.t0, cfg.t1, cfg.h, options);
    const Trajectory& traj = result.trajectory;

    int code = kSuccess;
    std::string status = "ok";
    std::string message;
    if (result.status == SimulationStatus::DomainExit) {
      code = kDomainExit;
      status = "domain exit at step " + std::to_string(result.failed_step);
      message = result.message;
    } else if (result.status == SimulationStatus::InvariantViolation) {
      code = kInvariantViolation;
      status = "invariant violation at step " + std::to_string(result.failed_step);
      message = result.message;
    } else if (const auto bad = first_violation(traj, cfg.tol_balance)) {
      code = kInvariantViolation;
      status = "invariant violation at step " + std::to_string(*bad);
      std::ostringstream m;
      m << std::setprecision(17) << "t = " << traj.times[*bad]
        << ", energy_residual = " << traj.balances[*bad].energy_residual
        << ", entropy_residual = " << traj.balances[*bad].entropy_residual;
      message = m.str();
    }

    if (!traj.empty()) {
      detail::Sink csv(cfg.out_csv, out);
      write_csv(csv.get(), traj, sys.n(), sys.m());
      detail::Sink report(cfg.out_report, err);
      write_report(report.get(), balance_report(traj), traj, sys.name(), status);
    }
    if (code != kSuccess) err << "iphs run: " << status << (message.empty() ? "" : ": " + message) << '\n';
    return code;
  } catch (const ConfigError& e) {
    err << "iphs run: " << e.what() << '\n';
    return kConfigError;
  } catch (const DomainError& e) {
    err << "iphs run: " << e.what() << '\n';
    return kDomainExit;
  } catch (const Error& e) {
    err << "iphs run: " << e.what() << '\n';
    return kInvariantViolation;
  }
}

namespace detail {

struct CheckLine {
  explicit CheckLine(std::string n, bool passed = true) : name(std::move(n)), pass(passed) {}

  std::string name;
  bool pass = true;
  bool skipped = false;
  double worst = 0.0;
  std::string note;
};

/// Runs `probe` on every sample; it returns the error measure for one draw and
/// throws on contract violations.
inline CheckLine run_check(const std::string& name, std::size_t samples, double tol,
                           const std::function<double(std::size_t)>& probe) {
  CheckLine line(name);
  try {
    for (std::size_t k = 0; k < samples; ++k) {
      const double e = probe(k);
      if (std::isnan(e) || e > line.worst) line.worst = e;
      if (!(e <= tol)) {
        line.pass = false;
        std::ostringstream msg;
        msg << "sample " << k << " error " << e << " exceeds " << tol;
        line.note = msg.str();
        break;
      }
    }
  } catch (const Error& e) {
    line.pass = false;
    line.note = e.what();
  }
  return line;
}

}  // namespace detail

/// Audits the model's structural invariants at `samples` random admissible points.
inline int check(const RunConfig& cfg, std::size_t samples, std::uint64_t seed, std::ostream& out, std::ostream& err,
                 std::optional<double> tol_override = std::nullopt) {
  const double tol = tol_override.value_or(cfg.tol_balance);
  std::vector<detail::CheckLine> lines;

  if (cfg.model.id == "custom") {
    const Matrix& j = cfg.model.custom_structure;
    detail::CheckLine skew("is_skew(J)");
    skew.worst = (j + j.transpose()).cwiseAbs().maxCoeff();
    skew.pass = is_skew(j, 0.0);
    if (!skew.pass) skew.note = "J + J^T != 0";
    lines.push_back(skew);
  }

  std::optional<IphsSystem> built;
  if (lines.empty() || lines.front().pass) {
    try {
      built.emplace(build_system(cfg.model));
      if (!built->domain().bounded()) throw ConfigError("custom.box", "a bounded sampling box is required by check");
    } catch (const ConfigError& e) {
      err << "iphs check: " << e.what() << '\n';
      return kConfigError;
    }
  }

  if (built) {
    const IphsSystem& sys = *built;
    if (cfg.model.id != "custom") lines.emplace_back("is_skew(J)", is_skew(sys.structure().entries(), 0.0));

    BoxSampler sampler(sys.domain(), seed);
    std::vector<Vector> xs, us;
    for (std::size_t k = 0; k < samples; ++k) {
      xs.push_back(sampler.state());
      us.push_back(sampler.input());
    }

    for (const ScalarField* f : {&sys.hamiltonian(), &sys.entropy()}) {
      lines.push_back(detail::run_check("gradient(" + f->name() + ")", samples, kGradientTolerance, [&](std::size_t k) {
        return check_gradient(*f, xs[k], kGradientStep, kGradientTolerance).max_relative_error;
      }));
    }

    lines.push_back(detail::run_check("positivity(gamma)", samples, 0.0, [&](std::size_t k) {
      (void)sys.gamma()(xs[k], sys.hamiltonian().gradient(xs[k]), Vector());
      return 0.0;
    }));
    if (sys.has_irreversible_port()) {
      lines.push_back(detail::run_check("positivity(gamma_port)", samples, 0.0, [&](std::size_t k) {
        (void)sys.irreversible_port().gamma_port()(xs[k], sys.hamiltonian().gradient(xs[k]), us[k]);
        return 0.0;
      }));
    }

    lines.push_back(detail::run_check("drift_orthogonality", samples, kOrthogonalityTolerance, [&](std::size_t k) {
      const Vector d = drift(sys, xs[k]);
      const Vector gh = sys.hamiltonian().gradient(xs[k]);
      const double scale = gh.norm() * d.norm();
      return scale == 0.0 ? 0.0 : std::abs(gh.dot(d)) / scale;
    }));
    lines.push_back(detail::run_check("drift_entropy_production", samples, kEntropyProductionTolerance,
                                      [&](std::size_t k) {
                                        const Vector d = drift(sys, xs[k]);
                                        const double sigma = balance(sys, xs[k], us[k], 0.0).sigma_int;
                                        return relative_difference(sys.entropy().gradient(xs[k]).dot(d), sigma);
                                      }));
    lines.push_back(detail::run_check("sigma_nonnegative", samples, 0.0, [&](std::size_t k) {
      const BalanceSample s = balance(sys, xs[k], us[k], 0.0);
      return std::max({0.0, -s.sigma_int, -s.sigma_port});
    }));

    if (sys.has_irreversible_port()) {
      lines.push_back(detail::run_check("energy_balance", samples, tol, [&](std::size_t k) {
        const BalanceSample s = balance(sys, xs[k], us[k], 0.0);
        return std::abs(s.energy_residual) / (1.0 + std::abs(s.yTu));
      }));
      lines.push_back(detail::run_check("entropy_balance", samples, tol, [&](std::size_t k) {
        const BalanceSample s = balance(sys, xs[k], us[k], 0.0);
        return std::abs(s.entropy_residual) / (1.0 + std::abs(s.dS_dt));
      }));
    } else {
      for (const char* name : {"energy_balance", "entropy_balance"}) {
        detail::CheckLine skipped(name);
        skipped.skipped = true;
        skipped.note = "legacy port has no output map";
        lines.push_back(skipped);
      }
    }
  }

  bool all_pass = true;
  std::ostringstream buf;
  buf.imbue(std::locale::classic());
  buf << std::setprecision(3);
  for (const auto& line : lines) {
    all_pass = all_pass && line.pass;
    buf << std::left << std::setw(28) << line.name << (line.skipped ? "SKIP" : line.pass ? "PASS" : "FAIL");
    if (!line.skipped) buf << "  max error " << line.worst;
    if (!line.note.empty()) buf << "  (" << line.note << ")";
    buf << '\n';
  }
  buf << (all_pass ? "all checks passed" : "some checks FAILED") << '\n';
  out << buf.str();
  return all_pass ? kSuccess : kInvariantViolation;
}

/// Re-summarizes a stored trajectory CSV and re-validates its balance columns.
inline int report(std::istream& csv, double tol, std::ostream& out, std::ostream& err) {
  try {
    const CsvTrajectory data = read_csv(csv);
    const Trajectory& traj = data.trajectory;
    if (traj.empty()) {
      err << "iphs report: trajectory has no rows\n";
      return kConfigError;
    }
    const auto bad = first_violation(traj, tol);
    const std::string status = bad ? "invariant violation at step " + std::to_string(*bad) : "ok";
    write_report(out, balance_report(traj), traj, "", status);
    if (bad) {
      err << "iphs report: " << status << '\n';
      return kInvariantViolation;
    }
    return kSuccess;
  } catch (const Error& e) {
    err << "iphs report: " << e.what() << '\n';
    return kConfigError;
  }
}

}  // namespace iphs::cli
