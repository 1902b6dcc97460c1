#pragma once

// JSON run configuration. See configs/README.md for the schema.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "iphs/brackets.hpp"
#include "iphs/errors.hpp"
#include "iphs/integrate.hpp"
#include "iphs/linalg.hpp"
#include "iphs/models.hpp"
#include "iphs/smooth_functions.hpp"
#include "iphs/system.hpp"

namespace iphs::cli {

using json = nlohmann::json;

/// Invalid configuration. `field` is a dotted path such as "parameters.lambda";
/// `line` is set for syntax errors.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what, std::size_t line = 0)
      : Error(format(field, what, line)), field_(std::move(field)), line_(line) {}

  const std::string& field() const noexcept { return field_; }
  std::size_t line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& field, const std::string& what, std::size_t line) {
    std::string out = "config error";
    if (line > 0) out += " (line " + std::to_string(line) + ")";
    if (!field.empty()) out += " at '" + field + "'";
    return out + ": " + what;
  }

  std::string field_;
  std::size_t line_;
};

struct ModelSpec {
  std::string id;  // a built-in model id or "custom"
  models::TwoCompartmentParams params;
  Vector tau = Vector::Ones(1);
  json custom;             // raw "custom" block, only for id == "custom"
  Matrix custom_structure;  // J as entered, kept so audits can report is_skew
};

struct RunConfig {
  ModelSpec model;
  Vector x0;
  InputSignal input = InputSignal::constant(0.0);
  double t0 = 0.0;
  double t1 = 1.0;
  double h = 1e-3;
  double tol_balance = kDefaultBalanceTolerance;
  std::string out_csv;
  std::string out_report;
};

namespace detail {

inline std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

inline void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!key.empty() && key.front() == '_') continue;  // comment keys
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ConfigError(join(path, key), "unknown key");
  }
}

inline const json& require(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) throw ConfigError(join(path, key), "missing required field");
  return obj.at(key);
}

inline double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(path, "expected a finite number");
  return d;
}

inline double positive(const json& v, const std::string& path) {
  const double d = number(v, path);
  if (!(d > 0.0)) throw ConfigError(path, "must be > 0");
  return d;
}

/// A number or an array of numbers.
inline Vector vector(const json& v, const std::string& path) {
  if (v.is_number()) return Vector::Constant(1, number(v, path));
  if (!v.is_array() || v.empty()) throw ConfigError(path, "expected a number or a non-empty array of numbers");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = number(v[i], path + "[" + std::to_string(i) + "]");
  return out;
}

inline Matrix matrix(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw ConfigError(path, "expected a non-empty array of rows");
  const std::size_t rows = v.size();
  if (!v[0].is_array() || v[0].empty()) throw ConfigError(path + "[0]", "expected a non-empty row");
  const std::size_t cols = v[0].size();
  Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string row_path = path + "[" + std::to_string(r) + "]";
    if (!v[r].is_array() || v[r].size() != cols) throw ConfigError(row_path, "rows must all have " + std::to_string(cols) + " entries");
    for (std::size_t c = 0; c < cols; ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = number(v[r][c], row_path + "[" + std::to_string(c) + "]");
    }
  }
  return out;
}

inline models::TwoCompartmentParams parse_params(const json& obj, const std::string& path) {
  models::TwoCompartmentParams p;
  if (obj.is_null()) return p;
  check_keys(obj, path, {"lambda", "lambda_e", "T0", "c1", "c2", "T_min", "T_max", "u_min", "u_max"});
  const auto read = [&](const char* key, double& slot) {
    if (obj.contains(key)) slot = number(obj.at(key), join(path, key));
  };
  read("lambda", p.lambda);
  read("lambda_e", p.lambda_e);
  read("T0", p.T0);
  read("c1", p.c1);
  read("c2", p.c2);
  read("T_min", p.T_min);
  read("T_max", p.T_max);
  read("u_min", p.u_min);
  read("u_max", p.u_max);
  try {
    p.validate();
  } catch (const InvalidParameter& e) {
    throw ConfigError(join(path, e.field()), e.what());
  }
  return p;
}

inline InputSignal parse_input(const json& obj, const std::string& path) {
  if (obj.is_number()) return InputSignal::constant(number(obj, path));
  const std::string kind = require(obj, path, "kind").is_string() ? obj.at("kind").get<std::string>() : "";
  try {
    if (kind == "constant") {
      check_keys(obj, path, {"kind", "value"});
      return InputSignal(InputSignal::Constant{vector(require(obj, path, "value"), join(path, "value"))});
    }
    if (kind == "step") {
      check_keys(obj, path, {"kind", "before", "after", "t_switch"});
      return InputSignal(InputSignal::Step{vector(require(obj, path, "before"), join(path, "before")),
                                           vector(require(obj, path, "after"), join(path, "after")),
                                           number(require(obj, path, "t_switch"), join(path, "t_switch"))});
    }
    if (kind == "sinusoid") {
      check_keys(obj, path, {"kind", "mean", "amplitude", "period", "phase"});
      InputSignal::Sinusoid s{vector(require(obj, path, "mean"), join(path, "mean")),
                              vector(require(obj, path, "amplitude"), join(path, "amplitude")),
                              positive(require(obj, path, "period"), join(path, "period")), 0.0};
      if (obj.contains("phase")) s.phase = number(obj.at("phase"), join(path, "phase"));
      return InputSignal(std::move(s));
    }
    if (kind == "table") {
      check_keys(obj, path, {"kind", "breakpoints"});
      const json& rows = require(obj, path, "breakpoints");
      const std::string rows_path = join(path, "breakpoints");
      if (!rows.is_array() || rows.empty()) throw ConfigError(rows_path, "expected a non-empty array of [t, value]");
      InputSignal::Table table;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::string row_path = rows_path + "[" + std::to_string(i) + "]";
        if (!rows[i].is_array() || rows[i].size() != 2) throw ConfigError(row_path, "expected [t, value]");
        table.times.push_back(number(rows[i][0], row_path + "[0]"));
        table.values.push_back(vector(rows[i][1], row_path + "[1]"));
      }
      return InputSignal(std::move(table));
    }
  } catch (const UsageError& e) {
    throw ConfigError(path, e.what());
  }
  throw ConfigError(join(path, "kind"), "expected one of constant, step, sinusoid, table");
}

inline ScalarField parse_field(const json& obj, const std::string& path, Eigen::Index n, const char* name) {
  const std::string kind = require(obj, path, "kind").is_string() ? obj.at("kind").get<std::string>() : "";
  ScalarField field = [&]() -> ScalarField {
    if (kind == "exponential") {
      check_keys(obj, path, {"kind", "T0", "capacities"});
      const double t0 = positive(require(obj, path, "T0"), join(path, "T0"));
      const Vector c = vector(require(obj, path, "capacities"), join(path, "capacities"));
      for (Eigen::Index i = 0; i < c.size(); ++i) {
        if (!(c[i] > 0.0)) throw ConfigError(join(path, "capacities") + "[" + std::to_string(i) + "]", "must be > 0");
      }
      return models::internal_energy(t0, c);
    }
    if (kind == "linear") {
      check_keys(obj, path, {"kind", "coefficients"});
      return fields::linear(vector(require(obj, path, "coefficients"), join(path, "coefficients")), name);
    }
    if (kind == "quadratic") {
      check_keys(obj, path, {"kind", "Q"});
      try {
        return fields::quadratic(matrix(require(obj, path, "Q"), join(path, "Q")), name);
      } catch (const UsageError& e) {
        throw ConfigError(join(path, "Q"), e.what());
      }
    }
    throw ConfigError(join(path, "kind"), "expected one of exponential, linear, quadratic");
  }();
  if (static_cast<Eigen::Index>(field.dim()) != n) {
    throw ConfigError(path, "dimension " + std::to_string(field.dim()) + " does not match J (" + std::to_string(n) + ")");
  }
  return field;
}

/// Drift gamma: "constant" value, or "inverse_product" lambda / prod_i dH/dx_i.
inline GammaFn parse_gamma(const json& obj, const std::string& path) {
  const std::string kind = require(obj, path, "kind").is_string() ? obj.at("kind").get<std::string>() : "";
  if (kind == "constant") {
    check_keys(obj, path, {"kind", "value"});
    const double v = number(require(obj, path, "value"), join(path, "value"));
    return GammaFn([v](const Vector&, const Vector&, const Vector&) { return v; }, "gamma");
  }
  if (kind == "inverse_product") {
    check_keys(obj, path, {"kind", "lambda"});
    const double lambda = number(require(obj, path, "lambda"), join(path, "lambda"));
    return GammaFn([lambda](const Vector&, const Vector& grad_h, const Vector&) { return lambda / grad_h.prod(); },
                   "gamma");
  }
  throw ConfigError(join(path, "kind"), "expected one of constant, inverse_product");
}

/// Port gamma: "constant" value, or "inverse_product" lambda / (prod_k (g^T dH/dx)_k * prod_k u_k).
inline GammaFn parse_gamma_port(const json& obj, const std::string& path, const Matrix& g) {
  const std::string kind = require(obj, path, "kind").is_string() ? obj.at("kind").get<std::string>() : "";
  if (kind == "constant") {
    check_keys(obj, path, {"kind", "value"});
    const double v = number(require(obj, path, "value"), join(path, "value"));
    return GammaFn([v](const Vector&, const Vector&, const Vector&) { return v; }, "gamma_port");
  }
  if (kind == "inverse_product") {
    check_keys(obj, path, {"kind", "lambda"});
    const double lambda = number(require(obj, path, "lambda"), join(path, "lambda"));
    return GammaFn(
        [lambda, g](const Vector&, const Vector& grad_h, const Vector& u) {
          return lambda / ((g.transpose() * grad_h).prod() * u.prod());
        },
        "gamma_port");
  }
  throw ConfigError(join(path, "kind"), "expected one of constant, inverse_product");
}

inline AdmissibleBox parse_box(const json& obj, const std::string& path, Eigen::Index n, Eigen::Index m) {
  AdmissibleBox box = AdmissibleBox::unbounded(n, m);
  if (obj.is_null()) return box;
  check_keys(obj, path, {"x_min", "x_max", "u_min", "u_max"});
  const auto read = [&](const char* key, Vector& slot) {
    if (!obj.contains(key)) return;
    Vector v = vector(obj.at(key), join(path, key));
    if (v.size() != slot.size()) throw ConfigError(join(path, key), "expected length " + std::to_string(slot.size()));
    slot = std::move(v);
  };
  read("x_min", box.x_lo);
  read("x_max", box.x_hi);
  read("u_min", box.u_lo);
  read("u_max", box.u_hi);
  return box;
}

}  // namespace detail

/// Builds the system described by a model spec. A custom J that is not skew
/// is a ConfigError naming is_skew.
inline IphsSystem build_system(const ModelSpec& spec) {
  if (models::is_builtin(spec.id)) {
    try {
      return models::make_builtin(spec.id, spec.params, spec.tau);
    } catch (const UsageError& e) {
      throw ConfigError("tau", e.what());
    }
  }
  const std::string path = "custom";
  const json& c = spec.custom;
  const Matrix& j = spec.custom_structure;
  if (!is_skew(j, 0.0)) throw ConfigError(path + ".J", "structure matrix is not skew-symmetric (is_skew failed)");
  const Eigen::Index n = j.rows();
  ScalarField h = detail::parse_field(detail::require(c, path, "hamiltonian"), path + ".hamiltonian", n, "H");
  ScalarField s = detail::parse_field(detail::require(c, path, "entropy"), path + ".entropy", n, "S");
  GammaFn gamma = detail::parse_gamma(detail::require(c, path, "gamma"), path + ".gamma");

  const std::string port_path = path + ".port";
  const json& port = detail::require(c, path, "port");
  const std::string kind = detail::require(port, port_path, "kind").is_string() ? port.at("kind").get<std::string>() : "";
  if (kind == "irreversible") {
    detail::check_keys(port, port_path, {"kind", "g", "tau", "gamma_port"});
    const Matrix g = detail::matrix(detail::require(port, port_path, "g"), port_path + ".g");
    if (g.rows() != n) throw ConfigError(port_path + ".g", "expected " + std::to_string(n) + " rows");
    Vector tau = port.contains("tau") ? detail::vector(port.at("tau"), port_path + ".tau") : Vector::Ones(g.cols());
    if (tau.size() != g.cols()) throw ConfigError(port_path + ".tau", "expected length " + std::to_string(g.cols()));
    GammaFn gamma_port = detail::parse_gamma_port(detail::require(port, port_path, "gamma_port"), port_path + ".gamma_port", g);
    AdmissibleBox box = detail::parse_box(c.value("box", json()), path + ".box", n, g.cols());
    return IphsSystem(h, s, StructureMatrix(j), gamma, IrreversiblePort(PortMatrix(g), gamma_port, tau), box, "custom");
  }
  if (kind == "legacy") {
    detail::check_keys(port, port_path, {"kind", "W", "g"});
    const Vector w = detail::vector(detail::require(port, port_path, "W"), port_path + ".W");
    const Matrix g = detail::matrix(detail::require(port, port_path, "g"), port_path + ".g");
    if (w.size() != n) throw ConfigError(port_path + ".W", "expected length " + std::to_string(n));
    if (g.rows() != n) throw ConfigError(port_path + ".g", "expected " + std::to_string(n) + " rows");
    LegacyPort legacy;
    legacy.m = g.cols();
    legacy.W = [w](const Vector&, const Vector&) { return w; };
    legacy.g = [g](const Vector&, const Vector&) { return g; };
    AdmissibleBox box = detail::parse_box(c.value("box", json()), path + ".box", n, g.cols());
    return IphsSystem(h, s, StructureMatrix(j), gamma, legacy, box, "custom");
  }
  throw ConfigError(port_path + ".kind", "expected one of irreversible, legacy");
}

inline RunConfig parse_config(const json& root) {
  detail::check_keys(root, "", {"model", "parameters", "tau", "custom", "x0", "input", "time", "tol_balance", "outputs"});
  RunConfig cfg;

  const json& model = detail::require(root, "", "model");
  if (!model.is_string()) throw ConfigError("model", "expected a model identifier string");
  cfg.model.id = model.get<std::string>();
  if (models::is_builtin(cfg.model.id)) {
    if (root.contains("custom")) throw ConfigError("custom", "only allowed with model \"custom\"");
    cfg.model.params = detail::parse_params(root.value("parameters", json()), "parameters");
    if (root.contains("tau")) {
      cfg.model.tau = detail::vector(root.at("tau"), "tau");
      if (cfg.model.tau.size() != 1) throw ConfigError("tau", "two-compartment models have a single port");
    }
  } else if (cfg.model.id == "custom") {
    if (root.contains("parameters") || root.contains("tau")) {
      throw ConfigError(root.contains("parameters") ? "parameters" : "tau",
                        "custom models carry their parameters inside \"custom\"");
    }
    cfg.model.custom = detail::require(root, "", "custom");
    detail::check_keys(cfg.model.custom, "custom", {"J", "hamiltonian", "entropy", "gamma", "port", "box"});
    cfg.model.custom_structure = detail::matrix(detail::require(cfg.model.custom, "custom", "J"), "custom.J");
    if (cfg.model.custom_structure.rows() != cfg.model.custom_structure.cols()) {
      throw ConfigError("custom.J", "structure matrix must be square");
    }
  } else {
    throw ConfigError("model", "unknown model '" + cfg.model.id + "'; expected " +
                                   std::string(models::kTwoCompartmentLegacy) + ", " +
                                   std::string(models::kTwoCompartmentIrreversible) + " or custom");
  }

  const json& x0 = detail::require(root, "", "x0");
  if (x0.is_object()) {
    detail::check_keys(x0, "x0", {"temperatures"});
    if (!models::is_builtin(cfg.model.id)) throw ConfigError("x0.temperatures", "only available for built-in models");
    const Vector temps = detail::vector(detail::require(x0, "x0", "temperatures"), "x0.temperatures");
    if (temps.size() != 2) throw ConfigError("x0.temperatures", "expected two temperatures");
    for (Eigen::Index i = 0; i < 2; ++i) {
      if (!(temps[i] > 0.0)) throw ConfigError("x0.temperatures[" + std::to_string(i) + "]", "must be > 0");
    }
    cfg.x0 = models::two_compartment_state(cfg.model.params, temps[0], temps[1]);
  } else {
    cfg.x0 = detail::vector(x0, "x0");
  }

  cfg.input = detail::parse_input(detail::require(root, "", "input"), "input");

  const json& time = detail::require(root, "", "time");
  detail::check_keys(time, "time", {"t0", "t1", "h"});
  cfg.t0 = time.contains("t0") ? detail::number(time.at("t0"), "time.t0") : 0.0;
  cfg.t1 = detail::number(detail::require(time, "time", "t1"), "time.t1");
  cfg.h = detail::positive(detail::require(time, "time", "h"), "time.h");
  if (!(cfg.t1 > cfg.t0)) throw ConfigError("time.t1", "must be greater than t0");
  try {
    (void)iphs::detail::step_count(cfg.t0, cfg.t1, cfg.h);
  } catch (const UsageError& e) {
    throw ConfigError("time.h", e.what());
  }

  if (root.contains("tol_balance")) cfg.tol_balance = detail::positive(root.at("tol_balance"), "tol_balance");
  if (root.contains("outputs")) {
    const json& out = root.at("outputs");
    detail::check_keys(out, "outputs", {"csv", "report"});
    const auto path_of = [&out](const char* key) -> std::string {
      if (!out.contains(key)) return {};
      if (!out.at(key).is_string()) throw ConfigError(std::string("outputs.") + key, "expected a path string");
      return out.at(key).get<std::string>();
    };
    cfg.out_csv = path_of("csv");
    cfg.out_report = path_of("report");
  }
  return cfg;
}

inline RunConfig parse_config_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t byte = std::min(e.byte, text.size());
    const auto line = static_cast<std::size_t>(1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte > 0 ? byte - 1 : 0), '\n'));
    throw ConfigError("", e.what(), line);
  }
  return parse_config(root);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

/// Builds the system and checks x0 and the input against it.
inline IphsSystem validated_system(const RunConfig& cfg) {
  IphsSystem sys = build_system(cfg.model);
  if (cfg.x0.size() != sys.n()) throw ConfigError("x0", "expected length " + std::to_string(sys.n()));
  if (!sys.domain().contains_state(cfg.x0)) throw ConfigError("x0", "initial state outside the admissible domain");
  if (cfg.input.dim() != sys.m()) throw ConfigError("input", "expected dimension " + std::to_string(sys.m()));
  return sys;
}

}  // namespace iphs::cli
