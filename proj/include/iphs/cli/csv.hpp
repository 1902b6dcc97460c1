#pragma once

// Trajectory CSV: t, x0..x(n-1), u0..u(m-1), y0..y(m-1), dH_dt, yTu,
// energy_residual, sigma_int, sigma_port, entropy_flux, dS_dt,
// entropy_residual. Numbers carry 17 significant digits; quantities that do
// not exist (outputs of a legacy port) are left blank.

#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <locale>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "iphs/errors.hpp"
#include "iphs/integrate.hpp"
#include "iphs/linalg.hpp"
#include "iphs/system.hpp"

namespace iphs::cli {

inline constexpr const char* kBalanceColumns[] = {"dH_dt",      "yTu",          "energy_residual", "sigma_int",
                                                  "sigma_port", "entropy_flux", "dS_dt",           "entropy_residual"};

inline std::string csv_header(Eigen::Index n, Eigen::Index m) {
  std::string out = "t";
  for (Eigen::Index i = 0; i < n; ++i) out += ",x" + std::to_string(i);
  for (Eigen::Index i = 0; i < m; ++i) out += ",u" + std::to_string(i);
  for (Eigen::Index i = 0; i < m; ++i) out += ",y" + std::to_string(i);
  for (const char* c : kBalanceColumns) out += std::string(",") + c;
  return out;
}

namespace detail {

inline void put(std::ostream& os, double v) {
  os << ',';
  if (!std::isnan(v)) os << v;
}

}  // namespace detail

inline void write_csv(std::ostream& os, const Trajectory& traj, Eigen::Index n, Eigen::Index m) {
  std::ostringstream buf;
  buf.imbue(std::locale::classic());
  buf.precision(17);
  buf << csv_header(n, m) << '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    buf << traj.times[k];
    for (Eigen::Index i = 0; i < n; ++i) detail::put(buf, traj.states[k][i]);
    for (Eigen::Index i = 0; i < m; ++i) detail::put(buf, traj.inputs[k][i]);
    const Vector& y = traj.outputs[k];
    for (Eigen::Index i = 0; i < m; ++i) detail::put(buf, y.size() == m ? y[i] : std::nan(""));
    const BalanceSample& s = traj.balances[k];
    for (double v : {s.dH_dt, s.yTu, s.energy_residual, s.sigma_int, s.sigma_port, s.entropy_flux, s.dS_dt,
                     s.entropy_residual}) {
      detail::put(buf, v);
    }
    buf << '\n';
  }
  os << buf.str();
}

/// A trajectory read back from CSV. Outputs are empty vectors where the file has blanks.
struct CsvTrajectory {
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  Trajectory trajectory;
};

namespace detail {

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline double parse_cell(std::string_view cell, std::size_t line) {
  if (cell.empty()) return std::nan("");
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw UsageError("csv line " + std::to_string(line) + ": cannot parse '" + std::string(cell) + "'");
  }
  return v;
}

}  // namespace detail

inline CsvTrajectory read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw UsageError("csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = detail::split(line);
  CsvTrajectory out;
  for (const auto& col : header) {
    if (col.size() > 1 && col[0] == 'x' && std::isdigit(static_cast<unsigned char>(col[1]))) ++out.n;
    if (col.size() > 1 && col[0] == 'u' && std::isdigit(static_cast<unsigned char>(col[1]))) ++out.m;
  }
  if (out.n == 0 || out.m == 0 || line != csv_header(out.n, out.m)) {
    throw UsageError("csv: unexpected header '" + line + "'");
  }

  Trajectory& traj = out.trajectory;
  const std::size_t width = header.size();
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = detail::split(line);
    if (cells.size() != width) {
      throw UsageError("csv line " + std::to_string(line_no) + ": expected " + std::to_string(width) + " columns");
    }
    std::size_t c = 0;
    const auto next = [&] { return detail::parse_cell(cells[c++], line_no); };
    traj.times.push_back(next());
    Vector x(out.n), u(out.m), y(out.m);
    for (Eigen::Index i = 0; i < out.n; ++i) x[i] = next();
    for (Eigen::Index i = 0; i < out.m; ++i) u[i] = next();
    for (Eigen::Index i = 0; i < out.m; ++i) y[i] = next();
    BalanceSample s;
    s.t = traj.times.back();
    s.dH_dt = next();
    s.yTu = next();
    s.energy_residual = next();
    s.sigma_int = next();
    s.sigma_port = next();
    s.entropy_flux = next();
    s.dS_dt = next();
    s.entropy_residual = next();
    s.decomposable = !std::isnan(s.energy_residual);
    traj.states.push_back(std::move(x));
    traj.inputs.push_back(std::move(u));
    traj.outputs.push_back(y.hasNaN() ? Vector() : y);
    traj.balances.push_back(s);
  }
  return out;
}

}  // namespace iphs::cli
