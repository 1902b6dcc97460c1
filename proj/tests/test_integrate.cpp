#include <gtest/gtest.h>

#include <cmath>

#include "iphs/integrate.hpp"
#include "iphs/models.hpp"
#include "oracles.hpp"

using iphs::InputSignal;
using iphs::Vector;
using iphs::models::TwoCompartmentParams;

namespace {

const TwoCompartmentParams kParams{};

Vector state(double T1, double T2) { return iphs::models::two_compartment_state(kParams, T1, T2); }

Vector temperatures(const iphs::IphsSystem& sys, const Vector& x) { return sys.hamiltonian().gradient(x); }

double max_state_error(const iphs::Trajectory& coarse, const iphs::Trajectory& fine) {
  // fine has a step that divides the coarse one; compare at the coarse sample times
  const std::size_t stride = (fine.size() - 1) / (coarse.size() - 1);
  double err = 0.0;
  for (std::size_t k = 0; k < coarse.size(); ++k) {
    err = std::max(err, (coarse.states[k] - fine.states[k * stride]).lpNorm<Eigen::Infinity>());
  }
  return err;
}

}  // namespace

TEST(Rk4Step, ZeroField) {
  Vector x(2);
  x << 1.0, -3.0;
  EXPECT_EQ(iphs::rk4_step([](double, const Vector& v) { return Vector::Zero(v.size()).eval(); }, 0.0, x, 0.1), x);
}

TEST(Rk4Step, ConstantFieldIsExact) {
  Vector a(2), x(2);
  a << 0.5, -0.25;
  x << 1.0, 2.0;
  EXPECT_EQ(iphs::rk4_step([&a](double, const Vector&) { return a; }, 0.0, x, 0.5), (x + 0.5 * a).eval());
}

TEST(Rk4Step, ExponentialDecay) {
  const Vector next = iphs::rk4_step([](double, const Vector& v) { return (-v).eval(); }, 0.0, Vector::Ones(1), 0.1);
  EXPECT_NEAR(next[0], oracle::kRk4ExpDecay, 1e-15);
  EXPECT_LE(std::abs(next[0] - std::exp(-0.1)), 1e-7);
}

TEST(Rk4Step, ReportsFailingStage) {
  const auto field = [](double t, const Vector& v) -> Vector {
    if (t > 0.0) throw iphs::DomainError("left the box");
    return v;
  };
  try {
    iphs::rk4_step(field, 0.0, Vector::Ones(1), 0.1);
    FAIL() << "expected IntegrationError";
  } catch (const iphs::IntegrationError& e) {
    EXPECT_EQ(e.stage(), 2u);
    EXPECT_TRUE(e.domain_exit());
  }
  EXPECT_THROW(iphs::rk4_step(field, 0.0, Vector::Ones(1), 0.0), iphs::UsageError);
}

TEST(InputSignal, Kinds) {
  EXPECT_EQ(InputSignal::constant(400.0)(12.0)[0], 400.0);

  const InputSignal step(InputSignal::Step{Vector::Constant(1, 300.0), Vector::Constant(1, 350.0), 2.0});
  EXPECT_EQ(step(1.999)[0], 300.0);
  EXPECT_EQ(step(2.0)[0], 350.0);

  const InputSignal sine(InputSignal::Sinusoid{Vector::Constant(1, 300.0), Vector::Constant(1, 10.0), 4.0, 0.0});
  EXPECT_NEAR(sine(1.0)[0], 310.0, 1e-12);
  EXPECT_NEAR(sine(3.0)[0], 290.0, 1e-12);

  const InputSignal table(InputSignal::Table{{0.0, 1.0, 5.0},
                                             {Vector::Constant(1, 1.0), Vector::Constant(1, 2.0), Vector::Constant(1, 3.0)}});
  EXPECT_EQ(table(-1.0)[0], 1.0);
  EXPECT_EQ(table(0.5)[0], 1.0);
  EXPECT_EQ(table(1.0)[0], 2.0);
  EXPECT_EQ(table(7.0)[0], 3.0);
  EXPECT_EQ(table.dim(), 1);
}

TEST(InputSignal, Validation) {
  EXPECT_THROW(InputSignal(InputSignal::Step{Vector::Ones(1), Vector::Ones(2), 0.0}), iphs::UsageError);
  EXPECT_THROW(InputSignal(InputSignal::Sinusoid{Vector::Ones(1), Vector::Ones(1), 0.0, 0.0}), iphs::UsageError);
  EXPECT_THROW(InputSignal(InputSignal::Table{{1.0, 1.0}, {Vector::Ones(1), Vector::Ones(1)}}), iphs::UsageError);
  EXPECT_THROW(InputSignal(InputSignal::Table{{}, {}}), iphs::UsageError);
}

TEST(Simulate, EquilibriumIsConstant) {
  const auto sys = iphs::models::two_compartment_irreversible(kParams);
  const auto r = iphs::simulate(sys, state(300, 300), InputSignal::constant(300.0), 0.0, 5.0, 0.01);
  ASSERT_TRUE(r.ok()) << r.message;
  EXPECT_EQ(r.trajectory.size(), 501u);
  for (const auto& x : r.trajectory.states) EXPECT_EQ(x, state(300, 300));
  const auto report = iphs::balance_report(r.trajectory);
  EXPECT_EQ(report.max_energy_residual, 0.0);
  EXPECT_EQ(report.max_entropy_residual, 0.0);
  EXPECT_EQ(report.entropy_produced, 0.0);
  EXPECT_EQ(report.entropy_exchanged, 0.0);
}

TEST(Simulate, TimesAreEquallySpaced) {
  const auto sys = iphs::models::two_compartment_irreversible(kParams);
  const auto r = iphs::simulate(sys, state(300, 350), InputSignal::constant(400.0), 1.0, 2.0, 0.1);
  ASSERT_TRUE(r.ok());
  ASSERT_EQ(r.trajectory.size(), 11u);
  for (std::size_t k = 0; k < 11; ++k) EXPECT_DOUBLE_EQ(r.trajectory.times[k], 1.0 + 0.1 * static_cast<double>(k));
  EXPECT_EQ(r.trajectory.outputs.front().size(), 1);
}

TEST(Simulate, RejectsBadSpan) {
  const auto sys = iphs::models::two_compartment_irreversible(kParams);
  const auto u = InputSignal::constant(400.0);
  EXPECT_THROW(iphs::simulate(sys, state(300, 350), u, 1.0, 1.0, 0.1), iphs::UsageError);
  EXPECT_THROW(iphs::simulate(sys, state(300, 350), u, 0.0, 1.0, -0.1), iphs::UsageError);
  EXPECT_THROW(iphs::simulate(sys, state(300, 350), u, 0.0, 1.0, 0.3), iphs::UsageError);
  EXPECT_THROW(iphs::simulate(sys, state(300, 350), InputSignal::constant(Vector::Ones(2)), 0.0, 1.0, 0.1),
               iphs::UsageError);
  EXPECT_THROW(iphs::simulate(sys, state(5, 350), u, 0.0, 1.0, 0.1), iphs::DomainError);
}

TEST(Simulate, IsolatedConservesEnergyAndProducesEntropy) {
  const auto sys = iphs::models::two_compartment_isolated(kParams);
  const auto r = iphs::simulate(sys, state(300, 350), InputSignal::constant(300.0), 0.0, 10.0, 1e-3);
  ASSERT_TRUE(r.ok()) << r.message;
  const double h0 = sys.hamiltonian().value(r.trajectory.states.front());
  for (std::size_t k = 1; k < r.trajectory.size(); ++k) {
    ASSERT_LE(std::abs(sys.hamiltonian().value(r.trajectory.states[k]) - h0) / h0, 1e-10);
  }
  const Vector t_end = temperatures(sys, r.trajectory.states.back());
  EXPECT_NEAR(t_end[0], t_end[1], 1e-6);
}

TEST(Simulate, RelaxesToThermostat) {
  const auto sys = iphs::models::two_compartment_irreversible(kParams);
  const auto r = iphs::simulate(sys, state(300, 300), InputSignal::constant(320.0), 0.0, 100.0, 1e-2);
  ASSERT_TRUE(r.ok()) << r.message;
  const Vector t = temperatures(sys, r.trajectory.states.back());
  EXPECT_LE(std::abs(t[0] - 320.0) / 320.0, 1e-3);
  EXPECT_LE(std::abs(t[1] - 320.0) / 320.0, 1e-3);

  const auto ref = iphs::simulate(sys, state(300, 300), InputSignal::constant(320.0), 0.0, 100.0, 1e-3);
  ASSERT_TRUE(ref.ok());
  EXPECT_LE(iphs::relative_difference(temperatures(sys, r.trajectory.states.back()),
                                      temperatures(sys, ref.trajectory.states.back())),
            1e-6);
}

TEST(Simulate, DomainExitKeepsPartialTrajectory) {
  TwoCompartmentParams narrow = kParams;
  narrow.T_max = 330.0;
  const auto sys = iphs::models::two_compartment_irreversible(narrow);
  const auto r = iphs::simulate(sys, iphs::models::two_compartment_state(narrow, 300, 300),
                                InputSignal::constant(400.0), 0.0, 20.0, 0.01);
  EXPECT_EQ(r.status, iphs::SimulationStatus::DomainExit);
  EXPECT_GT(r.trajectory.size(), 1u);
  EXPECT_LT(r.trajectory.size(), 2001u);
  EXPECT_EQ(r.failed_step, r.trajectory.size());
  EXPECT_NE(r.message.find("stage"), std::string::npos);
}

TEST(Simulate, AbortsOnBalanceViolation) {
  const auto sys = iphs::models::two_compartment_irreversible(kParams);
  iphs::SimulationOptions strict;
  strict.tol_balance = 1e-300;
  strict.abort_factor = 1.0;
  // round-off alone leaves residuals far above 1e-300
  const auto r = iphs::simulate(sys, state(300, 350), InputSignal::constant(400.0), 0.0, 1.0, 0.01, strict);
  EXPECT_EQ(r.status, iphs::SimulationStatus::InvariantViolation);
  EXPECT_EQ(r.trajectory.size(), r.failed_step + 1);
}

TEST(Simulate, ModelErrorIsInvariantViolation) {
  const auto base = iphs::models::two_compartment_irreversible(kParams);
  const iphs::IphsSystem bad(base.hamiltonian(), base.entropy(), base.structure(),
                             iphs::GammaFn([](const Vector&, const Vector&, const Vector&) { return -1.0; }),
                             base.port(), base.domain());
  const auto r = iphs::simulate(bad, state(300, 350), InputSignal::constant(400.0), 0.0, 1.0, 0.1);
  EXPECT_EQ(r.status, iphs::SimulationStatus::InvariantViolation);
  EXPECT_TRUE(r.trajectory.empty());
}

TEST(Simulate, EntropyNondecreasingWithoutPort) {
  const auto sys = iphs::models::two_compartment_isolated(kParams);
  const auto r = iphs::simulate(sys, state(300, 350), InputSignal::constant(300.0), 0.0, 10.0, 1e-3);
  ASSERT_TRUE(r.ok());
  for (std::size_t k = 1; k < r.trajectory.size(); ++k) {
    ASSERT_GE(r.trajectory.states[k].sum(), r.trajectory.states[k - 1].sum()) << "step " << k;
  }
}

TEST(Simulate, FourthOrderConvergence) {
  const auto sys = iphs::models::two_compartment_isolated(kParams);
  const auto u = InputSignal::constant(300.0);
  const Vector x0 = state(300, 350);
  const double h = 0.1;
  const auto coarse = iphs::simulate(sys, x0, u, 0.0, 2.0, h);
  const auto half = iphs::simulate(sys, x0, u, 0.0, 2.0, h / 2);
  const auto ref = iphs::simulate(sys, x0, u, 0.0, 2.0, h / 16);
  ASSERT_TRUE(coarse.ok() && half.ok() && ref.ok());
  const double ratio = max_state_error(coarse.trajectory, ref.trajectory) /
                       max_state_error(half.trajectory, ref.trajectory);
  EXPECT_GE(ratio, 12.0);
  EXPECT_LE(ratio, 20.0);
}

TEST(BalanceReport, IsolatedEntropyProductionMatchesEndpoints) {
  const auto sys = iphs::models::two_compartment_isolated(kParams);
  const auto r = iphs::simulate(sys, state(300, 350), InputSignal::constant(300.0), 0.0, 10.0, 5e-4);
  ASSERT_TRUE(r.ok());
  const auto report = iphs::balance_report(r.trajectory);
  const double ds = sys.entropy().value(r.trajectory.states.back()) - sys.entropy().value(r.trajectory.states.front());
  EXPECT_GT(report.entropy_produced, 0.0);
  EXPECT_LE(oracle::rel(report.entropy_produced, ds), 1e-6);
  EXPECT_FALSE(report.decomposable);
  EXPECT_TRUE(std::isnan(report.max_energy_residual));
}

TEST(BalanceReport, IrreversibleRunHasNonnegativeProduction) {
  const auto sys = iphs::models::two_compartment_irreversible(kParams);
  const auto r = iphs::simulate(sys, state(300, 350), InputSignal::constant(400.0), 0.0, 10.0, 1e-3);
  ASSERT_TRUE(r.ok());
  const auto report = iphs::balance_report(r.trajectory);
  EXPECT_GE(report.min_sigma_port, 0.0);
  EXPECT_GE(report.min_sigma_int, 0.0);
  EXPECT_LE(report.max_energy_residual, 1e-10 * 30.0);
  // S(t1) - S(t0) = produced + exchanged, up to quadrature error
  const double ds = sys.entropy().value(r.trajectory.states.back()) - sys.entropy().value(r.trajectory.states.front());
  EXPECT_LE(oracle::rel(report.entropy_produced + report.entropy_exchanged, ds), 1e-5);
}

TEST(BalanceReport, EmptyIsUsageError) {
  EXPECT_THROW(iphs::balance_report(iphs::Trajectory{}), iphs::UsageError);
}
