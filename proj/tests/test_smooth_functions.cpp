#include <gtest/gtest.h>

#include <random>

#include "iphs/models.hpp"
#include "iphs/smooth_functions.hpp"
#include "oracles.hpp"

using iphs::Vector;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) out[i++] = d;
  return out;
}

iphs::ScalarField total_entropy() { return iphs::models::total_entropy(2); }
iphs::ScalarField two_compartment_energy() { return iphs::models::internal_energy(300.0, Vector::Ones(2)); }

}  // namespace

TEST(Eval, LinearEntropy) {
  EXPECT_DOUBLE_EQ(iphs::eval(total_entropy(), vec({2, 3})), 5.0);
  EXPECT_DOUBLE_EQ(iphs::eval(total_entropy(), vec({0, 0})), 0.0);
}

TEST(Eval, InternalEnergyAtReferenceState) {
  // antiderivative of T0 exp(S / c) is c T0 exp(S / c); two compartments at S = 0
  EXPECT_DOUBLE_EQ(iphs::eval(two_compartment_energy(), vec({0, 0})), 600.0);
}

TEST(Eval, DimensionMismatchIsUsageError) {
  EXPECT_THROW(iphs::eval(total_entropy(), vec({1, 2, 3})), iphs::UsageError);
  EXPECT_THROW(iphs::grad(total_entropy(), vec({1})), iphs::UsageError);
}

TEST(Grad, Examples) {
  EXPECT_EQ(iphs::grad(total_entropy(), vec({-4, 7.5})), vec({1, 1}));

  const Vector x = vec({0.0, oracle::kEntropyAt350});
  const Vector g = iphs::grad(two_compartment_energy(), x);
  EXPECT_DOUBLE_EQ(g[0], 300.0);
  EXPECT_NEAR(g[1], 350.0, 1e-12 * 350.0);

  EXPECT_EQ(iphs::grad(iphs::fields::constant(3, 2.5), vec({1, 2, 3})), Vector::Zero(3));
}

TEST(Grad, IsDeterministic) {
  const auto h = two_compartment_energy();
  const Vector x = vec({0.3, -0.2});
  const Vector first = iphs::grad(h, x);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(iphs::grad(h, x), first);
}

TEST(CheckGradient, LinearIsExact) {
  const auto r = iphs::check_gradient(total_entropy(), vec({1, 1}), 1e-5, 1e-6);
  EXPECT_TRUE(r.pass);
  EXPECT_LT(r.max_relative_error, 1e-10);
}

TEST(CheckGradient, InternalEnergy) {
  EXPECT_TRUE(iphs::check_gradient(two_compartment_energy(), vec({0, 0.1542}), 1e-5, 1e-6).pass);
}

TEST(CheckGradient, DetectsWrongGradient) {
  const iphs::ScalarField wrong(
      2, [](const Vector& x) { return x.squaredNorm(); }, [](const Vector& x) { return Vector(4.0 * x); }, "wrong");
  const auto r = iphs::check_gradient(wrong, vec({1.0, -2.0}), 1e-5, 1e-6);
  EXPECT_FALSE(r.pass);
  EXPECT_NEAR(r.max_relative_error, 0.5, 1e-6);  // |2x - 4x| / |4x|
}

TEST(CheckGradient, NonFiniteValueNamesCoordinate) {
  const iphs::ScalarField blowup(
      2, [](const Vector& x) { return x[1] > 0.5 ? std::nan("") : x.sum(); },
      [](const Vector&) { return Vector::Ones(2).eval(); }, "blowup");
  try {
    iphs::check_gradient(blowup, vec({0.0, 0.5}), 1e-3, 1e-6);
    FAIL() << "expected NumericError";
  } catch (const iphs::NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("coordinate 1"), std::string::npos);
  }
}

TEST(CheckGradient, RejectsBadArguments) {
  EXPECT_THROW(iphs::check_gradient(total_entropy(), vec({0, 0}), 0.0, 1e-6), iphs::UsageError);
  EXPECT_THROW(iphs::check_gradient(total_entropy(), vec({0, 0}), 1e-5, -1.0), iphs::UsageError);
}

// Built-in fields pass the finite-difference audit at random states of the model box.
TEST(CheckGradient, BuiltinFieldsAtRandomStates) {
  std::mt19937_64 rng(7);
  // temperatures in [10, 2000] with T0 = 300, c = 1
  std::uniform_real_distribution<double> s(std::log(10.0 / 300.0), std::log(2000.0 / 300.0));
  const auto fields = {two_compartment_energy(), total_entropy(),
                       iphs::models::internal_energy(250.0, vec({0.5, 2.0})),
                       iphs::fields::quadratic(iphs::Matrix::Identity(2, 2))};
  for (const auto& f : fields) {
    for (int k = 0; k < 100; ++k) {
      const Vector x = vec({s(rng), s(rng)});
      const auto r = iphs::check_gradient(f, x, 1e-5, 1e-5);
      EXPECT_TRUE(r.pass) << f.name() << " error " << r.max_relative_error;
    }
  }
}

TEST(Fields, QuadraticRequiresSymmetry) {
  iphs::Matrix q(2, 2);
  q << 1, 2, 0, 1;
  EXPECT_THROW(iphs::fields::quadratic(q), iphs::UsageError);
}
