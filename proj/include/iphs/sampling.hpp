#pragma once

#include <random>

#include "iphs/errors.hpp"
#include "iphs/linalg.hpp"
#include "iphs/system.hpp"

namespace iphs {

/// Uniform draws from a bounded admissible box.
class BoxSampler {
 public:
  BoxSampler(AdmissibleBox box, std::uint64_t seed) : box_(std::move(box)), rng_(seed) {
    if (!box_.bounded()) throw UsageError("BoxSampler: admissible box must be bounded");
  }

  Vector state() { return draw(box_.x_lo, box_.x_hi); }
  Vector input() { return draw(box_.u_lo, box_.u_hi); }

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

 private:
  Vector draw(const Vector& lo, const Vector& hi) {
    Vector v(lo.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = uniform(lo[i], hi[i]);
    return v;
  }

  AdmissibleBox box_;
  std::mt19937_64 rng_;
};

}  // namespace iphs
