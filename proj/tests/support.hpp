// Shared helpers for the unit tests: seeded random states and finite
// differences.
#pragma once

#include <random>

#include "pkm/kinematics.hpp"

namespace pkm::test {

inline PlatformPose random_pose(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> x(-0.15, 0.15), z(0.40, 0.70), a(-0.5, 0.5);
  return {x(rng), z(rng), a(rng), a(rng)};
}

inline PlatformGeometry random_geometry(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PlatformGeometry g;
  g.R = 0.25 + 0.2 * u(rng);
  g.Rm = 0.15 + 0.1 * u(rng);
  g.ds = -0.1 + 0.2 * u(rng);
  g.betaFD = deg2rad(10.0 + 160.0 * u(rng));
  g.betaFI = deg2rad(10.0 + 160.0 * u(rng));
  g.betaMD = deg2rad(10.0 + 160.0 * u(rng));
  g.betaMI = deg2rad(10.0 + 160.0 * u(rng));
  return g;
}

/// max_ij |a - b| / max(1, |a_ij|)
template <class A, class B>
double rel_error(const A& a, const B& b) {
  double worst = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      worst = std::max(worst, std::abs(a(i, j) - b(i, j)) / std::max(1.0, std::abs(a(i, j))));
  return worst;
}

}  // namespace pkm::test
