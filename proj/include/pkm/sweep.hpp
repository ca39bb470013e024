// Per-via-point evaluation kernels. Every kernel has a serial reference path
// and an OpenMP path; both write into preallocated slots indexed by point,
// so results do not depend on scheduling.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pkm/model.hpp"

namespace pkm {

enum class Exec { serial, parallel };

/// Calls fn(i) for i in [0, n). fn must not throw.
template <class Fn>
void for_each_index(std::size_t n, Exec exec, Fn&& fn) {
  if (exec == Exec::serial) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const long count = static_cast<long>(n);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < count; ++i) fn(static_cast<std::size_t>(i));
}

/// Number of threads the parallel path will use.
int worker_threads();

/// det(Phi_x) per pose; NaN where the pose is unreachable or degenerate.
std::vector<double> det_phi_x_sweep(const PlatformGeometry& geom,
                                    std::span<const PlatformPose> poses, Exec exec);

/// Active lengths per pose; NaN rows where unreachable.
std::vector<Vec4> active_length_sweep(const PlatformGeometry& geom,
                                      std::span<const PlatformPose> poses, Exec exec);

}  // namespace pkm
