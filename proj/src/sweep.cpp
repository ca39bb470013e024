#include "pkm/sweep.hpp"

#include <limits>

#include <omp.h>

#include "pkm/kinematics.hpp"

namespace pkm {

int worker_threads() { return omp_get_max_threads(); }

std::vector<double> det_phi_x_sweep(const PlatformGeometry& geom,
                                    std::span<const PlatformPose> poses, Exec exec) {
  std::vector<double> out(poses.size());
  for_each_index(poses.size(), exec, [&](std::size_t k) {
    try {
      out[k] = forward_jacobian(geom, poses[k]).det;
    } catch (const Error&) {
      out[k] = std::numeric_limits<double>::quiet_NaN();
    }
  });
  return out;
}

std::vector<Vec4> active_length_sweep(const PlatformGeometry& geom,
                                      std::span<const PlatformPose> poses, Exec exec) {
  std::vector<Vec4> out(poses.size());
  for_each_index(poses.size(), exec, [&](std::size_t k) {
    try {
      out[k] = inverse_kinematics_active(geom, poses[k]);
    } catch (const Error&) {
      out[k].setConstant(std::numeric_limits<double>::quiet_NaN());
    }
  });
  return out;
}

}  // namespace pkm
