// Closed-form inverse kinematics, the eleven loop-closure constraints, their
// Jacobians, Newton-Raphson forward kinematics and singularity metrics.
#pragma once

#include <optional>
#include <span>
#include <vector>

#include "pkm/model.hpp"

namespace pkm {

using Vec7 = Eigen::Matrix<double, 7, 1>;

/// Active limb lengths (q13, q23, q33, q42) from the closed-form expressions.
/// Throws UnreachablePose when a radicand is negative.
Vec4 inverse_kinematics_active(const PlatformGeometry& geom, const PlatformPose& pose);

/// Passive joint angles (q11, q12, q21, q22, q31, q32, q41) consistent with
/// `pose`. Branch: q_i2 in [0, pi], q_i1 = atan2 of the remaining components.
Vec7 solve_secondary_angles(const PlatformGeometry& geom, const PlatformPose& pose);

/// Full 15-vector consistent with `pose` (IK lengths + secondary angles).
FullCoordinates inverse_kinematics(const PlatformGeometry& geom, const PlatformPose& pose);

Vec11 constraint_vector(const PlatformGeometry& geom, const FullCoordinates& q);
Mat11x15 constraint_jacobian(const PlatformGeometry& geom, const FullCoordinates& q);

struct ForwardJacobian {
  Mat4 phi_x;  // d(q13, q23, q33, q42) / d(xm, zm, theta, psi)
  double det = 0.0;
};

ForwardJacobian forward_jacobian(const PlatformGeometry& geom, const PlatformPose& pose);

/// Relative threshold on |det(Phi_q^s)| below which R* is refused.
inline constexpr double kSingularRelTol = 1e-9;

/// Product of column norms of Phi_q^s: an upper bound for |det| (Hadamard).
double hadamard_scale(const Mat11& m);

/// Velocity-distribution matrix [-(Phi_q^s)^-1 Phi_q^i ; I4].
/// `det_scale` > 0 makes the singularity test relative to that value (for
/// example the path maximum of |det|); otherwise the Hadamard bound is used.
/// Throws NearSingular.
Mat15x4 r_star(const PlatformGeometry& geom, const FullCoordinates& q, double det_scale = 0.0);

struct JacobianBundle {
  Vec11 phi;
  Mat11x15 phi_q;
  Mat11 phi_q_s;
  Mat11x4 phi_q_i;
  std::optional<Mat15x4> r_star;  // empty when near singular
  Mat4 phi_x;
  double det_phi_x = 0.0;
  double det_phi_q_s = 0.0;
};

JacobianBundle jacobian_bundle(const PlatformGeometry& geom, const FullCoordinates& q,
                               double det_scale = 0.0);

struct FkOptions {
  double tolerance = 1e-10;  // on ||Phi||_inf
  int max_iterations = 50;
  double max_condition = 1e12;
};

struct FkResult {
  PlatformPose pose;
  Vec7 angles;
  FullCoordinates coords;
  int iterations = 0;
  double residual = 0.0;
};

/// Newton-Raphson on Phi(q_s; q_i) = 0 for the eleven secondary coordinates,
/// started from `seed` (angles taken from the seed pose). Full steps, halved
/// while the residual grows. Throws NoConvergence or IllConditioned.
FkResult forward_kinematics(const PlatformGeometry& geom, const Vec4& q_active,
                            const PlatformPose& seed, const FkOptions& opts = {});

/// det(Phi_x) at every pose. Throws UnreachablePose carrying the index.
std::vector<double> det_along_path(const PlatformGeometry& geom,
                                   std::span<const PlatformPose> poses);

/// det(Phi_q^s) at the IK solution of every pose.
std::vector<double> secondary_det_along_path(const PlatformGeometry& geom,
                                             std::span<const PlatformPose> poses);

}  // namespace pkm
