// Quasi-static inverse dynamics by coordinate partitioning.
//
// Applied loads (link weights, the patient wrench, actuator friction) are
// mapped to the 15 generalized coordinates through the position Jacobians of
// their application points, then projected onto the four independent
// coordinates with R*. Inertial terms are not modelled.
#pragma once

#include <vector>

#include "pkm/kinematics.hpp"
#include "pkm/sweep.hpp"

namespace pkm {

struct ComJacobians {
  std::array<Mat3x15, 4> cyl;  // d r_{G_i1} / dq
  std::array<Mat3x15, 4> rod;  // d r_{G_i2} / dq
  Mat3x15 platform;            // d r_{G_m} / dq
  Mat3x15 point_d;             // d r_D / dq
  Mat3x15 angular;             // d omega_m / d qdot
};

struct ComPositions {
  std::array<Vec3, 4> cyl;
  std::array<Vec3, 4> rod;
  Vec3 platform;
  Vec3 point_d;
};

/// Positions of every load application point, each written through its own
/// kinematic chain (limb joints for cylinder/rod, platform pose otherwise).
ComPositions com_positions(const PlatformGeometry& geom, const PhysicalParams& phys,
                           const FullCoordinates& q);

ComJacobians com_velocity_jacobians(const PlatformGeometry& geom, const PhysicalParams& phys,
                                    const FullCoordinates& q);

Vec15 q_grav(const PlatformGeometry& geom, const PhysicalParams& phys, const FullCoordinates& q);
Vec15 q_ext(const PlatformGeometry& geom, const PhysicalParams& phys, const FullCoordinates& q,
            const ExternalWrench& wrench);

/// -sign(v) (mu_c + mu_v |v|) in each active slot, sign(0) = 0.
Vec15 q_fric(const PhysicalParams& phys, const Vec4& q_dot_active);

/// Column i carries a unit force of actuator i into its extension slot.
Mat15x4 q_act_matrix();

/// The same map written as the force along the limb axis projected through
/// the rod CoM Jacobian. Equal to q_act_matrix() up to rounding.
Mat15x4 q_act_matrix_projected(const PlatformGeometry& geom, const PhysicalParams& phys,
                               const FullCoordinates& q);

struct GeneralizedForces {
  Vec15 q_grav;
  Vec15 q_ext;
  Vec15 q_fric;
  Mat15x4 q_act_matrix;

  Vec15 passive_sum() const { return q_grav + q_ext + q_fric; }
};

GeneralizedForces generalized_forces(const PlatformGeometry& geom, const PhysicalParams& phys,
                                     const FullCoordinates& q, const Vec4& q_dot_active,
                                     const ExternalWrench& wrench);

struct StaticsSolution {
  Vec4 forces = Vec4::Zero();  // N, positive extends the actuator
  Vec11 lagrange_multipliers = Vec11::Zero();
  double residual = 0.0;       // projected 4-dim equation, inf-norm
  double full_residual = 0.0;  // all 15 rows with the recovered multipliers
  Vec4 power = Vec4::Zero();   // F_i * qdot_i, W
};

/// Solves (R*)^T (Q_grav + Q_ext + A F + Q_fric) = 0 for F, then recovers the
/// multipliers from the secondary rows. Throws NearSingular.
StaticsSolution inverse_statics(const PlatformGeometry& geom, const PhysicalParams& phys,
                                const FullCoordinates& q, const Vec4& q_dot_active,
                                const ExternalWrench& wrench, double det_scale = 0.0);

enum class PointStatus {
  ok = 0,
  near_crossing = 1,  // det(Phi_x) changes sign between this point and a neighbour
  near_singular = 2,  // R* refused; forces not available
  unreachable = 3,
};

struct PointStatics {
  double t = 0.0;
  StaticsSolution solution;
  Vec4 q_dot_active = Vec4::Zero();
  double det_phi_x = 0.0;
  double det_phi_q_s = 0.0;
  PointStatus status = PointStatus::ok;
};

struct ViaPointSeries;

/// Per-point statics along a trajectory. Singularity tests are relative to
/// the path maximum of |det(Phi_q^s)|. Failures are recorded per point.
std::vector<PointStatics> forces_along_path(const PlatformGeometry& geom,
                                            const PhysicalParams& phys,
                                            const ViaPointSeries& series,
                                            Exec exec = Exec::parallel);

}  // namespace pkm
