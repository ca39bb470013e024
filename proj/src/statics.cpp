#include "pkm/statics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pkm/trajectories.hpp"

namespace pkm {

namespace {

// Limb axis written in the limb's own joint angles.
Vec3 limb_axis(const Vec15& q, int limb) {
  if (limb == 3) {
    const double a = q(coord::q41);
    return {-std::sin(a), 0.0, std::cos(a)};
  }
  const double a = q(2 * limb), b = q(2 * limb + 1);
  return {std::cos(a) * std::sin(b), -std::cos(b), std::sin(a) * std::sin(b)};
}

// Columns of d(axis)/d(joint angles), placed into a 3x15 block.
Mat3x15 limb_axis_jacobian(const Vec15& q, int limb) {
  Mat3x15 J = Mat3x15::Zero();
  if (limb == 3) {
    const double a = q(coord::q41);
    J.col(coord::q41) << -std::cos(a), 0.0, -std::sin(a);
    return J;
  }
  const double a = q(2 * limb), b = q(2 * limb + 1);
  J.col(2 * limb) << -std::sin(a) * std::sin(b), 0.0, std::cos(a) * std::sin(b);
  J.col(2 * limb + 1) << std::cos(a) * std::cos(b), std::sin(b), std::sin(a) * std::cos(b);
  return J;
}

Mat3x15 body_point_jacobian(const PlatformPose& pose, const Vec3& local) {
  Mat3x15 J = Mat3x15::Zero();
  J(0, coord::xm) = 1.0;
  J(2, coord::zm) = 1.0;
  J.col(coord::theta) = rotation_dtheta(pose) * local;
  J.col(coord::psi) = rotation_dpsi(pose) * local;
  return J;
}

double sign0(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

ComPositions com_positions(const PlatformGeometry& geom, const PhysicalParams& phys,
                           const FullCoordinates& c) {
  ComPositions out;
  for (int i = 0; i < kLimbs; ++i) {
    const Vec3 b = base_anchor(geom, i);
    const Vec3 u = limb_axis(c.q, i);
    out.cyl[i] = b + phys.com_cyl[i] * u;
    out.rod[i] = b + (c.q(coord::active(i)) - phys.com_rod[i]) * u;
  }
  const PlatformPose pose = c.pose();
  const Mat3 rot = rotation_matrix(pose);
  const Vec3 origin(pose.xm, 0.0, pose.zm);
  out.platform = origin + rot * phys.com_platform;
  out.point_d = origin + rot * phys.d_point;
  return out;
}

ComJacobians com_velocity_jacobians(const PlatformGeometry& geom, const PhysicalParams& phys,
                                    const FullCoordinates& c) {
  (void)geom;
  ComJacobians J;
  for (int i = 0; i < kLimbs; ++i) {
    const Mat3x15 du = limb_axis_jacobian(c.q, i);
    const int slot = coord::active(i);
    J.cyl[i] = phys.com_cyl[i] * du;
    J.rod[i] = (c.q(slot) - phys.com_rod[i]) * du;
    J.rod[i].col(slot) = limb_axis(c.q, i);
  }
  const PlatformPose pose = c.pose();
  J.platform = body_point_jacobian(pose, phys.com_platform);
  J.point_d = body_point_jacobian(pose, phys.d_point);
  // omega = theta' e_y + psi' Ry(theta) e_z
  J.angular = Mat3x15::Zero();
  J.angular(1, coord::theta) = 1.0;
  J.angular(0, coord::psi) = std::sin(pose.theta);
  J.angular(2, coord::psi) = std::cos(pose.theta);
  return J;
}

Vec15 q_grav(const PlatformGeometry& geom, const PhysicalParams& phys, const FullCoordinates& q) {
  const ComJacobians J = com_velocity_jacobians(geom, phys, q);
  // Only the vertical row of each Jacobian carries weight.
  Vec15 out = Vec15::Zero();
  for (int i = 0; i < kLimbs; ++i) {
    out -= phys.mass_cyl[i] * phys.g * J.cyl[i].row(2).transpose();
    out -= phys.mass_rod[i] * phys.g * J.rod[i].row(2).transpose();
  }
  out -= phys.mass_platform * phys.g * J.platform.row(2).transpose();
  return out;
}

Vec15 q_ext(const PlatformGeometry& geom, const PhysicalParams& phys, const FullCoordinates& q,
            const ExternalWrench& wrench) {
  const ComJacobians J = com_velocity_jacobians(geom, phys, q);
  const Mat3 rot = rotation_matrix(q.pose());
  return J.point_d.transpose() * (rot * wrench.force) +
         J.angular.transpose() * (rot * wrench.torque);
}

Vec15 q_fric(const PhysicalParams& phys, const Vec4& v) {
  Vec15 out = Vec15::Zero();
  for (int i = 0; i < kLimbs; ++i) {
    out(coord::active(i)) = -sign0(v(i)) * (phys.mu_c[i] + phys.mu_v[i] * std::abs(v(i)));
  }
  return out;
}

Mat15x4 q_act_matrix() {
  Mat15x4 a = Mat15x4::Zero();
  a.bottomRows<4>().setIdentity();
  return a;
}

Mat15x4 q_act_matrix_projected(const PlatformGeometry& geom, const PhysicalParams& phys,
                               const FullCoordinates& q) {
  const ComJacobians J = com_velocity_jacobians(geom, phys, q);
  Mat15x4 a;
  for (int i = 0; i < kLimbs; ++i) {
    a.col(i) = J.rod[i].transpose() * limb_axis(q.q, i);
  }
  return a;
}

GeneralizedForces generalized_forces(const PlatformGeometry& geom, const PhysicalParams& phys,
                                     const FullCoordinates& q, const Vec4& q_dot_active,
                                     const ExternalWrench& wrench) {
  GeneralizedForces f;
  f.q_grav = q_grav(geom, phys, q);
  f.q_ext = q_ext(geom, phys, q, wrench);
  f.q_fric = q_fric(phys, q_dot_active);
  f.q_act_matrix = q_act_matrix();
  return f;
}

StaticsSolution inverse_statics(const PlatformGeometry& geom, const PhysicalParams& phys,
                                const FullCoordinates& q, const Vec4& q_dot_active,
                                const ExternalWrench& wrench, double det_scale) {
  const Mat15x4 rs = r_star(geom, q, det_scale);
  const GeneralizedForces gf = generalized_forces(geom, phys, q, q_dot_active, wrench);
  const Vec15 passive = gf.passive_sum();

  StaticsSolution sol;
  const Mat4 m = rs.transpose() * gf.q_act_matrix;
  sol.forces = m.partialPivLu().solve(-rs.transpose() * passive);

  const Vec15 total = passive + gf.q_act_matrix * sol.forces;
  sol.residual = (rs.transpose() * total).lpNorm<Eigen::Infinity>();

  const Mat11x15 phi_q = constraint_jacobian(geom, q);
  const Mat11 s = phi_q.leftCols<11>();
  sol.lagrange_multipliers = s.transpose().partialPivLu().solve(-total.head<11>());
  sol.full_residual =
      (total + phi_q.transpose() * sol.lagrange_multipliers).lpNorm<Eigen::Infinity>();
  sol.power = sol.forces.cwiseProduct(q_dot_active);
  return sol;
}

std::vector<PointStatics> forces_along_path(const PlatformGeometry& geom,
                                            const PhysicalParams& phys,
                                            const ViaPointSeries& series, Exec exec) {
  const std::size_t n = series.size();
  std::vector<PointStatics> out(n);
  std::vector<FullCoordinates> coords(n);

  for_each_index(n, exec, [&](std::size_t k) {
    const ViaPoint& vp = series.points[k];
    PointStatics& ps = out[k];
    ps.t = vp.t;
    try {
      coords[k] = inverse_kinematics(geom, vp.pose);
      const ForwardJacobian fj = forward_jacobian(geom, vp.pose);
      ps.det_phi_x = fj.det;
      ps.q_dot_active = fj.phi_x * vp.rates;
      ps.det_phi_q_s = constraint_jacobian(geom, coords[k]).leftCols<11>().determinant();
    } catch (const Error&) {
      ps.status = PointStatus::unreachable;
      ps.det_phi_x = ps.det_phi_q_s = std::numeric_limits<double>::quiet_NaN();
    }
  });

  double det_scale = 0.0;
  for (const auto& ps : out) {
    if (ps.status == PointStatus::ok) det_scale = std::max(det_scale, std::abs(ps.det_phi_q_s));
  }

  for_each_index(n, exec, [&](std::size_t k) {
    PointStatics& ps = out[k];
    if (ps.status != PointStatus::ok) return;
    try {
      ps.solution = inverse_statics(geom, phys, coords[k], ps.q_dot_active,
                                    series.points[k].wrench, det_scale);
    } catch (const NearSingular&) {
      ps.status = PointStatus::near_singular;
    } catch (const Error&) {
      ps.status = PointStatus::unreachable;
    }
  });

  // Mark the two points bracketing each sign change of det(Phi_x).
  for (std::size_t k = 1; k < n; ++k) {
    const double a = out[k - 1].det_phi_x, b = out[k].det_phi_x;
    if (std::isnan(a) || std::isnan(b) || std::signbit(a) == std::signbit(b)) continue;
    for (std::size_t j : {k - 1, k}) {
      if (out[j].status == PointStatus::ok) out[j].status = PointStatus::near_crossing;
    }
  }
  return out;
}

}  // namespace pkm
