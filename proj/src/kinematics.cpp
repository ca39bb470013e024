#include "pkm/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pkm {

namespace {

struct Trig {
  double ct, st, cp, sp;
  explicit Trig(const PlatformPose& p)
      : ct(std::cos(p.theta)), st(std::sin(p.theta)), cp(std::cos(p.psi)), sp(std::sin(p.psi)) {}
};

double checked_sqrt(double radicand, double scale, int limb) {
  // Rounding can push an exactly-zero radicand slightly negative.
  if (radicand < 0.0) {
    if (radicand < -1e-12 * std::max(1.0, scale)) throw UnreachablePose(limb);
    return 0.0;
  }
  return std::sqrt(radicand);
}

}  // namespace

Vec4 inverse_kinematics_active(const PlatformGeometry& g, const PlatformPose& p) {
  const Trig t(p);
  const double x = p.xm, z = p.zm, R = g.R, Rm = g.Rm;
  const double cFD = std::cos(g.betaFD), sFD = std::sin(g.betaFD);
  const double cFI = std::cos(g.betaFI), sFI = std::sin(g.betaFI);
  const double cMD = std::cos(g.betaMD), sMD = std::sin(g.betaMD);
  const double cMI = std::cos(g.betaMI), sMI = std::sin(g.betaMI);
  const double base = R * R + Rm * Rm + x * x + z * z;

  const double r1 = R * R + (2.0 * x - 2.0 * t.ct * t.cp * Rm) * R + Rm * Rm +
                    (2.0 * z * t.cp * t.st - 2.0 * t.ct * t.cp * x) * Rm + x * x + z * z;

  const double r2 = base +
                    2.0 * Rm *
                        (R * (cFD * t.ct * sMD * t.sp - cFD * cMD * t.cp * t.ct -
                              cMD * sFD * t.sp - t.cp * sFD * sMD) +
                         t.ct * t.cp * cMD * x - cMD * t.cp * t.st * z -
                         t.ct * sMD * t.sp * x + t.st * t.sp * sMD * z) -
                    2.0 * R * x * cFD;

  const double r3 = base +
                    2.0 * Rm *
                        (R * (-cFI * t.ct * sMI * t.sp - cFI * cMI * t.cp * t.ct +
                              cMI * sFI * t.sp - t.cp * sFI * sMI) +
                         t.ct * t.cp * cMI * x - cMI * t.cp * t.st * z +
                         t.ct * sMI * t.sp * x - t.st * t.sp * sMI * z) -
                    2.0 * R * x * cFI;

  const double r4 = g.ds * g.ds - 2.0 * g.ds * x + x * x + z * z;

  return {checked_sqrt(r1, base, 0), checked_sqrt(r2, base, 1), checked_sqrt(r3, base, 2),
          checked_sqrt(r4, base, 3)};
}

Vec7 solve_secondary_angles(const PlatformGeometry& geom, const PlatformPose& pose) {
  const std::array<Vec3, 4> u = limb_axes(geom, pose);
  Vec7 a;
  // Lateral limbs: u = (c1 s2, -c2, s1 s2).
  for (int i = 0; i < 3; ++i) {
    a(2 * i + 1) = std::acos(std::clamp(-u[i].y(), -1.0, 1.0));
    a(2 * i) = std::atan2(u[i].z(), u[i].x());
  }
  // Central limb: u = (-s41, 0, c41).
  a(6) = std::atan2(-u[3].x(), u[3].z());
  return a;
}

FullCoordinates inverse_kinematics(const PlatformGeometry& geom, const PlatformPose& pose) {
  const Vec4 lengths = inverse_kinematics_active(geom, pose);
  return FullCoordinates::assemble(solve_secondary_angles(geom, pose), pose, lengths);
}

Vec11 constraint_vector(const PlatformGeometry& g, const FullCoordinates& c) {
  const Vec15& q = c.q;
  const Trig t(c.pose());
  const double x = q(coord::xm), z = q(coord::zm), R = g.R, Rm = g.Rm;
  const double cFD = std::cos(g.betaFD), sFD = std::sin(g.betaFD);
  const double cFI = std::cos(g.betaFI), sFI = std::sin(g.betaFI);
  const double cMD = std::cos(g.betaMD), sMD = std::sin(g.betaMD);
  const double cMI = std::cos(g.betaMI), sMI = std::sin(g.betaMI);
  const double c11 = std::cos(q(coord::q11)), s11 = std::sin(q(coord::q11));
  const double c12 = std::cos(q(coord::q12)), s12 = std::sin(q(coord::q12));
  const double c21 = std::cos(q(coord::q21)), s21 = std::sin(q(coord::q21));
  const double c22 = std::cos(q(coord::q22)), s22 = std::sin(q(coord::q22));
  const double c31 = std::cos(q(coord::q31)), s31 = std::sin(q(coord::q31));
  const double c32 = std::cos(q(coord::q32)), s32 = std::sin(q(coord::q32));
  const double c41 = std::cos(q(coord::q41)), s41 = std::sin(q(coord::q41));
  const double q13 = q(coord::q13), q23 = q(coord::q23), q33 = q(coord::q33);
  const double q42 = q(coord::q42);

  Vec11 phi;
  phi(0) = c11 * s12 * q13 - R - x + t.ct * t.cp * Rm;
  phi(1) = -c12 * q13 + t.sp * Rm;
  phi(2) = s11 * s12 * q13 - z - t.st * t.cp * Rm;
  phi(3) = c21 * s22 * q23 + R * cFD - x - t.ct * t.cp * cMD * Rm + t.ct * t.sp * sMD * Rm;
  phi(4) = -c22 * q23 + R * sFD - t.sp * cMD * Rm - t.cp * sMD * Rm;
  // Rigid-body form; the commonly printed version flips the sign of the
  // first platform term, which contradicts the closed-form q23.
  phi(5) = s21 * s22 * q23 - z + t.st * t.cp * cMD * Rm - t.st * t.sp * sMD * Rm;
  phi(6) = c31 * s32 * q33 + R * cFI - x - t.ct * t.cp * cMI * Rm - t.ct * t.sp * sMI * Rm;
  phi(7) = -c32 * q33 - R * sFI - t.sp * cMI * Rm + t.cp * sMI * Rm;
  phi(8) = s31 * s32 * q33 - z + t.st * t.cp * cMI * Rm + t.st * t.sp * sMI * Rm;
  phi(9) = -s41 * q42 + g.ds - x;
  phi(10) = c41 * q42 - z;
  return phi;
}

Mat11x15 constraint_jacobian(const PlatformGeometry& g, const FullCoordinates& c) {
  const Vec15& q = c.q;
  const PlatformPose pose = c.pose();
  const Mat3 dRt = rotation_dtheta(pose);
  const Mat3 dRp = rotation_dpsi(pose);
  Mat11x15 J = Mat11x15::Zero();

  for (int i = 0; i < 3; ++i) {
    const int row = 3 * i;
    const int ca = 2 * i, cb = 2 * i + 1, cl = coord::active(i);
    const double c1 = std::cos(q(ca)), s1 = std::sin(q(ca));
    const double c2 = std::cos(q(cb)), s2 = std::sin(q(cb));
    const double len = q(cl);
    J.block<3, 1>(row, ca) << -s1 * s2 * len, 0.0, c1 * s2 * len;
    J.block<3, 1>(row, cb) << c1 * c2 * len, s2 * len, s1 * c2 * len;
    J.block<3, 1>(row, cl) << c1 * s2, -c2, s1 * s2;
    J(row, coord::xm) = -1.0;
    J(row + 2, coord::zm) = -1.0;
    const Vec3 a = mobile_anchor(g, i);
    J.block<3, 1>(row, coord::theta) = -dRt * a;
    J.block<3, 1>(row, coord::psi) = -dRp * a;
  }

  const double c41 = std::cos(q(coord::q41)), s41 = std::sin(q(coord::q41));
  const double q42 = q(coord::q42);
  J(9, coord::q41) = -c41 * q42;
  J(10, coord::q41) = -s41 * q42;
  J(9, coord::q42) = -s41;
  J(10, coord::q42) = c41;
  J(9, coord::xm) = -1.0;
  J(10, coord::zm) = -1.0;
  return J;
}

ForwardJacobian forward_jacobian(const PlatformGeometry& geom, const PlatformPose& pose) {
  // Differentiating q_i^2 = |A_i - B_i|^2 gives dq_i/dp = u_i . dA_i/dp.
  const Vec4 lengths = inverse_kinematics_active(geom, pose);
  const LimbAnchors anchors = anchor_points(geom, pose);
  const Mat3 dRt = rotation_dtheta(pose);
  const Mat3 dRp = rotation_dpsi(pose);
  ForwardJacobian fj;
  for (int i = 0; i < kLimbs; ++i) {
    if (!(lengths(i) > kDegenerateLength)) throw DegenerateLimb(i, lengths(i));
    const Vec3 u = (anchors.platform[i] - anchors.base[i]) / lengths(i);
    const Vec3 a = mobile_anchor(geom, i);
    fj.phi_x(i, 0) = u.x();
    fj.phi_x(i, 1) = u.z();
    fj.phi_x(i, 2) = u.dot(dRt * a);
    fj.phi_x(i, 3) = u.dot(dRp * a);
  }
  fj.det = fj.phi_x.determinant();
  return fj;
}

double hadamard_scale(const Mat11& m) {
  double s = 1.0;
  for (int j = 0; j < m.cols(); ++j) s *= m.col(j).norm();
  return s;
}

namespace {

bool singular_by(double det, double scale_det, const Mat11& phi_q_s, double& scale_out) {
  scale_out = scale_det > 0.0 ? scale_det : hadamard_scale(phi_q_s);
  return !(std::abs(det) >= kSingularRelTol * scale_out) || !std::isfinite(det);
}

}  // namespace

Mat15x4 r_star(const PlatformGeometry& geom, const FullCoordinates& q, double det_scale) {
  const Mat11x15 J = constraint_jacobian(geom, q);
  const Mat11 s = J.leftCols<11>();
  const Eigen::PartialPivLU<Mat11> lu(s);
  const double det = lu.determinant();
  double scale = 0.0;
  if (singular_by(det, det_scale, s, scale)) throw NearSingular(det, scale);
  Mat15x4 r;
  r.topRows<11>() = -lu.solve(J.rightCols<4>());
  r.bottomRows<4>().setIdentity();
  return r;
}

JacobianBundle jacobian_bundle(const PlatformGeometry& geom, const FullCoordinates& q,
                               double det_scale) {
  JacobianBundle b;
  b.phi = constraint_vector(geom, q);
  b.phi_q = constraint_jacobian(geom, q);
  b.phi_q_s = b.phi_q.leftCols<11>();
  b.phi_q_i = b.phi_q.rightCols<4>();
  const Eigen::PartialPivLU<Mat11> lu(b.phi_q_s);
  b.det_phi_q_s = lu.determinant();
  double scale = 0.0;
  if (!singular_by(b.det_phi_q_s, det_scale, b.phi_q_s, scale)) {
    Mat15x4 r;
    r.topRows<11>() = -lu.solve(b.phi_q_i);
    r.bottomRows<4>().setIdentity();
    b.r_star = r;
  }
  const ForwardJacobian fj = forward_jacobian(geom, q.pose());
  b.phi_x = fj.phi_x;
  b.det_phi_x = fj.det;
  return b;
}

namespace {

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

}  // namespace

FkResult forward_kinematics(const PlatformGeometry& geom, const Vec4& q_active,
                            const PlatformPose& seed, const FkOptions& opts) {
  FullCoordinates c = FullCoordinates::assemble(solve_secondary_angles(geom, seed), seed, q_active);
  Vec11 phi = constraint_vector(geom, c);
  double res = phi.lpNorm<Eigen::Infinity>();
  int it = 0;
  while (res >= opts.tolerance) {
    if (it >= opts.max_iterations) throw NoConvergence(it, res);
    const Mat11 s = constraint_jacobian(geom, c).leftCols<11>();
    const Eigen::JacobiSVD<Mat11> svd(s);
    const auto& sv = svd.singularValues();
    const double cond = sv(10) > 0.0 ? sv(0) / sv(10) : std::numeric_limits<double>::infinity();
    if (!(cond <= opts.max_condition)) throw IllConditioned(cond);
    const Vec11 step = -Eigen::PartialPivLU<Mat11>(s).solve(phi);

    double alpha = 1.0;
    FullCoordinates trial = c;
    Vec11 trial_phi;
    double trial_res = 0.0;
    for (int halving = 0; halving < 30; ++halving) {
      trial.q.head<11>() = c.q.head<11>() + alpha * step;
      trial_phi = constraint_vector(geom, trial);
      trial_res = trial_phi.lpNorm<Eigen::Infinity>();
      if (trial_res <= res) break;
      alpha *= 0.5;
    }
    c = trial;
    phi = trial_phi;
    res = trial_res;
    ++it;
  }
  c.q(coord::theta) = wrap_angle(c.q(coord::theta));
  c.q(coord::psi) = wrap_angle(c.q(coord::psi));

  FkResult out;
  out.coords = c;
  out.pose = c.pose();
  out.angles = c.q.head<7>();
  out.iterations = it;
  out.residual = constraint_vector(geom, c).lpNorm<Eigen::Infinity>();
  return out;
}

std::vector<double> det_along_path(const PlatformGeometry& geom,
                                   std::span<const PlatformPose> poses) {
  std::vector<double> dets(poses.size());
  for (std::size_t k = 0; k < poses.size(); ++k) {
    try {
      dets[k] = forward_jacobian(geom, poses[k]).det;
    } catch (const UnreachablePose& e) {
      throw UnreachablePose(e.limb, static_cast<long>(k));
    }
  }
  return dets;
}

std::vector<double> secondary_det_along_path(const PlatformGeometry& geom,
                                             std::span<const PlatformPose> poses) {
  std::vector<double> dets(poses.size());
  for (std::size_t k = 0; k < poses.size(); ++k) {
    const FullCoordinates q = inverse_kinematics(geom, poses[k]);
    dets[k] = constraint_jacobian(geom, q).leftCols<11>().determinant();
  }
  return dets;
}

}  // namespace pkm
