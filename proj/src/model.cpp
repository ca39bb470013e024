#include "pkm/model.hpp"

#include <cmath>
#include <sstream>

namespace pkm {

namespace {

std::string fmt_degenerate(int limb, double length) {
  std::ostringstream os;
  os << "limb " << limb + 1 << " degenerate (length " << length << " m)";
  return os.str();
}

std::string fmt_unreachable(int limb, long index) {
  std::ostringstream os;
  os << "pose unreachable: negative radicand for limb " << limb + 1;
  if (index >= 0) os << " at via point " << index;
  return os.str();
}

std::string fmt_singular(double det, double scale) {
  std::ostringstream os;
  os << "secondary Jacobian near singular: det " << det << " vs scale " << scale;
  return os.str();
}

std::string fmt_noconv(int iterations, double residual) {
  std::ostringstream os;
  os << "forward kinematics did not converge in " << iterations
     << " iterations (residual " << residual << ")";
  return os.str();
}

}  // namespace

DegenerateLimb::DegenerateLimb(int limb_, double length_)
    : Error(fmt_degenerate(limb_, length_)), limb(limb_), length(length_) {}

UnreachablePose::UnreachablePose(int limb_, long index_)
    : Error(fmt_unreachable(limb_, index_)), limb(limb_), index(index_) {}

NearSingular::NearSingular(double det_, double scale_)
    : Error(fmt_singular(det_, scale_)), det(det_), scale(scale_) {}

NoConvergence::NoConvergence(int iterations_, double residual_)
    : Error(fmt_noconv(iterations_, residual_)), iterations(iterations_), residual(residual_) {}

IllConditioned::IllConditioned(double condition_)
    : Error("forward kinematics iteration matrix ill-conditioned (cond " +
            std::to_string(condition_) + ")"),
      condition(condition_) {}

FullCoordinates FullCoordinates::assemble(const Eigen::Matrix<double, 7, 1>& angles,
                                          const PlatformPose& pose, const Vec4& lengths) {
  FullCoordinates c;
  c.q.head<7>() = angles;
  c.q(coord::xm) = pose.xm;
  c.q(coord::zm) = pose.zm;
  c.q(coord::theta) = pose.theta;
  c.q(coord::psi) = pose.psi;
  c.q.tail<4>() = lengths;
  return c;
}

void PhysicalParams::validate() const {
  auto fail = [](const std::string& what) { throw Error("physical params: " + what); };
  for (int i = 0; i < kLimbs; ++i) {
    if (!(mass_cyl[i] >= 0.0) || !(mass_rod[i] >= 0.0)) fail("masses must be >= 0");
    if (!(mu_c[i] >= 0.0) || !(mu_v[i] >= 0.0)) fail("friction coefficients must be >= 0");
  }
  if (!(mass_platform >= 0.0)) fail("mass_platform must be >= 0");
  if (!(l_min > 0.0 && l_min < l_max)) fail("need 0 < l_min < l_max");
  if (!(alpha_max > 0.0 && alpha_max < kPi / 2.0)) fail("need 0 < alpha_max < pi/2");
  if (!std::isfinite(g)) fail("g must be finite");
}

PhysicalParams PhysicalParams::unloaded() const {
  PhysicalParams p = *this;
  p.mass_cyl.fill(0.0);
  p.mass_rod.fill(0.0);
  p.mass_platform = 0.0;
  p.mu_c.fill(0.0);
  p.mu_v.fill(0.0);
  p.g = 0.0;
  return p;
}

Mat3 rotation_matrix(const PlatformPose& pose) {
  const double ct = std::cos(pose.theta), st = std::sin(pose.theta);
  const double cp = std::cos(pose.psi), sp = std::sin(pose.psi);
  Mat3 r;
  r << ct * cp, -ct * sp, st,
       sp,       cp,      0.0,
      -st * cp,  st * sp, ct;
  return r;
}

Mat3 rotation_dtheta(const PlatformPose& pose) {
  const double ct = std::cos(pose.theta), st = std::sin(pose.theta);
  const double cp = std::cos(pose.psi), sp = std::sin(pose.psi);
  Mat3 r;
  r << -st * cp, st * sp, ct,
        0.0,     0.0,     0.0,
       -ct * cp, ct * sp, -st;
  return r;
}

Mat3 rotation_dpsi(const PlatformPose& pose) {
  const double ct = std::cos(pose.theta), st = std::sin(pose.theta);
  const double cp = std::cos(pose.psi), sp = std::sin(pose.psi);
  Mat3 r;
  r << -ct * sp, -ct * cp, 0.0,
        cp,      -sp,      0.0,
        st * sp,  st * cp, 0.0;
  return r;
}

Vec3 base_anchor(const PlatformGeometry& geom, int limb) {
  switch (limb) {
    case 0: return {-geom.R, 0.0, 0.0};
    case 1: return {geom.R * std::cos(geom.betaFD), geom.R * std::sin(geom.betaFD), 0.0};
    case 2: return {geom.R * std::cos(geom.betaFI), -geom.R * std::sin(geom.betaFI), 0.0};
    default: return {geom.ds, 0.0, 0.0};
  }
}

Vec3 mobile_anchor(const PlatformGeometry& geom, int limb) {
  switch (limb) {
    case 0: return {-geom.Rm, 0.0, 0.0};
    case 1: return {geom.Rm * std::cos(geom.betaMD), geom.Rm * std::sin(geom.betaMD), 0.0};
    case 2: return {geom.Rm * std::cos(geom.betaMI), -geom.Rm * std::sin(geom.betaMI), 0.0};
    default: return Vec3::Zero();
  }
}

LimbAnchors anchor_points(const PlatformGeometry& geom, const PlatformPose& pose) {
  const Mat3 rot = rotation_matrix(pose);
  const Vec3 origin(pose.xm, 0.0, pose.zm);
  LimbAnchors out;
  for (int i = 0; i < kLimbs; ++i) {
    out.base[i] = base_anchor(geom, i);
    out.platform[i] = origin + rot * mobile_anchor(geom, i);
  }
  return out;
}

std::array<Vec3, 4> limb_axes(const PlatformGeometry& geom, const PlatformPose& pose) {
  const LimbAnchors a = anchor_points(geom, pose);
  std::array<Vec3, 4> u;
  for (int i = 0; i < kLimbs; ++i) {
    const Vec3 d = a.platform[i] - a.base[i];
    const double len = d.norm();
    if (!(len > kDegenerateLength)) throw DegenerateLimb(i, len);
    u[i] = d / len;
  }
  return u;
}

}  // namespace pkm
