// Domain types and anchor geometry for the 3UPS/RPU 2T2R parallel manipulator.
//
// Frames: {O_f - X_f Y_f Z_f} is fixed to the base, {O_m - X_m Y_m Z_m} to the
// mobile platform. The platform origin moves in the X_f Z_f plane and the
// platform orientation is R = Ry(theta) * Rz(psi).
//
// Limb layout (base anchor B_i in the fixed frame, platform anchor a_i in the
// mobile frame):
//   limb 1:  B = (-R, 0, 0)                  a = (-Rm, 0, 0)
//   limb 2:  B = R (cos bFD,  sin bFD, 0)    a = Rm (cos bMD,  sin bMD, 0)
//   limb 3:  B = R (cos bFI, -sin bFI, 0)    a = Rm (cos bMI, -sin bMI, 0)
//   limb 4:  B = (ds, 0, 0)                  a = (0, 0, 0)
#pragma once

#include <Eigen/Dense>
#include <array>
#include <stdexcept>
#include <string>

namespace pkm {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;
using Vec11 = Eigen::Matrix<double, 11, 1>;
using Vec15 = Eigen::Matrix<double, 15, 1>;
using Mat11 = Eigen::Matrix<double, 11, 11>;
using Mat11x4 = Eigen::Matrix<double, 11, 4>;
using Mat11x15 = Eigen::Matrix<double, 11, 15>;
using Mat15x4 = Eigen::Matrix<double, 15, 4>;
using Mat3x15 = Eigen::Matrix<double, 3, 15>;

inline constexpr int kLimbs = 4;
inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A limb shorter than the degeneracy threshold; its axis is undefined.
class DegenerateLimb : public Error {
 public:
  DegenerateLimb(int limb, double length);
  int limb;
  double length;
};

/// A negative radicand in the closed-form inverse kinematics.
class UnreachablePose : public Error {
 public:
  explicit UnreachablePose(int limb, long index = -1);
  int limb;
  long index;  // via-point index when raised from a path sweep, else -1
};

/// Secondary-coordinate Jacobian too close to singular to partition.
class NearSingular : public Error {
 public:
  NearSingular(double det, double scale);
  double det;
  double scale;
};

class NoConvergence : public Error {
 public:
  NoConvergence(int iterations, double residual);
  int iterations;
  double residual;
};

class IllConditioned : public Error {
 public:
  explicit IllConditioned(double condition);
  double condition;
};

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// The seven reconfigurable anchor parameters. Lengths in m, angles in rad.
struct PlatformGeometry {
  double R = 0.4;
  double Rm = 0.2;
  double ds = 0.0;
  double betaFD = deg2rad(50.0);
  double betaFI = deg2rad(40.0);
  double betaMD = deg2rad(30.0);
  double betaMI = deg2rad(40.0);

  /// Layout the manipulator was originally built with.
  static PlatformGeometry initial() { return {}; }

  bool valid() const { return R > 0.0 && Rm > 0.0; }
  bool operator==(const PlatformGeometry&) const = default;
};

/// Task coordinates: platform origin (xm, zm) in m, orientation (theta, psi)
/// in rad about Y_m and Z_m.
struct PlatformPose {
  double xm = 0.0;
  double zm = 0.0;
  double theta = 0.0;
  double psi = 0.0;

  Vec4 vector() const { return {xm, zm, theta, psi}; }
  static PlatformPose from_vector(const Vec4& v) { return {v(0), v(1), v(2), v(3)}; }
};

/// Positions in the 15-vector of generalized coordinates.
namespace coord {
inline constexpr int q11 = 0, q12 = 1, q21 = 2, q22 = 3, q31 = 4, q32 = 5, q41 = 6;
inline constexpr int xm = 7, zm = 8, theta = 9, psi = 10;
inline constexpr int q13 = 11, q23 = 12, q33 = 13, q42 = 14;
inline constexpr int kSecondary = 11;
inline constexpr int kIndependent = 4;
inline constexpr int kTotal = 15;

/// Slot of the active (length) coordinate of limb i (0-based).
inline constexpr int active(int limb) { return q13 + limb; }
}  // namespace coord

/// Generalized coordinates ordered
/// [q11 q12 q21 q22 q31 q32 q41 | xm zm theta psi | q13 q23 q33 q42];
/// the first eleven are secondary, the last four independent.
struct FullCoordinates {
  Vec15 q = Vec15::Zero();

  PlatformPose pose() const {
    return {q(coord::xm), q(coord::zm), q(coord::theta), q(coord::psi)};
  }
  Vec4 active() const { return q.tail<4>(); }
  Vec11 secondary() const { return q.head<11>(); }

  static FullCoordinates assemble(const Eigen::Matrix<double, 7, 1>& angles,
                                  const PlatformPose& pose, const Vec4& lengths);
};

struct PhysicalParams {
  std::array<double, 4> mass_cyl{2.0, 2.0, 2.0, 2.0};
  std::array<double, 4> mass_rod{1.0, 1.0, 1.0, 1.0};
  std::array<double, 4> com_cyl{0.15, 0.15, 0.15, 0.15};  // from base anchor
  std::array<double, 4> com_rod{0.15, 0.15, 0.15, 0.15};  // from platform anchor
  double mass_platform = 8.0;
  Vec3 com_platform = Vec3::Zero();  // mobile frame
  std::array<double, 4> mu_c{40.0, 40.0, 40.0, 40.0};    // N
  std::array<double, 4> mu_v{100.0, 100.0, 100.0, 100.0};  // N s/m
  double g = 9.81;
  double l_min = 0.45;
  double l_max = 0.85;
  double alpha_max = kPi / 4.0;
  Vec3 d_point = Vec3::Zero();  // external force application point, mobile frame

  /// Throws Error naming the first violated invariant.
  void validate() const;

  /// Same layout with every mass, friction coefficient and g set to zero.
  PhysicalParams unloaded() const;
};

/// External force and torque on the platform, both in the mobile frame.
struct ExternalWrench {
  Vec3 force = Vec3::Zero();
  Vec3 torque = Vec3::Zero();
};

// ---------------------------------------------------------------------------
// Geometry of the limbs
// ---------------------------------------------------------------------------

struct LimbAnchors {
  std::array<Vec3, 4> base;      // B_i, fixed frame
  std::array<Vec3, 4> platform;  // A_i, fixed frame
};

inline constexpr double kDegenerateLength = 1e-9;

/// Maps mobile-frame vectors into the fixed frame: Ry(theta) * Rz(psi).
Mat3 rotation_matrix(const PlatformPose& pose);
Mat3 rotation_dtheta(const PlatformPose& pose);
Mat3 rotation_dpsi(const PlatformPose& pose);

Vec3 base_anchor(const PlatformGeometry& geom, int limb);
Vec3 mobile_anchor(const PlatformGeometry& geom, int limb);  // mobile frame

LimbAnchors anchor_points(const PlatformGeometry& geom, const PlatformPose& pose);

/// Unit vectors (A_i - B_i) / |A_i - B_i|. Throws DegenerateLimb.
std::array<Vec3, 4> limb_axes(const PlatformGeometry& geom, const PlatformPose& pose);

}  // namespace pkm
