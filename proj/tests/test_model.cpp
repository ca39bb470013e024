#include <random>

#include "doctest.h"
#include "pkm/kinematics.hpp"
#include "support.hpp"

using namespace pkm;

TEST_SUITE("model") {
  TEST_CASE("rotation is Ry(theta) Rz(psi)") {
    std::mt19937_64 rng(1);
    for (int k = 0; k < 50; ++k) {
      const PlatformPose p = test::random_pose(rng);
      const Mat3 ref = (Eigen::AngleAxisd(p.theta, Vec3::UnitY()) *
                        Eigen::AngleAxisd(p.psi, Vec3::UnitZ()))
                           .toRotationMatrix();
      const Mat3 r = rotation_matrix(p);
      CHECK((r - ref).cwiseAbs().maxCoeff() < 1e-15);
      CHECK(std::abs(r.determinant() - 1.0) < 1e-14);
      // Platform normal lies in the X_f Z_f plane.
      const Vec3 n = r * Vec3::UnitZ();
      CHECK(n.x() == doctest::Approx(std::sin(p.theta)).epsilon(1e-14));
      CHECK(std::abs(n.y()) < 1e-15);
      CHECK(n.z() == doctest::Approx(std::cos(p.theta)).epsilon(1e-14));
    }
  }

  TEST_CASE("rotation derivatives match central differences") {
    std::mt19937_64 rng(2);
    const double h = 1e-6;
    for (int k = 0; k < 20; ++k) {
      const PlatformPose p = test::random_pose(rng);
      PlatformPose a = p, b = p;
      a.theta += h;
      b.theta -= h;
      const Mat3 dt = (rotation_matrix(a) - rotation_matrix(b)) / (2 * h);
      CHECK((dt - rotation_dtheta(p)).cwiseAbs().maxCoeff() < 1e-9);
      a = b = p;
      a.psi += h;
      b.psi -= h;
      const Mat3 dp = (rotation_matrix(a) - rotation_matrix(b)) / (2 * h);
      CHECK((dp - rotation_dpsi(p)).cwiseAbs().maxCoeff() < 1e-9);
    }
  }

  TEST_CASE("anchors of the initial layout") {
    const PlatformGeometry g = PlatformGeometry::initial();
    CHECK(g.R == 0.4);
    CHECK(g.Rm == 0.2);
    CHECK((base_anchor(g, 0) - Vec3(-0.4, 0, 0)).norm() < 1e-15);
    CHECK((base_anchor(g, 1) - 0.4 * Vec3(std::cos(deg2rad(50)), std::sin(deg2rad(50)), 0))
              .norm() < 1e-15);
    CHECK((base_anchor(g, 2) - 0.4 * Vec3(std::cos(deg2rad(40)), -std::sin(deg2rad(40)), 0))
              .norm() < 1e-15);
    CHECK((base_anchor(g, 3) - Vec3(0, 0, 0)).norm() < 1e-15);
    CHECK((mobile_anchor(g, 0) - Vec3(-0.2, 0, 0)).norm() < 1e-15);
    CHECK((mobile_anchor(g, 1) - 0.2 * Vec3(std::cos(deg2rad(30)), std::sin(deg2rad(30)), 0))
              .norm() < 1e-15);
    CHECK((mobile_anchor(g, 2) - 0.2 * Vec3(std::cos(deg2rad(40)), -std::sin(deg2rad(40)), 0))
              .norm() < 1e-15);
    CHECK(mobile_anchor(g, 3).norm() == 0.0);
  }

  TEST_CASE("anchor points and axes") {
    const PlatformGeometry g;
    const PlatformPose p{0.05, 0.55, 0.2, -0.1};
    const LimbAnchors a = anchor_points(g, p);
    const auto u = limb_axes(g, p);
    for (int i = 0; i < kLimbs; ++i) {
      const Vec3 expect = Vec3(p.xm, 0, p.zm) + rotation_matrix(p) * mobile_anchor(g, i);
      CHECK((a.platform[i] - expect).norm() < 1e-15);
      CHECK(std::abs(u[i].norm() - 1.0) < 1e-15);
      CHECK((u[i].cross(a.platform[i] - a.base[i])).norm() < 1e-14);
      CHECK(u[i].dot(a.platform[i] - a.base[i]) > 0.0);
    }
  }

  TEST_CASE("collapsed central limb is degenerate") {
    PlatformGeometry g;
    g.ds = 0.1;
    CHECK_THROWS_AS(limb_axes(g, {0.1, 0.0, 0.0, 0.0}), DegenerateLimb);
  }

  TEST_CASE("physical parameter validation") {
    PhysicalParams p;
    CHECK_NOTHROW(p.validate());
    p.l_min = 0.9;
    CHECK_THROWS_AS(p.validate(), Error);
    p = {};
    p.mass_cyl[2] = -1.0;
    CHECK_THROWS_AS(p.validate(), Error);

    const PhysicalParams u = PhysicalParams{}.unloaded();
    CHECK(u.g == 0.0);
    CHECK(u.mass_platform == 0.0);
    for (int i = 0; i < kLimbs; ++i) {
      CHECK(u.mass_cyl[i] == 0.0);
      CHECK(u.mass_rod[i] == 0.0);
      CHECK(u.mu_c[i] == 0.0);
      CHECK(u.mu_v[i] == 0.0);
    }
  }
}
