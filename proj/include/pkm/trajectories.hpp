// Test trajectories for the platform origin and orientation, discretized into
// uniformly spaced via points with analytic pose rates.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "pkm/model.hpp"

namespace pkm {

enum class PathKind { horizontal_line, vertical_line, inclined_line, ellipse };
enum class OrientationMode { constant, variable };

std::string to_string(PathKind kind);
std::string to_string(OrientationMode mode);
PathKind path_kind_from_string(const std::string& s);
OrientationMode orientation_from_string(const std::string& s);

/// Raised when an ellipse sample leaves |x/b| < 1.
class EllipseDomain : public Error {
 public:
  EllipseDomain(double t, double ratio);
  double t;
  double ratio;
};

struct TrajectorySpec {
  PathKind kind = PathKind::horizontal_line;
  OrientationMode orientation = OrientationMode::constant;
  double x0 = 0.0, z0 = 0.5;  // m
  double v0 = 0.0;            // m/s, speed along the line or of x for the ellipse
  double a = 0.0, b = 1.0;    // ellipse semi-axes (m)
  double incline = 0.0;       // direction of the inclined line from +X_f (rad)
  double theta0 = 0.0, psi0 = 0.0;             // rad
  double omega_theta = 0.0, omega_psi = 0.0;   // rad/s, ignored when constant
  double duration = 1.0, dt = 0.1;             // s
  ExternalWrench wrench;

  /// Throws Error on a non-positive step or duration.
  void validate() const;
};

struct ViaPoint {
  double t = 0.0;
  PlatformPose pose;
  Vec4 rates = Vec4::Zero();  // (xm', zm', theta', psi')
  ExternalWrench wrench;
};

struct ViaPointSeries {
  std::vector<ViaPoint> points;

  std::size_t size() const { return points.size(); }
  std::vector<PlatformPose> poses() const;
};

/// Pose and rates of the trajectory law at time t. Throws EllipseDomain.
ViaPoint sample(const TrajectorySpec& spec, double t);

/// floor(duration/dt) + 1 points at t = k dt.
ViaPointSeries build(const TrajectorySpec& spec);

/// p points at uniformly spaced times over [0, t_last] of build(spec),
/// evaluated from the analytic law.
ViaPointSeries build_uniform(const TrajectorySpec& spec, std::size_t p);

/// p points at uniformly spaced times between the series endpoints, linearly
/// interpolated. Returns the input unchanged when p equals its size.
ViaPointSeries resample(const ViaPointSeries& series, std::size_t p);

/// The eight test trajectories "Tr1".."Tr8".
const std::map<std::string, TrajectorySpec>& catalog();

/// Difficulty tags: (1) forward singularity on the path, (2) actuator stroke
/// out of range.
struct TrajectoryTags {
  bool forward_singularity = false;
  bool out_of_range = false;
  double min_rel_det = 0.0;    // min |det| / max |det|
  bool det_sign_change = false;
  double min_length = 0.0;
  double max_length = 0.0;
};

TrajectoryTags classify(const PlatformGeometry& geom, const PhysicalParams& phys,
                        const ViaPointSeries& series);

/// Tags each catalog entry is expected to show under the initial geometry.
TrajectoryTags expected_tags(const std::string& id);

}  // namespace pkm
