#include "pkm/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pkm/kinematics.hpp"

namespace pkm {

std::string to_string(PathKind kind) {
  switch (kind) {
    case PathKind::horizontal_line: return "horizontal-line";
    case PathKind::vertical_line: return "vertical-line";
    case PathKind::inclined_line: return "inclined-line";
    case PathKind::ellipse: return "ellipse";
  }
  return "?";
}

std::string to_string(OrientationMode mode) {
  return mode == OrientationMode::constant ? "constant" : "variable";
}

PathKind path_kind_from_string(const std::string& s) {
  for (PathKind k : {PathKind::horizontal_line, PathKind::vertical_line, PathKind::inclined_line,
                     PathKind::ellipse}) {
    if (to_string(k) == s) return k;
  }
  throw Error("unknown trajectory kind '" + s + "'");
}

OrientationMode orientation_from_string(const std::string& s) {
  if (s == "constant") return OrientationMode::constant;
  if (s == "variable") return OrientationMode::variable;
  throw Error("unknown orientation mode '" + s + "'");
}

namespace {
std::string fmt_ellipse(double t, double ratio) {
  std::ostringstream os;
  os << "ellipse law undefined at t = " << t << " s (|x/b| = " << std::abs(ratio) << ")";
  return os.str();
}
}  // namespace

EllipseDomain::EllipseDomain(double t_, double ratio_)
    : Error(fmt_ellipse(t_, ratio_)), t(t_), ratio(ratio_) {}

void TrajectorySpec::validate() const {
  if (!(dt > 0.0)) throw Error("trajectory: dt must be > 0");
  if (!(duration > 0.0)) throw Error("trajectory: duration must be > 0");
  if (kind == PathKind::ellipse && !(b > 0.0)) throw Error("trajectory: ellipse needs b > 0");
}

std::vector<PlatformPose> ViaPointSeries::poses() const {
  std::vector<PlatformPose> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.pose);
  return out;
}

ViaPoint sample(const TrajectorySpec& s, double t) {
  ViaPoint vp;
  vp.t = t;
  vp.wrench = s.wrench;
  double x = s.x0, z = s.z0, xd = 0.0, zd = 0.0;
  switch (s.kind) {
    case PathKind::horizontal_line:
      x = s.x0 + s.v0 * t;
      xd = s.v0;
      break;
    case PathKind::vertical_line:
      z = s.z0 + s.v0 * t;
      zd = s.v0;
      break;
    case PathKind::inclined_line:
      xd = s.v0 * std::cos(s.incline);
      zd = s.v0 * std::sin(s.incline);
      x = s.x0 + xd * t;
      z = s.z0 + zd * t;
      break;
    case PathKind::ellipse: {
      x = s.x0 + s.v0 * t;
      xd = s.v0;
      const double r = x / s.b;
      const double root_arg = 1.0 - r * r;
      if (!(root_arg > 0.0)) throw EllipseDomain(t, r);
      const double root = std::sqrt(root_arg);
      z = s.z0 + s.a * root;
      zd = -s.a * (x / (s.b * s.b)) * xd / root;
      break;
    }
  }
  double th = s.theta0, ps = s.psi0, thd = 0.0, psd = 0.0;
  if (s.orientation == OrientationMode::variable) {
    th = s.theta0 + s.omega_theta * t;
    ps = s.psi0 + s.omega_psi * t;
    thd = s.omega_theta;
    psd = s.omega_psi;
  }
  vp.pose = {x, z, th, ps};
  vp.rates = {xd, zd, thd, psd};
  return vp;
}

ViaPointSeries build(const TrajectorySpec& spec) {
  spec.validate();
  const auto count = static_cast<std::size_t>(std::floor(spec.duration / spec.dt + 1e-9)) + 1;
  ViaPointSeries out;
  out.points.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    out.points.push_back(sample(spec, static_cast<double>(k) * spec.dt));
  }
  return out;
}

ViaPointSeries build_uniform(const TrajectorySpec& spec, std::size_t p) {
  if (p < 2) throw Error("build_uniform: need at least 2 points");
  const ViaPointSeries full = build(spec);
  const double t_last = full.points.back().t;
  ViaPointSeries out;
  out.points.reserve(p);
  for (std::size_t k = 0; k < p; ++k) {
    const double t = k + 1 == p ? t_last : t_last * static_cast<double>(k) / static_cast<double>(p - 1);
    out.points.push_back(sample(spec, t));
  }
  return out;
}

ViaPointSeries resample(const ViaPointSeries& series, std::size_t p) {
  if (p < 2) throw Error("resample: need at least 2 points");
  if (series.size() < 2) throw Error("resample: series has fewer than 2 points");
  if (p == series.size()) return series;
  const auto& pts = series.points;
  const double t0 = pts.front().t, t1 = pts.back().t;
  ViaPointSeries out;
  out.points.reserve(p);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < p; ++k) {
    if (k == 0) { out.points.push_back(pts.front()); continue; }
    if (k + 1 == p) { out.points.push_back(pts.back()); continue; }
    const double t = t0 + (t1 - t0) * static_cast<double>(k) / static_cast<double>(p - 1);
    while (seg + 2 < pts.size() && pts[seg + 1].t <= t) ++seg;
    const ViaPoint& a = pts[seg];
    const ViaPoint& b = pts[seg + 1];
    const double w = (t - a.t) / (b.t - a.t);
    ViaPoint vp;
    vp.t = t;
    const Vec4 pose = (1.0 - w) * a.pose.vector() + w * b.pose.vector();
    vp.pose = PlatformPose::from_vector(pose);
    vp.rates = (1.0 - w) * a.rates + w * b.rates;
    vp.wrench.force = (1.0 - w) * a.wrench.force + w * b.wrench.force;
    vp.wrench.torque = (1.0 - w) * a.wrench.torque + w * b.wrench.torque;
    out.points.push_back(vp);
  }
  return out;
}

namespace {

ExternalWrench default_wrench() {
  ExternalWrench w;
  w.force = Vec3(45.0, 0.0, -45.0);
  return w;
}

TrajectorySpec line(PathKind kind, OrientationMode mode, double x0, double z0, double v0,
                    double theta0_deg, double psi0_deg, double wt, double wp, double duration) {
  TrajectorySpec s;
  s.kind = kind;
  s.orientation = mode;
  s.x0 = x0;
  s.z0 = z0;
  s.v0 = v0;
  s.theta0 = deg2rad(theta0_deg);
  s.psi0 = deg2rad(psi0_deg);
  s.omega_theta = wt;
  s.omega_psi = wp;
  s.duration = duration;
  s.dt = 0.30;
  s.wrench = default_wrench();
  return s;
}

std::map<std::string, TrajectorySpec> make_catalog() {
  using K = PathKind;
  using O = OrientationMode;
  std::map<std::string, TrajectorySpec> c;

  // Tr1-Tr7 parameters come from pkm_calibrate: each path shows its
  // difficulty tags under the initial geometry and default limits, and a
  // stage-seven run finds a feasible layout for it. Catalog version 2.
  c["Tr1"] = line(K::horizontal_line, O::constant, -0.048, 0.631, 0.02, 0.0, 0.0, 0.0, 0.0, 10.0);
  c["Tr2"] = line(K::horizontal_line, O::variable, -0.10, 0.55, 0.015, 10.0, 0.0, 0.03, 0.03, 20.0);
  c["Tr3"] = line(K::vertical_line, O::constant, 0.0, 0.45, 0.015, 20.0, 0.0, 0.0, 0.0, 20.0);
  c["Tr4"] = line(K::vertical_line, O::variable, -0.025, 0.45, 0.015, 20.0, 20.0, -0.03, -0.03, 20.0);
  c["Tr5"] = line(K::inclined_line, O::constant, -0.125, 0.475, 0.015, -10.0, 0.0, 0.0, 0.0, 20.0);
  c["Tr5"].incline = deg2rad(45.0);
  c["Tr6"] = line(K::inclined_line, O::variable, -0.15, 0.45, 0.015, 10.0, 0.0, 0.03, 0.03, 20.0);
  c["Tr6"].incline = deg2rad(45.0);
  TrajectorySpec e7 = line(K::ellipse, O::constant, -0.15, 0.225, 0.015, 30.0, 0.0, 0.0, 0.0, 20.0);
  e7.a = 0.40;
  e7.b = 0.20;
  c["Tr7"] = e7;

  // Tr8: ellipse with variable orientation, parameters as published.
  TrajectorySpec e8 = line(K::ellipse, O::variable, -0.15, 0.25, 0.015, 30.0, 0.0, -0.05, -0.05, 20.0);
  e8.a = 0.40;
  e8.b = 0.20;
  c["Tr8"] = e8;
  return c;
}

}  // namespace

const std::map<std::string, TrajectorySpec>& catalog() {
  static const std::map<std::string, TrajectorySpec> c = make_catalog();
  return c;
}

TrajectoryTags classify(const PlatformGeometry& geom, const PhysicalParams& phys,
                        const ViaPointSeries& series) {
  TrajectoryTags tags;
  const std::vector<PlatformPose> poses = series.poses();
  const std::vector<double> dets = det_along_path(geom, poses);
  double max_abs = 0.0, min_abs = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < dets.size(); ++k) {
    max_abs = std::max(max_abs, std::abs(dets[k]));
    min_abs = std::min(min_abs, std::abs(dets[k]));
    if (k > 0 && std::signbit(dets[k]) != std::signbit(dets[k - 1])) tags.det_sign_change = true;
  }
  tags.min_rel_det = max_abs > 0.0 ? min_abs / max_abs : 0.0;
  tags.forward_singularity = tags.det_sign_change || tags.min_rel_det < 1e-6;

  tags.min_length = std::numeric_limits<double>::infinity();
  tags.max_length = -std::numeric_limits<double>::infinity();
  for (const auto& p : poses) {
    const Vec4 l = inverse_kinematics_active(geom, p);
    tags.min_length = std::min(tags.min_length, l.minCoeff());
    tags.max_length = std::max(tags.max_length, l.maxCoeff());
  }
  tags.out_of_range = tags.min_length < phys.l_min || tags.max_length > phys.l_max;
  return tags;
}

TrajectoryTags expected_tags(const std::string& id) {
  TrajectoryTags t;
  if (id == "Tr1" || id == "Tr2" || id == "Tr4") t.forward_singularity = true;
  if (id == "Tr3" || id == "Tr5") t.out_of_range = true;
  if (id == "Tr6" || id == "Tr7" || id == "Tr8") t.forward_singularity = t.out_of_range = true;
  return t;
}

}  // namespace pkm
