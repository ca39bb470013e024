#include "pkm/reconfig.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace pkm {

using Eigen::VectorXd;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double min_finite(const std::vector<double>& v) {
  double m = std::numeric_limits<double>::infinity();
  for (double x : v) m = std::isnan(x) ? -std::numeric_limits<double>::infinity() : std::min(m, x);
  return m;
}

}  // namespace

std::string to_string(Stage s) { return s == Stage::seven ? "seven" : "four"; }

Stage stage_from_string(const std::string& s) {
  if (s == "seven") return Stage::seven;
  if (s == "four") return Stage::four;
  throw Error("unknown stage '" + s + "'");
}

PlatformGeometry DesignVector::geometry() const {
  PlatformGeometry g;
  const VectorXd& v = values;
  if (stage == Stage::seven) {
    g.R = v(0);
    g.Rm = v(1);
    g.ds = v(2);
    g.betaFD = v(3);
    g.betaFI = v(4);
    g.betaMD = v(5);
    g.betaMI = v(6);
  } else {
    g.R = v(0);
    g.ds = v(1);
    g.betaFD = v(2);
    g.betaFI = v(3);
    g.Rm = frozen.Rm;
    g.betaMD = frozen.betaMD;
    g.betaMI = frozen.betaMI;
  }
  return g;
}

DesignVector DesignVector::from_geometry(Stage stage, const PlatformGeometry& g,
                                         const MobileTriple& frozen) {
  DesignVector d;
  d.stage = stage;
  d.frozen = frozen;
  if (stage == Stage::seven) {
    d.values.resize(7);
    d.values << g.R, g.Rm, g.ds, g.betaFD, g.betaFI, g.betaMD, g.betaMI;
  } else {
    d.values.resize(4);
    d.values << g.R, g.ds, g.betaFD, g.betaFI;
  }
  return d;
}

VectorXd lower_bounds(Stage stage) {
  VectorXd v(stage == Stage::seven ? 7 : 4);
  if (stage == Stage::seven)
    v << 0.20, 0.15, -0.15, 0.1, 0.1, 0.1, 0.1;
  else
    v << 0.20, -0.15, 0.1, 0.1;
  return v;
}

VectorXd upper_bounds(Stage stage) {
  VectorXd v(stage == Stage::seven ? 7 : 4);
  if (stage == Stage::seven)
    v << 0.50, 0.30, 0.15, kPi, kPi, kPi, kPi;
  else
    v << 0.50, 0.15, kPi, kPi;
  return v;
}

double ConstraintReport::min_singularity() const { return min_finite(singularity_margins); }
double ConstraintReport::min_stroke() const { return min_finite(stroke_margins); }
double ConstraintReport::min_angle() const { return min_finite(angle_margins); }
double ConstraintReport::min_margin() const {
  return std::min({min_singularity(), min_stroke(), min_angle()});
}

std::vector<double> singularity_values(std::span<const double> dets, bool* negated,
                                       int* ref_index, const SingularityLock* lock) {
  const int n = static_cast<int>(dets.size());
  bool flip = false;
  int idx = -1;
  if (lock && lock->index >= 0 && lock->index < n && !std::isnan(dets[lock->index])) {
    flip = lock->negate;
    idx = lock->index;
  } else {
    flip = n > 0;
    for (double d : dets) {
      if (!std::isnan(d) && !(d < 0.0)) flip = false;
    }
    for (int i = 0; i < n; ++i) {
      if (std::isnan(dets[i])) continue;
      const double d = flip ? -dets[i] : dets[i];
      if (idx < 0 || d > (flip ? -dets[idx] : dets[idx])) idx = i;
    }
  }
  if (negated) *negated = flip;
  if (ref_index) *ref_index = idx;

  std::vector<double> out(n, kNaN);
  if (idx < 0) return out;
  const double ref = flip ? -dets[idx] : dets[idx];
  for (int i = 0; i < n; ++i) {
    if (std::isnan(dets[i])) continue;
    const double d = flip ? -dets[i] : dets[i];
    out[i] = 2.0 * ref * d - d * d;
  }
  return out;
}

bool singularity_interval_form(double det_ref, double det_i) {
  return std::abs(det_ref - det_i) < std::abs(det_ref);
}

std::vector<double> stroke_margins(const Vec4& lengths, const PhysicalParams& phys) {
  std::vector<double> out(8);
  for (int i = 0; i < kLimbs; ++i) {
    out[i] = lengths(i) - phys.l_min;
    out[4 + i] = phys.l_max - lengths(i);
  }
  return out;
}

std::vector<double> angle_margins(const PlatformGeometry& geom, const PlatformPose& pose,
                                  const PhysicalParams& phys) {
  const auto axes = limb_axes(geom, pose);
  const Vec3 normal = rotation_matrix(pose).col(2);
  std::vector<double> out(kLimbs);
  for (int i = 0; i < kLimbs; ++i) {
    const double c = std::clamp(std::abs(axes[i].dot(normal)), 0.0, 1.0);
    out[i] = phys.alpha_max - std::acos(c);
  }
  return out;
}

ConstraintReport verify_design(const PlatformGeometry& geom, const PhysicalParams& phys,
                               const ViaPointSeries& series, Exec exec,
                               const SingularityLock* lock) {
  const std::size_t p = series.size();
  ConstraintReport rep;
  rep.det_phi_x.assign(p, kNaN);
  rep.stroke_margins.assign(8 * p, kNaN);
  rep.angle_margins.assign(4 * p, kNaN);
  std::vector<char> ok(p, 0);

  for_each_index(p, exec, [&](std::size_t k) {
    const PlatformPose& pose = series.points[k].pose;
    try {
      const Vec4 lengths = inverse_kinematics_active(geom, pose);
      const auto sm = stroke_margins(lengths, phys);
      const auto am = angle_margins(geom, pose, phys);
      rep.det_phi_x[k] = forward_jacobian(geom, pose).det;
      std::copy(sm.begin(), sm.end(), rep.stroke_margins.begin() + 8 * k);
      std::copy(am.begin(), am.end(), rep.angle_margins.begin() + 4 * k);
      ok[k] = 1;
    } catch (const Error&) {
      rep.det_phi_x[k] = kNaN;
    }
  });

  rep.reachable = std::all_of(ok.begin(), ok.end(), [](char c) { return c != 0; });
  rep.singularity_margins =
      singularity_values(rep.det_phi_x, &rep.det_negated, &rep.det_ref_index, lock);
  if (rep.det_ref_index >= 0) {
    const double d = rep.det_phi_x[rep.det_ref_index];
    rep.det_ref = rep.det_negated ? -d : d;
  }
  for (std::size_t k = 1; k < p; ++k) {
    const double a = rep.det_phi_x[k - 1], b = rep.det_phi_x[k];
    if (!std::isnan(a) && !std::isnan(b) && (a > 0.0) != (b > 0.0)) rep.det_sign_change = true;
  }
  rep.feasible = rep.reachable && p > 0 && rep.min_margin() > 0.0;
  return rep;
}

double sum_squared_forces(const std::vector<PointStatics>& points, bool* sentinel) {
  double sum = 0.0;
  bool bad = false;
  for (const auto& ps : points) {
    if (ps.status == PointStatus::unreachable || ps.status == PointStatus::near_singular) {
      bad = true;
      break;
    }
    sum += ps.solution.forces.squaredNorm();
  }
  if (!std::isfinite(sum)) bad = true;
  if (sentinel) *sentinel = bad;
  return bad ? kObjectiveSentinel : sum;
}

double objective(const PlatformGeometry& geom, const PhysicalParams& phys,
                 const ViaPointSeries& series, bool* sentinel, Exec exec) {
  return sum_squared_forces(forces_along_path(geom, phys, series, exec), sentinel);
}

TrajectoryData trajectory_data(const std::string& id, const TrajectorySpec& spec,
                               std::size_t objective_points) {
  TrajectoryData d;
  d.id = id;
  d.constraints = build(spec);
  d.objective = build_uniform(spec, objective_points);
  return d;
}

namespace {

// Scaled constraint vector: singularity values / det_ref^2, stroke margins /
// stroke span, angle margins in rad. Points that could not be evaluated get -1.
VectorXd scaled_constraints(const ConstraintReport& rep, const PhysicalParams& phys) {
  const std::size_t p = rep.det_phi_x.size();
  VectorXd c(13 * p);
  const double ref2 = rep.det_ref * rep.det_ref;
  const double span = phys.l_max - phys.l_min;
  auto value = [](double v, double scale) { return std::isnan(v) ? -1.0 : v / scale; };
  for (std::size_t k = 0; k < p; ++k) {
    c(k) = ref2 > 0.0 ? value(rep.singularity_margins[k], ref2) : -1.0;
  }
  for (std::size_t j = 0; j < 8 * p; ++j) c(p + j) = value(rep.stroke_margins[j], span);
  for (std::size_t j = 0; j < 4 * p; ++j) c(9 * p + j) = value(rep.angle_margins[j], 1.0);
  return c;
}

NlpProblem make_problem(Stage stage, const TrajectoryData& traj, const PhysicalParams& phys,
                        const MobileTriple& frozen) {
  NlpProblem pb;
  pb.lower = lower_bounds(stage);
  pb.upper = upper_bounds(stage);
  pb.evaluate = [stage, &traj, &phys, frozen](const VectorXd& x, const std::vector<int>* locks) {
    DesignVector dv;
    dv.stage = stage;
    dv.values = x;
    dv.frozen = frozen;
    const PlatformGeometry geom = dv.geometry();
    SingularityLock lock;
    const bool locked = locks && locks->size() == 2;
    if (locked) {
      lock.index = (*locks)[0];
      lock.negate = (*locks)[1] != 0;
    }
    const ConstraintReport rep =
        verify_design(geom, phys, traj.constraints, Exec::serial, locked ? &lock : nullptr);
    NlpEval ev;
    ev.c = scaled_constraints(rep, phys);
    ev.locks = {rep.det_ref_index, rep.det_negated ? 1 : 0};
    ev.f = objective(geom, phys, traj.objective, nullptr, Exec::serial);
    return ev;
  };
  return pb;
}

// starts-1 Latin hypercube samples of the unit box.
std::vector<VectorXd> latin_hypercube(int count, int dim, std::uint64_t seed) {
  std::vector<VectorXd> out(count, VectorXd(dim));
  if (count <= 0) return out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<int> perm(count);
  for (int d = 0; d < dim; ++d) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int k = 0; k < count; ++k) out[k](d) = (perm[k] + unif(rng)) / count;
  }
  return out;
}

bool better(const OptimizationResult& a, const OptimizationResult& b) {
  if (a.feasible() != b.feasible()) return a.feasible();
  if (a.objective != b.objective) return a.objective < b.objective;
  return std::lexicographical_compare(a.design.values.begin(), a.design.values.end(),
                                      b.design.values.begin(), b.design.values.end());
}

}  // namespace

OptimizationResult optimize_stage(Stage stage, const TrajectoryData& traj,
                                  const PhysicalParams& phys, const MobileTriple& frozen,
                                  const ReconfigOptions& opts) {
  const NlpProblem pb = make_problem(stage, traj, phys, frozen);
  const int n = static_cast<int>(pb.lower.size());
  const int starts = std::max(1, opts.starts);

  std::vector<VectorXd> x0(starts);
  x0[0] = DesignVector::from_geometry(stage, PlatformGeometry::initial(), frozen).values;
  x0[0] = x0[0].cwiseMax(pb.lower).cwiseMin(pb.upper);
  const auto lhs =
      latin_hypercube(starts - 1, n, opts.seed * 2 + (stage == Stage::seven ? 0 : 1));
  for (int k = 1; k < starts; ++k) x0[k] = pb.lower + (pb.upper - pb.lower).cwiseProduct(lhs[k - 1]);

  PhysicalParams smooth = phys;
  smooth.mu_c.fill(0.0);
  const NlpProblem pb_smooth = make_problem(stage, traj, smooth, frozen);

  auto scaled_options = [&](const PhysicalParams& model, const VectorXd& x) {
    SqpOptions so = opts.sqp;
    if (so.objective_scale <= 0.0) {
      bool sentinel = false;
      const DesignVector d{stage, x, frozen};
      const double f = objective(d.geometry(), model, traj.objective, &sentinel, Exec::serial);
      so.objective_scale = sentinel ? 1e6 : std::max(1.0, f);
    }
    return so;
  };

  std::vector<OptimizationResult> runs(starts);
  for_each_index(static_cast<std::size_t>(starts), opts.exec, [&](std::size_t k) {
    OptimizationResult& r = runs[k];
    r.trajectory = traj.id;
    r.start_index = static_cast<int>(k);
    r.design.stage = stage;
    r.design.frozen = frozen;
    try {
      VectorXd start = x0[k];
      int evaluations = 0;
      if (opts.smooth_start) {
        // Coulomb friction makes the objective jump wherever an actuator
        // velocity changes sign; locate the basin without it first.
        const SqpResult s0 = sqp_minimize(pb_smooth, start, scaled_options(smooth, start));
        start = s0.x;
        evaluations += s0.evaluations;
      }
      const SqpResult s = sqp_minimize(pb, start, scaled_options(phys, start));
      r.design.values = s.x;
      r.status = s.status;
      r.message = s.message;
      r.iterations = s.log;
      r.evaluations = evaluations + s.evaluations;
      r.objective = objective(r.design.geometry(), phys, traj.objective, nullptr, Exec::serial);
      r.report = verify_design(r.design.geometry(), phys, traj.constraints, Exec::serial);
    } catch (const std::exception& e) {
      r.design.values = x0[k];
      r.status = SqpStatus::infeasible;
      r.message = e.what();
      r.objective = kObjectiveSentinel;
    }
  });

  std::size_t best = 0;
  for (std::size_t k = 1; k < runs.size(); ++k) {
    if (better(runs[k], runs[best])) best = k;
  }
  OptimizationResult out = runs[best];
  for (std::size_t k = 0; k < runs.size(); ++k) {
    StartSummary s;
    s.x0 = x0[k];
    s.x = runs[k].design.values;
    s.objective = runs[k].objective;
    s.status = runs[k].status;
    s.feasible = runs[k].feasible();
    s.iterations = static_cast<int>(runs[k].iterations.size());
    out.starts.push_back(s);
  }
  return out;
}

OptimizationResult optimize_stage1(const TrajectoryData& traj, const PhysicalParams& phys,
                                   const ReconfigOptions& opts) {
  return optimize_stage(Stage::seven, traj, phys, MobileTriple{}, opts);
}

OptimizationResult optimize_stage2(const TrajectoryData& traj, const PhysicalParams& phys,
                                   const MobileTriple& frozen, const ReconfigOptions& opts) {
  return optimize_stage(Stage::four, traj, phys, frozen, opts);
}

MobileTriple median_fix(const std::vector<MobileTriple>& triples, bool round_angles) {
  if (triples.empty()) throw Error("median_fix needs at least one result");
  auto lower_median = [&](auto field) {
    std::vector<double> v;
    for (const auto& t : triples) v.push_back(t.*field);
    std::sort(v.begin(), v.end());
    return v[(v.size() - 1) / 2];
  };
  MobileTriple m;
  m.Rm = lower_median(&MobileTriple::Rm);
  m.betaMD = lower_median(&MobileTriple::betaMD);
  m.betaMI = lower_median(&MobileTriple::betaMI);
  if (round_angles) {
    auto round5 = [](double rad) { return deg2rad(5.0 * std::round(rad2deg(rad) / 5.0)); };
    m.betaMD = round5(m.betaMD);
    m.betaMI = round5(m.betaMI);
  }
  return m;
}

MobileTriple median_fix(const std::vector<OptimizationResult>& stage1) {
  std::vector<MobileTriple> triples;
  for (const auto& r : stage1) {
    if (r.design.stage != Stage::seven || r.design.values.size() != 7) continue;
    const PlatformGeometry g = r.design.geometry();
    triples.push_back({g.Rm, g.betaMD, g.betaMI});
  }
  return median_fix(triples);
}

bool PipelineResult::ok() const {
  return std::all_of(entries.begin(), entries.end(), [](const PipelineEntry& e) {
    return e.error.empty() && e.stage1.feasible() && e.stage2.feasible();
  });
}

PipelineResult run_pipeline(const std::vector<TrajectoryData>& trajectories,
                            const PhysicalParams& phys, const ReconfigOptions& opts) {
  if (trajectories.empty()) throw Error("pipeline needs at least one trajectory");
  PipelineResult out;
  std::vector<OptimizationResult> stage1;
  for (const auto& traj : trajectories) {
    PipelineEntry e;
    e.id = traj.id;
    try {
      e.stage1 = optimize_stage1(traj, phys, opts);
      stage1.push_back(e.stage1);
    } catch (const std::exception& ex) {
      e.error = ex.what();
    }
    out.entries.push_back(std::move(e));
  }
  if (stage1.empty()) return out;
  out.frozen = median_fix(stage1);
  for (std::size_t k = 0; k < trajectories.size(); ++k) {
    PipelineEntry& e = out.entries[k];
    if (!e.error.empty()) continue;
    try {
      e.stage2 = optimize_stage2(trajectories[k], phys, out.frozen, opts);
    } catch (const std::exception& ex) {
      e.error = ex.what();
    }
  }
  return out;
}

}  // namespace pkm
