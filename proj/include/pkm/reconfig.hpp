// Two-stage geometry reconfiguration: minimize the summed squared actuator
// forces along a trajectory subject to staying on one assembly branch away
// from forward singularities, actuator stroke limits and joint angle limits.
//
// Stage "seven" varies (R, Rm, ds, bFD, bFI, bMD, bMI). The mobile triple
// (Rm, bMD, bMI) is then frozen to the median over trajectories and stage
// "four" varies (R, ds, bFD, bFI) only.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pkm/sqp.hpp"
#include "pkm/statics.hpp"
#include "pkm/trajectories.hpp"

namespace pkm {

enum class Stage { seven, four };

std::string to_string(Stage s);
Stage stage_from_string(const std::string& s);

struct MobileTriple {
  double Rm = 0.23;
  double betaMD = deg2rad(90.0);
  double betaMI = deg2rad(100.0);

  bool operator==(const MobileTriple&) const = default;
};

struct DesignVector {
  Stage stage = Stage::seven;
  Eigen::VectorXd values;  // seven: (R, Rm, ds, bFD, bFI, bMD, bMI); four: (R, ds, bFD, bFI)
  MobileTriple frozen;     // used by stage four only

  PlatformGeometry geometry() const;
  static DesignVector from_geometry(Stage stage, const PlatformGeometry& g,
                                    const MobileTriple& frozen = {});
};

Eigen::VectorXd lower_bounds(Stage stage);
Eigen::VectorXd upper_bounds(Stage stage);

/// Margins are positive when satisfied. Singularity margins are
/// 2 det_ref det_i - det_i^2, stroke margins in m, angle margins in rad.
struct ConstraintReport {
  std::vector<double> singularity_margins;  // p
  std::vector<double> stroke_margins;       // per point: 4 lower then 4 upper
  std::vector<double> angle_margins;        // per point: 4 limbs
  std::vector<double> det_phi_x;            // raw determinants
  bool reachable = true;
  bool det_negated = false;  // every det was negative and the series was flipped
  int det_ref_index = -1;
  double det_ref = 0.0;      // after the flip
  bool det_sign_change = false;
  bool feasible = false;

  double min_singularity() const;
  double min_stroke() const;
  double min_angle() const;
  double min_margin() const;
};

/// Branch choices frozen while differentiating: the det_ref index and the
/// sign flip. An empty or absent lock recomputes both.
struct SingularityLock {
  int index = -1;
  bool negate = false;
};

/// 2 det_ref det_i - det_i^2 with det_ref = max_i det_i (after flipping an
/// all-negative series).
std::vector<double> singularity_values(std::span<const double> dets, bool* negated = nullptr,
                                       int* ref_index = nullptr,
                                       const SingularityLock* lock = nullptr);

/// Interval form of the same condition: |det_ref - det_i| < |det_ref|.
bool singularity_interval_form(double det_ref, double det_i);

std::vector<double> stroke_margins(const Vec4& lengths, const PhysicalParams& phys);

/// alpha_max - arccos(|u_j . n_m|) per limb, n_m the platform normal.
std::vector<double> angle_margins(const PlatformGeometry& geom, const PlatformPose& pose,
                                  const PhysicalParams& phys);

/// Recomputes every constraint family from scratch.
ConstraintReport verify_design(const PlatformGeometry& geom, const PhysicalParams& phys,
                               const ViaPointSeries& series, Exec exec = Exec::parallel,
                               const SingularityLock* lock = nullptr);

inline constexpr double kObjectiveSentinel = 1e12;

/// Sum of squared forces over per-point force vectors; the sentinel when any
/// point is flagged unreachable or near singular.
double sum_squared_forces(const std::vector<PointStatics>& points, bool* sentinel = nullptr);

/// Sum over the series of squared actuator forces (N^2), or the sentinel.
double objective(const PlatformGeometry& geom, const PhysicalParams& phys,
                 const ViaPointSeries& series, bool* sentinel = nullptr,
                 Exec exec = Exec::parallel);

struct ReconfigOptions {
  SqpOptions sqp;
  int starts = 5;           // the initial layout plus starts-1 Latin hypercube samples
  std::uint64_t seed = 7;
  std::size_t objective_points = 11;
  bool smooth_start = true;  // solve once without Coulomb friction, then polish
  Exec exec = Exec::parallel;  // across starts
};

struct StartSummary {
  Eigen::VectorXd x0;
  Eigen::VectorXd x;
  double objective = 0.0;
  SqpStatus status = SqpStatus::max_iter;
  bool feasible = false;
  int iterations = 0;
};

struct OptimizationResult {
  std::string trajectory;
  DesignVector design;
  double objective = 0.0;
  ConstraintReport report;
  std::vector<IterateLog> iterations;
  SqpStatus status = SqpStatus::max_iter;
  std::string message;
  int start_index = 0;
  int evaluations = 0;
  std::vector<StartSummary> starts;

  bool feasible() const { return report.feasible; }
};

/// Constraint series: the full discretization. Objective series: `p` points
/// from the analytic law.
struct TrajectoryData {
  std::string id;
  ViaPointSeries constraints;
  ViaPointSeries objective;
};

TrajectoryData trajectory_data(const std::string& id, const TrajectorySpec& spec,
                               std::size_t objective_points = 11);

OptimizationResult optimize_stage1(const TrajectoryData& traj, const PhysicalParams& phys,
                                   const ReconfigOptions& opts = {});

OptimizationResult optimize_stage2(const TrajectoryData& traj, const PhysicalParams& phys,
                                   const MobileTriple& frozen, const ReconfigOptions& opts = {});

/// Generic driver used by both stages.
OptimizationResult optimize_stage(Stage stage, const TrajectoryData& traj,
                                  const PhysicalParams& phys, const MobileTriple& frozen,
                                  const ReconfigOptions& opts);

/// Lower median of each component; angles rounded to the nearest 5 degrees.
MobileTriple median_fix(const std::vector<MobileTriple>& triples, bool round_angles = true);
MobileTriple median_fix(const std::vector<OptimizationResult>& stage1);

struct PipelineEntry {
  std::string id;
  OptimizationResult stage1;
  OptimizationResult stage2;
  std::string error;  // empty when both stages ran
};

struct PipelineResult {
  std::vector<PipelineEntry> entries;
  MobileTriple frozen;
  bool ok() const;
};

PipelineResult run_pipeline(const std::vector<TrajectoryData>& trajectories,
                            const PhysicalParams& phys, const ReconfigOptions& opts = {});

}  // namespace pkm
