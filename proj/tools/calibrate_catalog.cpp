// pkm_calibrate: searches small parameter grids for catalog trajectories
// Tr1..Tr7 until each shows its difficulty tags under the initial geometry
// and default physical parameters, preferring paths that a stage-seven run
// can make feasible. Prints the chosen parameters as catalog source lines.

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pkm/reconfig.hpp"

namespace {

using namespace pkm;

struct Candidate {
  TrajectorySpec spec;
  double score = 0.0;
};

bool tags_match(const TrajectoryTags& got, const TrajectoryTags& want) {
  return got.forward_singularity == want.forward_singularity &&
         got.out_of_range == want.out_of_range;
}

// Smaller is preferred: distance from the anchor values plus stroke excess.
double score(const TrajectorySpec& s, const TrajectorySpec& anchor, const TrajectoryTags& t,
             const PhysicalParams& phys) {
  const double excess =
      std::max(0.0, phys.l_min - t.min_length) + std::max(0.0, t.max_length - phys.l_max);
  return std::abs(s.x0 - anchor.x0) + std::abs(s.z0 - anchor.z0) +
         0.2 * std::abs(s.theta0 - anchor.theta0) + 0.2 * std::abs(s.psi0 - anchor.psi0) +
         std::abs(s.incline - anchor.incline) * 0.05 + 5.0 * excess;
}

std::vector<TrajectorySpec> grid(const TrajectorySpec& base) {
  std::vector<TrajectorySpec> out;
  const bool ellipse = base.kind == PathKind::ellipse;
  const bool variable = base.orientation == OrientationMode::variable;
  std::vector<double> xs, zs, incl{0.0}, th{-20, -10, 0, 10, 20, 30}, ps{-20, 0, 20};
  std::vector<double> om{0.0};
  for (double x = -0.15; x <= 0.1501; x += 0.025) xs.push_back(x);
  for (double z = ellipse ? 0.15 : 0.40; z <= 0.7501; z += 0.025) zs.push_back(z);
  if (base.kind == PathKind::inclined_line) incl = {30, 45, 60, 120, 135, 150};
  if (variable) om = {-0.05, -0.03, 0.03, 0.05};
  if (ellipse) xs = {-0.15};
  for (double x : xs)
    for (double z : zs)
      for (double a : incl)
        for (double t0 : th)
          for (double p0 : ps)
            for (double w : om) {
              TrajectorySpec s = base;
              s.x0 = x;
              s.z0 = z;
              s.incline = deg2rad(a);
              s.theta0 = deg2rad(t0);
              s.psi0 = deg2rad(p0);
              s.omega_theta = s.omega_psi = w;
              out.push_back(s);
            }
  return out;
}

bool fixable(const std::string& id, const TrajectorySpec& spec, const PhysicalParams& phys) {
  ReconfigOptions o;
  o.starts = 5;
  const OptimizationResult r = optimize_stage1(trajectory_data(id, spec), phys, o);
  return r.feasible();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Calibrate catalog trajectories Tr1..Tr7"};
  std::vector<std::string> ids{"Tr1", "Tr2", "Tr3", "Tr4", "Tr5", "Tr6", "Tr7"};
  int max_checks = 40;
  app.add_option("--ids", ids, "trajectories to calibrate");
  app.add_option("--max-checks", max_checks, "stage-seven runs per trajectory");
  CLI11_PARSE(app, argc, argv);

  const PhysicalParams phys;
  const PlatformGeometry geom = PlatformGeometry::initial();
  for (const std::string& id : ids) {
    const TrajectorySpec& anchor = catalog().at(id);
    const TrajectoryTags want = expected_tags(id);

    // The shipped entry wins when it already has the tags and can be fixed.
    try {
      if (tags_match(classify(geom, phys, build(anchor)), want) && fixable(id, anchor, phys)) {
        std::printf("%s: shipped parameters kept\n", id.c_str());
        continue;
      }
    } catch (const Error&) {
    }

    const std::vector<TrajectorySpec> specs = grid(anchor);
    std::vector<Candidate> hits(specs.size());
    std::vector<char> ok(specs.size(), 0);
    for_each_index(specs.size(), Exec::parallel, [&](std::size_t k) {
      try {
        const TrajectoryTags t = classify(geom, phys, build(specs[k]));
        if (tags_match(t, want)) {
          hits[k] = {specs[k], score(specs[k], anchor, t, phys)};
          ok[k] = 1;
        }
      } catch (const Error&) {
      }
    });
    std::vector<Candidate> found;
    for (std::size_t k = 0; k < specs.size(); ++k) {
      if (ok[k]) found.push_back(hits[k]);
    }
    std::stable_sort(found.begin(), found.end(),
                     [](const Candidate& a, const Candidate& b) { return a.score < b.score; });
    std::printf("%s: %zu of %zu grid points carry the tags\n", id.c_str(), found.size(),
                specs.size());
    bool chosen = false;
    for (int k = 0; k < static_cast<int>(found.size()) && k < max_checks; ++k) {
      const TrajectorySpec& s = found[k].spec;
      if (!fixable(id, s, phys)) continue;
      std::printf("  x0 %.3f z0 %.3f incline %.0f theta0 %.0f psi0 %.0f omega %.3f\n", s.x0, s.z0,
                  rad2deg(s.incline), rad2deg(s.theta0), rad2deg(s.psi0), s.omega_theta);
      chosen = true;
      break;
    }
    if (!chosen) std::printf("  no fixable candidate among the first %d\n", max_checks);
  }
  return 0;
}
