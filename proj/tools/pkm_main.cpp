// pkm: batch front end for kinematic sweeps, statics and geometry
// reconfiguration.
//
//   pkm ik|detmap|forces|optimize --config <file> [--stage seven|four|pipeline]
//       [--trajectory TrK] [--out DIR] [--seed N]
//
// Exit codes: 0 success, 1 partial batch failure, 2 runtime infeasibility,
// 64 configuration or usage error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "pkm/config_io.hpp"
#include "pkm/reconfig.hpp"
#include "pkm/report.hpp"

namespace {

using namespace pkm;

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitConfig = 64;

struct Args {
  std::string config;
  std::string stage = "pipeline";
  std::string trajectory;
  std::string out;
  std::optional<std::uint64_t> seed;
};

RunConfig resolve(const Args& a) {
  RunConfig cfg = load_config(a.config);
  if (!a.trajectory.empty()) cfg.trajectories = {catalog_trajectory(a.trajectory, "--trajectory")};
  if (!a.out.empty()) cfg.output_dir = a.out;
  if (a.seed) cfg.seed = cfg.optimizer.seed = *a.seed;
  return cfg;
}

const NamedTrajectory& single(const RunConfig& cfg) {
  if (cfg.trajectories.empty()) throw ConfigError("trajectory", "required for this command");
  if (cfg.trajectories.size() > 1)
    throw ConfigError("trajectories", "this command takes exactly one trajectory");
  return cfg.trajectories.front();
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.output_dir) / name).string();
}

int cmd_ik(const RunConfig& cfg) {
  const NamedTrajectory& tr = single(cfg);
  const ViaPointSeries series = build(tr.spec);
  try {
    const Table t = ik_table(cfg.geometry, series);
    write_file(out_path(cfg, "ik_" + tr.id + ".csv"), t.csv());
  } catch (const UnreachablePose& e) {
    std::cerr << "unreachable pose at via point " << e.index << " (limb " << e.limb + 1 << ")\n";
    return kExitInfeasible;
  }
  return kExitOk;
}

int cmd_detmap(const RunConfig& cfg) {
  const NamedTrajectory& tr = single(cfg);
  const ViaPointSeries series = build(tr.spec);
  Table t;
  try {
    t = detmap_table(cfg.geometry, series);
  } catch (const UnreachablePose& e) {
    std::cerr << "unreachable pose at via point " << e.index << " (limb " << e.limb + 1 << ")\n";
    return kExitInfeasible;
  }
  Plot plot;
  plot.title = "det(Phi_x) along " + tr.id;
  plot.xlabel = "t (s)";
  plot.ylabel = "det(Phi_x)";
  plot.zero_line = true;
  PlotSeries s{"det(Phi_x)", {}, {}};
  for (const auto& row : t.rows) {
    s.x.push_back(std::stod(row[0]));
    s.y.push_back(std::stod(row[1]));
  }
  plot.series.push_back(std::move(s));
  write_file(out_path(cfg, "detmap_" + tr.id + ".csv"), t.csv());
  write_file(out_path(cfg, "detmap_" + tr.id + ".svg"), svg(plot));
  return kExitOk;
}

int cmd_forces(const RunConfig& cfg) {
  const NamedTrajectory& tr = single(cfg);
  const ViaPointSeries series = build(tr.spec);
  const auto points = forces_along_path(cfg.geometry, cfg.physical, series);

  Plot forces{"Actuator forces along " + tr.id, "t (s)", "F (N)", {}, true};
  Plot power{"Actuator power along " + tr.id, "t (s)", "P (W)", {}, true};
  for (int i = 0; i < kLimbs; ++i) {
    PlotSeries f{"F" + std::to_string(i + 1), {}, {}}, p{"P" + std::to_string(i + 1), {}, {}};
    for (const auto& ps : points) {
      const bool solved = ps.status == PointStatus::ok || ps.status == PointStatus::near_crossing;
      const double nan = std::numeric_limits<double>::quiet_NaN();
      f.x.push_back(ps.t);
      f.y.push_back(solved ? ps.solution.forces(i) : nan);
      p.x.push_back(ps.t);
      p.y.push_back(solved ? ps.solution.power(i) : nan);
    }
    forces.series.push_back(std::move(f));
    power.series.push_back(std::move(p));
  }
  write_file(out_path(cfg, "forces_" + tr.id + ".csv"), forces_table(points).csv());
  write_file(out_path(cfg, "forces_" + tr.id + ".svg"), svg(forces));
  write_file(out_path(cfg, "power_" + tr.id + ".svg"), svg(power));

  for (std::size_t k = 0; k < points.size(); ++k) {
    if (points[k].status == PointStatus::unreachable) {
      std::cerr << "unreachable pose at via point " << k << "\n";
      return kExitInfeasible;
    }
  }
  return kExitOk;
}

int cmd_optimize(const RunConfig& cfg, const std::string& stage) {
  if (stage != "seven" && stage != "four" && stage != "pipeline")
    throw ConfigError("--stage", "expected seven, four or pipeline");
  std::vector<NamedTrajectory> list = cfg.trajectories;
  if (list.empty()) {
    for (const auto& [id, spec] : catalog()) list.push_back({id, spec});
  }
  std::vector<TrajectoryData> data;
  for (const auto& t : list) {
    data.push_back(trajectory_data(t.id, t.spec, cfg.optimizer.objective_points));
  }

  PipelineResult result;
  if (stage == "pipeline") {
    result = run_pipeline(data, cfg.physical, cfg.optimizer);
  } else {
    result.frozen = cfg.frozen.value_or(MobileTriple{});
    for (const auto& d : data) {
      PipelineEntry e;
      e.id = d.id;
      try {
        if (stage == "seven")
          e.stage1 = optimize_stage1(d, cfg.physical, cfg.optimizer);
        else
          e.stage2 = optimize_stage2(d, cfg.physical, result.frozen, cfg.optimizer);
      } catch (const std::exception& ex) {
        e.error = ex.what();
      }
      result.entries.push_back(std::move(e));
    }
  }

  write_file(out_path(cfg, "results.csv"),
             results_table(result, stage != "four", stage != "seven").csv());
  write_file(out_path(cfg, "objectives.csv"), objectives_table(result).csv());
  if (stage != "seven") write_file(out_path(cfg, "geometries.csv"), geometries_table(result).csv());
  write_file(out_path(cfg, "result.json"), result_bundle(result, stage, cfg.seed));

  bool failed = false;
  for (const auto& e : result.entries) {
    const bool ok1 = stage == "four" || e.stage1.feasible();
    const bool ok2 = stage == "seven" || e.stage2.feasible();
    if (!e.error.empty() || !ok1 || !ok2) {
      failed = true;
      std::cerr << e.id << ": " << (e.error.empty() ? "no feasible design found" : e.error) << "\n";
    }
  }
  return failed ? kExitPartial : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kinematics, statics and geometry reconfiguration for the 3UPS/RPU manipulator"};
  app.require_subcommand(1);
  Args args;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", args.config, "JSON run configuration")->required();
    sub->add_option("--trajectory", args.trajectory, "catalog trajectory id (overrides config)");
    sub->add_option("--out", args.out, "output directory (overrides config)");
    sub->add_option("--seed", args.seed, "multistart seed (overrides config)");
  };
  CLI::App* ik = app.add_subcommand("ik", "active lengths along a trajectory");
  CLI::App* detmap = app.add_subcommand("detmap", "det(Phi_x) along a trajectory");
  CLI::App* forces = app.add_subcommand("forces", "actuator forces and power along a trajectory");
  CLI::App* optimize = app.add_subcommand("optimize", "geometry reconfiguration");
  for (CLI::App* sub : {ik, detmap, forces, optimize}) add_common(sub);
  optimize->add_option("--stage", args.stage, "seven, four or pipeline")
      ->check(CLI::IsMember({"seven", "four", "pipeline"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    const RunConfig cfg = resolve(args);
    if (ik->parsed()) return cmd_ik(cfg);
    if (detmap->parsed()) return cmd_detmap(cfg);
    if (forces->parsed()) return cmd_forces(cfg);
    return cmd_optimize(cfg, args.stage);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfeasible;
  }
}
