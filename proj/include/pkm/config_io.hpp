// JSON run configuration. Angles are given in degrees, rates in rad/s, lengths
// in m. Unknown keys are rejected.
#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pkm/reconfig.hpp"

namespace pkm {

/// Schema violation; `path` names the offending field, e.g. "physical.l_min".
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& what);
  std::string path;
};

struct NamedTrajectory {
  std::string id;
  TrajectorySpec spec;
};

struct RunConfig {
  PlatformGeometry geometry;
  PhysicalParams physical;
  std::vector<NamedTrajectory> trajectories;  // "trajectory" and "trajectories" combined
  ReconfigOptions optimizer;
  std::optional<MobileTriple> frozen;         // stage four without a pipeline
  std::string output_dir = "out";
  std::uint64_t seed = 7;
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

/// Catalog entry or throws ConfigError at `path`.
NamedTrajectory catalog_trajectory(const std::string& id, const std::string& path = "trajectory");

}  // namespace pkm
