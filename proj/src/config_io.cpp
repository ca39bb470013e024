#include "pkm/config_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace pkm {

using nlohmann::json;

ConfigError::ConfigError(std::string p, const std::string& what)
    : Error(p + ": " + what), path(std::move(p)) {}

namespace {

std::string join(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

void reject_unknown(const json& obj, const std::string& path, std::set<std::string> allowed) {
  if (!obj.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [k, v] : obj.items()) {
    if (!allowed.count(k)) throw ConfigError(join(path, k), "unknown key");
  }
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  return v.get<double>();
}

template <class Fn>
void read_number(const json& obj, const std::string& base, const char* key, Fn&& set) {
  if (auto it = obj.find(key); it != obj.end()) set(number(*it, join(base, key)));
}

Vec3 vec3(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3) throw ConfigError(path, "expected an array of 3 numbers");
  return {number(v[0], path + "[0]"), number(v[1], path + "[1]"), number(v[2], path + "[2]")};
}

// A scalar applies to all four limbs.
void read_limb_array(const json& obj, const std::string& base, const char* key,
                     std::array<double, 4>& out) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  const std::string path = join(base, key);
  if (it->is_number()) {
    out.fill(it->get<double>());
    return;
  }
  if (!it->is_array() || it->size() != 4) throw ConfigError(path, "expected a number or 4 numbers");
  for (int i = 0; i < 4; ++i) out[i] = number((*it)[i], path + "[" + std::to_string(i) + "]");
}

PlatformGeometry parse_geometry(const json& g, const std::string& path) {
  reject_unknown(g, path, {"R", "Rm", "ds", "betaFD", "betaFI", "betaMD", "betaMI"});
  PlatformGeometry out;
  read_number(g, path, "R", [&](double v) { out.R = v; });
  read_number(g, path, "Rm", [&](double v) { out.Rm = v; });
  read_number(g, path, "ds", [&](double v) { out.ds = v; });
  read_number(g, path, "betaFD", [&](double v) { out.betaFD = deg2rad(v); });
  read_number(g, path, "betaFI", [&](double v) { out.betaFI = deg2rad(v); });
  read_number(g, path, "betaMD", [&](double v) { out.betaMD = deg2rad(v); });
  read_number(g, path, "betaMI", [&](double v) { out.betaMI = deg2rad(v); });
  if (!(out.R > 0.0)) throw ConfigError(join(path, "R"), "must be positive");
  if (!(out.Rm > 0.0)) throw ConfigError(join(path, "Rm"), "must be positive");
  return out;
}

PhysicalParams parse_physical(const json& p, const std::string& path) {
  reject_unknown(p, path,
                 {"mass_cyl", "mass_rod", "com_cyl", "com_rod", "mass_platform", "com_platform",
                  "mu_c", "mu_v", "g", "l_min", "l_max", "alpha_max", "d_point"});
  PhysicalParams out;
  read_limb_array(p, path, "mass_cyl", out.mass_cyl);
  read_limb_array(p, path, "mass_rod", out.mass_rod);
  read_limb_array(p, path, "com_cyl", out.com_cyl);
  read_limb_array(p, path, "com_rod", out.com_rod);
  read_limb_array(p, path, "mu_c", out.mu_c);
  read_limb_array(p, path, "mu_v", out.mu_v);
  read_number(p, path, "mass_platform", [&](double v) { out.mass_platform = v; });
  read_number(p, path, "g", [&](double v) { out.g = v; });
  read_number(p, path, "l_min", [&](double v) { out.l_min = v; });
  read_number(p, path, "l_max", [&](double v) { out.l_max = v; });
  read_number(p, path, "alpha_max", [&](double v) { out.alpha_max = deg2rad(v); });
  if (auto it = p.find("com_platform"); it != p.end())
    out.com_platform = vec3(*it, join(path, "com_platform"));
  if (auto it = p.find("d_point"); it != p.end()) out.d_point = vec3(*it, join(path, "d_point"));
  try {
    out.validate();
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
  return out;
}

NamedTrajectory parse_trajectory(const json& t, const std::string& path) {
  if (t.is_string()) return catalog_trajectory(t.get<std::string>(), path);
  reject_unknown(t, path,
                 {"id", "base", "kind", "orientation", "x0", "z0", "v0", "a", "b", "incline",
                  "theta0", "psi0", "omega_theta", "omega_psi", "duration", "dt", "force",
                  "torque"});
  NamedTrajectory out;
  out.id = "custom";
  if (auto it = t.find("base"); it != t.end()) {
    if (!it->is_string()) throw ConfigError(join(path, "base"), "expected a catalog id");
    out = catalog_trajectory(it->get<std::string>(), join(path, "base"));
  }
  if (auto it = t.find("id"); it != t.end()) {
    if (!it->is_string()) throw ConfigError(join(path, "id"), "expected a string");
    out.id = it->get<std::string>();
  }
  TrajectorySpec& s = out.spec;
  if (auto it = t.find("kind"); it != t.end()) {
    try {
      s.kind = path_kind_from_string(it->get<std::string>());
    } catch (const std::exception& e) {
      throw ConfigError(join(path, "kind"), e.what());
    }
  }
  if (auto it = t.find("orientation"); it != t.end()) {
    try {
      s.orientation = orientation_from_string(it->get<std::string>());
    } catch (const std::exception& e) {
      throw ConfigError(join(path, "orientation"), e.what());
    }
  }
  read_number(t, path, "x0", [&](double v) { s.x0 = v; });
  read_number(t, path, "z0", [&](double v) { s.z0 = v; });
  read_number(t, path, "v0", [&](double v) { s.v0 = v; });
  read_number(t, path, "a", [&](double v) { s.a = v; });
  read_number(t, path, "b", [&](double v) { s.b = v; });
  read_number(t, path, "incline", [&](double v) { s.incline = deg2rad(v); });
  read_number(t, path, "theta0", [&](double v) { s.theta0 = deg2rad(v); });
  read_number(t, path, "psi0", [&](double v) { s.psi0 = deg2rad(v); });
  read_number(t, path, "omega_theta", [&](double v) { s.omega_theta = v; });
  read_number(t, path, "omega_psi", [&](double v) { s.omega_psi = v; });
  read_number(t, path, "duration", [&](double v) { s.duration = v; });
  read_number(t, path, "dt", [&](double v) { s.dt = v; });
  if (auto it = t.find("force"); it != t.end()) s.wrench.force = vec3(*it, join(path, "force"));
  if (auto it = t.find("torque"); it != t.end()) s.wrench.torque = vec3(*it, join(path, "torque"));
  try {
    s.validate();
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
  return out;
}

ReconfigOptions parse_optimizer(const json& o, const std::string& path,
                                std::optional<MobileTriple>& frozen) {
  reject_unknown(o, path,
                 {"max_iterations", "feas_tol", "opt_tol", "fd_step", "constraint_margin",
                  "starts", "objective_points", "frozen"});
  ReconfigOptions out;
  auto positive_int = [&](const char* key) {
    const std::string p = join(path, key);
    const json& v = o.at(key);
    if (!v.is_number_integer() || v.get<long>() < 1) throw ConfigError(p, "expected a positive integer");
    return v.get<long>();
  };
  if (o.contains("max_iterations")) out.sqp.max_iterations = static_cast<int>(positive_int("max_iterations"));
  if (o.contains("starts")) out.starts = static_cast<int>(positive_int("starts"));
  if (o.contains("objective_points"))
    out.objective_points = static_cast<std::size_t>(positive_int("objective_points"));
  read_number(o, path, "feas_tol", [&](double v) { out.sqp.feas_tol = v; });
  read_number(o, path, "opt_tol", [&](double v) { out.sqp.opt_tol = v; });
  read_number(o, path, "fd_step", [&](double v) { out.sqp.fd_step = v; });
  read_number(o, path, "constraint_margin", [&](double v) { out.sqp.constraint_margin = v; });
  for (const char* key : {"feas_tol", "opt_tol", "fd_step"}) {
    if (o.contains(key) && !(o.at(key).get<double>() > 0.0))
      throw ConfigError(join(path, key), "must be positive");
  }
  if (auto it = o.find("frozen"); it != o.end()) {
    const std::string fp = join(path, "frozen");
    reject_unknown(*it, fp, {"Rm", "betaMD", "betaMI"});
    MobileTriple t;
    read_number(*it, fp, "Rm", [&](double v) { t.Rm = v; });
    read_number(*it, fp, "betaMD", [&](double v) { t.betaMD = deg2rad(v); });
    read_number(*it, fp, "betaMI", [&](double v) { t.betaMI = deg2rad(v); });
    frozen = t;
  }
  return out;
}

}  // namespace

NamedTrajectory catalog_trajectory(const std::string& id, const std::string& path) {
  const auto& c = catalog();
  auto it = c.find(id);
  if (it == c.end()) throw ConfigError(path, "unknown catalog trajectory '" + id + "'");
  return {id, it->second};
}

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("malformed JSON: ") + e.what());
  }
  reject_unknown(root, "",
                 {"geometry", "physical", "trajectory", "trajectories", "optimizer", "output_dir",
                  "seed"});
  RunConfig cfg;
  if (root.contains("geometry")) cfg.geometry = parse_geometry(root["geometry"], "geometry");
  if (root.contains("physical")) cfg.physical = parse_physical(root["physical"], "physical");
  if (root.contains("trajectory"))
    cfg.trajectories.push_back(parse_trajectory(root["trajectory"], "trajectory"));
  if (root.contains("trajectories")) {
    const json& list = root["trajectories"];
    if (!list.is_array()) throw ConfigError("trajectories", "expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      cfg.trajectories.push_back(
          parse_trajectory(list[i], "trajectories[" + std::to_string(i) + "]"));
    }
  }
  if (root.contains("optimizer"))
    cfg.optimizer = parse_optimizer(root["optimizer"], "optimizer", cfg.frozen);
  if (root.contains("output_dir")) {
    if (!root["output_dir"].is_string()) throw ConfigError("output_dir", "expected a string");
    cfg.output_dir = root["output_dir"].get<std::string>();
  }
  if (root.contains("seed")) {
    const json& s = root["seed"];
    if (!s.is_number_integer() || s.get<long long>() < 0)
      throw ConfigError("seed", "expected a non-negative integer");
    cfg.seed = s.get<std::uint64_t>();
  }
  cfg.optimizer.seed = cfg.seed;
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("<file>", "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace pkm
