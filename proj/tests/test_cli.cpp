#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct Sandbox {
  fs::path dir;
  explicit Sandbox(const std::string& name) : dir(fs::temp_directory_path() / ("pkm_cli_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Sandbox() { fs::remove_all(dir); }

  std::string config(const std::string& text) const {
    const fs::path p = dir / "config.json";
    std::ofstream(p) << text;
    return p.string();
  }
  fs::path out() const { return dir / "out"; }
};

int run(const std::string& args) {
  const std::string cmd = std::string(PKM_BINARY) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const fs::path& p) {
  const std::string s = slurp(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit 64") {
    CHECK(run("") == 64);
    CHECK(run("ik") == 64);
    CHECK(run("frobnicate --config x.json") == 64);
    Sandbox sb("usage");
    const std::string cfg = sb.config(R"({"trajectory": "Tr8"})");
    CHECK(run("optimize --config " + cfg + " --stage eight") == 64);
  }

  TEST_CASE("configuration errors exit 64 without output") {
    Sandbox sb("config");
    const std::string out = " --out " + sb.out().string();
    CHECK(run("ik --config " + sb.config(R"({"trajectory": "Tr8", "bogus": 1})") + out) == 64);
    CHECK(run("ik --config " + sb.config("{ not json") + out) == 64);
    CHECK(run("ik --config " + sb.config(R"({"trajectory": "Tr42"})") + out) == 64);
    CHECK(run("ik --config " + (sb.dir / "missing.json").string() + out) == 64);
    CHECK(run("detmap --config " + sb.config("{}") + out) == 64);
    CHECK(run("optimize --config " + sb.config(R"({"optimizer": {"starts": -2}})") + out) == 64);
    CHECK_FALSE(fs::exists(sb.out()));
  }

  TEST_CASE("ik, detmap and forces write their tables") {
    Sandbox sb("sweeps");
    const std::string cfg = sb.config(R"({"trajectory": "Tr8"})") + " --out " + sb.out().string();
    CHECK(run("ik --config " + cfg) == 0);
    CHECK(count_lines(sb.out() / "ik_Tr8.csv") == 68);
    CHECK(run("detmap --config " + cfg) == 0);
    CHECK(count_lines(sb.out() / "detmap_Tr8.csv") == 68);
    CHECK(fs::exists(sb.out() / "detmap_Tr8.svg"));
    CHECK(run("forces --config " + cfg) == 0);
    CHECK(count_lines(sb.out() / "forces_Tr8.csv") == 68);
    CHECK(fs::exists(sb.out() / "forces_Tr8.svg"));
    CHECK(fs::exists(sb.out() / "power_Tr8.svg"));
    // --trajectory overrides the config entry.
    CHECK(run("ik --config " + cfg + " --trajectory Tr1") == 0);
    CHECK(fs::exists(sb.out() / "ik_Tr1.csv"));
  }

  TEST_CASE("a path that cannot be sampled is a runtime failure") {
    Sandbox sb("runtime");
    const std::string cfg = sb.config(R"({"trajectory": {"kind": "ellipse", "x0": -0.15, "v0": 0.02,
                                         "a": 0.4, "b": 0.2, "duration": 30, "dt": 0.5}})");
    CHECK(run("ik --config " + cfg + " --out " + sb.out().string()) == 2);
  }

  TEST_CASE("optimize writes the result bundle") {
    Sandbox sb("optimize");
    const std::string cfg =
        sb.config(R"({"trajectory": "Tr3", "optimizer": {"starts": 2, "max_iterations": 30}})");
    const std::string out = " --out " + sb.out().string();
    CHECK(run("optimize --stage seven --config " + cfg + out) == 0);
    CHECK(fs::exists(sb.out() / "results.csv"));
    CHECK(fs::exists(sb.out() / "objectives.csv"));
    CHECK_FALSE(fs::exists(sb.out() / "geometries.csv"));
    CHECK(slurp(sb.out() / "result.json").find("\"stage\": \"seven\"") != std::string::npos);
    CHECK(run("optimize --stage four --config " + cfg + out) == 0);
    CHECK(fs::exists(sb.out() / "geometries.csv"));
  }
}
