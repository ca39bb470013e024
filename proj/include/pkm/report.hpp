// CSV tables, SVG line charts and the JSON result bundle. Output is
// locale-independent and byte-stable for fixed input.
#pragma once

#include <string>
#include <vector>

#include "pkm/reconfig.hpp"
#include "pkm/statics.hpp"
#include "pkm/trajectories.hpp"

namespace pkm {

/// 12 significant digits, '.' separator, "nan" for NaN.
std::string format_number(double v);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
  std::string csv() const;  // LF line endings, header always present
};

struct PlotSeries {
  std::string name;
  std::vector<double> x, y;
};

struct Plot {
  std::string title, xlabel, ylabel;
  std::vector<PlotSeries> series;
  bool zero_line = false;
};

/// Self-contained SVG, 960x540 viewBox, one polyline per series.
std::string svg(const Plot& plot);

/// Writes the whole string, creating parent directories.
void write_file(const std::string& path, const std::string& content);

/// t, pose, rates, wrench and active lengths. Throws UnreachablePose with the index.
Table ik_table(const PlatformGeometry& geom, const ViaPointSeries& series);
Table detmap_table(const PlatformGeometry& geom, const ViaPointSeries& series);
/// Flag column: 0 ok, 1 next to a det(Phi_x) sign change, 2 near singular, 3 unreachable.
Table forces_table(const std::vector<PointStatics>& points);

Table results_table(const PipelineResult& result, bool with_stage1, bool with_stage2);
/// Columns per trajectory, rows F_7v and F_4v.
Table objectives_table(const PipelineResult& result);
/// One row per trajectory: ds, R (mm) and bFD, bFI (deg) of the stage-2 design.
Table geometries_table(const PipelineResult& result);

std::string result_bundle(const PipelineResult& result, const std::string& stage,
                          std::uint64_t seed);

}  // namespace pkm
