#include "pkm/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "json.hpp"

namespace pkm {

namespace {

std::string chars(double v, std::chars_format fmt, int precision) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) v = 0.0;  // drop the sign of -0
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, fmt, precision);
  return std::string(buf, r.ptr);
}

std::string deg(double rad) { return format_number(rad2deg(rad)); }

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string format_number(double v) { return chars(v, std::chars_format::general, 12); }

std::string Table::csv() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

std::string svg(const Plot& plot) {
  constexpr double W = 960, H = 540, left = 90, right = 170, top = 50, bottom = 70;
  const double pw = W - left - right, ph = H - top - bottom;

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : plot.series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (plot.zero_line) ymin = std::min(ymin, 0.0), ymax = std::max(ymax, 0.0);
  if (xmax - xmin <= 0) xmax = xmin + 1;
  if (ymax - ymin <= 0) {
    const double pad = std::max(1e-12, std::abs(ymin) * 0.1 + 1e-12);
    ymin -= pad;
    ymax += pad;
  }
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };
  auto f2 = [](double v) { return chars(v, std::chars_format::fixed, 2); };
  auto tick = [](double v) { return chars(v, std::chars_format::general, 4); };

  std::string o;
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 960 540\" width=\"960\" "
       "height=\"540\" font-family=\"sans-serif\" font-size=\"13\">\n";
  o += "<rect x=\"0\" y=\"0\" width=\"960\" height=\"540\" fill=\"#ffffff\"/>\n";
  o += "<text x=\"" + f2(left + pw / 2) + "\" y=\"30\" text-anchor=\"middle\" font-size=\"16\">" +
       escape_xml(plot.title) + "</text>\n";
  o += "<rect x=\"" + f2(left) + "\" y=\"" + f2(top) + "\" width=\"" + f2(pw) + "\" height=\"" +
       f2(ph) + "\" fill=\"none\" stroke=\"#000000\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double xv = xmin + (xmax - xmin) * k / 5.0, yv = ymin + (ymax - ymin) * k / 5.0;
    o += "<line x1=\"" + f2(px(xv)) + "\" y1=\"" + f2(top + ph) + "\" x2=\"" + f2(px(xv)) +
         "\" y2=\"" + f2(top + ph + 5) + "\" stroke=\"#000000\"/>\n";
    o += "<text x=\"" + f2(px(xv)) + "\" y=\"" + f2(top + ph + 20) + "\" text-anchor=\"middle\">" +
         tick(xv) + "</text>\n";
    o += "<line x1=\"" + f2(left - 5) + "\" y1=\"" + f2(py(yv)) + "\" x2=\"" + f2(left) +
         "\" y2=\"" + f2(py(yv)) + "\" stroke=\"#000000\"/>\n";
    o += "<text x=\"" + f2(left - 8) + "\" y=\"" + f2(py(yv) + 4) + "\" text-anchor=\"end\">" +
         tick(yv) + "</text>\n";
  }
  o += "<text x=\"" + f2(left + pw / 2) + "\" y=\"" + f2(H - 20) + "\" text-anchor=\"middle\">" +
       escape_xml(plot.xlabel) + "</text>\n";
  o += "<text x=\"20\" y=\"" + f2(top + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 20 " +
       f2(top + ph / 2) + ")\">" + escape_xml(plot.ylabel) + "</text>\n";
  if (plot.zero_line) {
    o += "<line x1=\"" + f2(left) + "\" y1=\"" + f2(py(0)) + "\" x2=\"" + f2(left + pw) +
         "\" y2=\"" + f2(py(0)) + "\" stroke=\"#999999\" stroke-dasharray=\"4 4\"/>\n";
  }
  for (std::size_t s = 0; s < plot.series.size(); ++s) {
    const auto& ser = plot.series[s];
    const char* color = kPalette[s % 8];
    std::string pts;
    auto flush = [&] {
      if (!pts.empty()) {
        o += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
             "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
      }
      pts.clear();
    };
    for (std::size_t i = 0; i < ser.x.size() && i < ser.y.size(); ++i) {
      if (!std::isfinite(ser.x[i]) || !std::isfinite(ser.y[i])) {
        flush();
        continue;
      }
      if (!pts.empty()) pts += ' ';
      pts += f2(px(ser.x[i])) + "," + f2(py(ser.y[i]));
    }
    flush();
    const double ly = top + 10 + 20.0 * static_cast<double>(s);
    o += "<line x1=\"" + f2(W - right + 15) + "\" y1=\"" + f2(ly) + "\" x2=\"" +
         f2(W - right + 40) + "\" y2=\"" + f2(ly) + "\" stroke=\"" + color +
         "\" stroke-width=\"2\"/>\n";
    o += "<text x=\"" + f2(W - right + 46) + "\" y=\"" + f2(ly + 4) + "\">" +
         escape_xml(ser.name) + "</text>\n";
  }
  o += "</svg>\n";
  return o;
}

void write_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("write failed for '" + path + "'");
}

Table ik_table(const PlatformGeometry& geom, const ViaPointSeries& series) {
  Table t;
  t.header = {"t",     "xm",    "zm",    "theta_deg", "psi_deg", "xdot", "zdot", "thetadot",
              "psidot", "Fx",   "Fy",    "Fz",        "Tx",      "Ty",   "Tz",   "q13",
              "q23",   "q33",   "q42"};
  for (std::size_t k = 0; k < series.size(); ++k) {
    const ViaPoint& vp = series.points[k];
    Vec4 q;
    try {
      q = inverse_kinematics_active(geom, vp.pose);
    } catch (const UnreachablePose& e) {
      throw UnreachablePose(e.limb, static_cast<long>(k));
    }
    std::vector<std::string> row = {format_number(vp.t), format_number(vp.pose.xm),
                                    format_number(vp.pose.zm), deg(vp.pose.theta),
                                    deg(vp.pose.psi)};
    for (int i = 0; i < 4; ++i) row.push_back(format_number(vp.rates(i)));
    for (int i = 0; i < 3; ++i) row.push_back(format_number(vp.wrench.force(i)));
    for (int i = 0; i < 3; ++i) row.push_back(format_number(vp.wrench.torque(i)));
    for (int i = 0; i < 4; ++i) row.push_back(format_number(q(i)));
    t.add(std::move(row));
  }
  return t;
}

Table detmap_table(const PlatformGeometry& geom, const ViaPointSeries& series) {
  const auto poses = series.poses();
  const auto det_x = det_along_path(geom, poses);
  const auto det_s = secondary_det_along_path(geom, poses);
  Table t;
  t.header = {"t", "det_phi_x", "det_phi_q_s"};
  for (std::size_t k = 0; k < series.size(); ++k) {
    t.add({format_number(series.points[k].t), format_number(det_x[k]), format_number(det_s[k])});
  }
  return t;
}

Table forces_table(const std::vector<PointStatics>& points) {
  Table t;
  t.header = {"t",  "F1", "F2", "F3", "F4", "P1", "P2", "P3", "P4", "v1", "v2", "v3", "v4",
              "det_phi_x", "flag"};
  for (const auto& ps : points) {
    const bool solved = ps.status == PointStatus::ok || ps.status == PointStatus::near_crossing;
    std::vector<std::string> row = {format_number(ps.t)};
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (int i = 0; i < 4; ++i) row.push_back(format_number(solved ? ps.solution.forces(i) : nan));
    for (int i = 0; i < 4; ++i) row.push_back(format_number(solved ? ps.solution.power(i) : nan));
    for (int i = 0; i < 4; ++i) row.push_back(format_number(ps.q_dot_active(i)));
    row.push_back(format_number(ps.det_phi_x));
    row.push_back(std::to_string(static_cast<int>(ps.status)));
    t.add(std::move(row));
  }
  return t;
}

namespace {

std::vector<std::string> result_row(const std::string& id, const OptimizationResult& r) {
  const PlatformGeometry g = r.design.geometry();
  return {id,
          to_string(r.design.stage),
          format_number(g.R),
          format_number(g.Rm),
          format_number(g.ds),
          deg(g.betaFD),
          deg(g.betaFI),
          deg(g.betaMD),
          deg(g.betaMI),
          format_number(r.objective),
          format_number(r.report.min_singularity()),
          format_number(r.report.min_stroke()),
          format_number(r.report.min_angle()),
          r.report.det_sign_change ? "1" : "0",
          r.feasible() ? "1" : "0",
          to_string(r.status),
          std::to_string(r.iterations.size()),
          std::to_string(r.start_index)};
}

nlohmann::json result_json(const OptimizationResult& r) {
  using nlohmann::json;
  const PlatformGeometry g = r.design.geometry();
  json j;
  j["stage"] = to_string(r.design.stage);
  j["design"] = std::vector<double>(r.design.values.begin(), r.design.values.end());
  j["geometry"] = {{"R", g.R},           {"Rm", g.Rm},
                   {"ds", g.ds},         {"betaFD_deg", rad2deg(g.betaFD)},
                   {"betaFI_deg", rad2deg(g.betaFI)}, {"betaMD_deg", rad2deg(g.betaMD)},
                   {"betaMI_deg", rad2deg(g.betaMI)}};
  j["objective"] = r.objective;
  j["status"] = to_string(r.status);
  j["message"] = r.message;
  j["feasible"] = r.feasible();
  j["evaluations"] = r.evaluations;
  j["start_index"] = r.start_index;
  j["constraints"] = {{"min_singularity", r.report.min_singularity()},
                      {"min_stroke", r.report.min_stroke()},
                      {"min_angle", r.report.min_angle()},
                      {"det_sign_change", r.report.det_sign_change},
                      {"det_negated", r.report.det_negated},
                      {"det_ref_index", r.report.det_ref_index},
                      {"det_ref", r.report.det_ref},
                      {"reachable", r.report.reachable}};
  json starts = json::array();
  for (const auto& s : r.starts) {
    starts.push_back({{"x0", std::vector<double>(s.x0.begin(), s.x0.end())},
                      {"x", std::vector<double>(s.x.begin(), s.x.end())},
                      {"objective", s.objective},
                      {"status", to_string(s.status)},
                      {"feasible", s.feasible},
                      {"iterations", s.iterations}});
  }
  j["starts"] = starts;
  json log = json::array();
  for (const auto& it : r.iterations) {
    log.push_back({{"iteration", it.iteration},
                   {"objective", it.objective},
                   {"max_violation", it.max_violation},
                   {"step_norm", it.step_norm},
                   {"merit", it.merit},
                   {"merit_previous", it.merit_previous},
                   {"penalty", it.penalty},
                   {"alpha", it.alpha}});
  }
  j["iterations"] = log;
  return j;
}

bool has_run(const OptimizationResult& r) { return r.design.values.size() > 0; }

}  // namespace

Table results_table(const PipelineResult& result, bool with_stage1, bool with_stage2) {
  Table t;
  t.header = {"trajectory", "stage",      "R",         "Rm",         "ds",
              "betaFD_deg", "betaFI_deg", "betaMD_deg", "betaMI_deg", "objective",
              "min_singularity", "min_stroke", "min_angle", "det_sign_change", "feasible",
              "status",     "iterations", "start"};
  for (const auto& e : result.entries) {
    if (with_stage1 && has_run(e.stage1)) t.add(result_row(e.id, e.stage1));
    if (with_stage2 && has_run(e.stage2)) t.add(result_row(e.id, e.stage2));
  }
  return t;
}

Table objectives_table(const PipelineResult& result) {
  Table t;
  t.header = {"objective"};
  std::vector<std::string> f7 = {"F_7v"}, f4 = {"F_4v"};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& e : result.entries) {
    t.header.push_back(e.id);
    f7.push_back(format_number(has_run(e.stage1) ? e.stage1.objective : nan));
    f4.push_back(format_number(has_run(e.stage2) ? e.stage2.objective : nan));
  }
  t.add(f7);
  t.add(f4);
  return t;
}

Table geometries_table(const PipelineResult& result) {
  Table t;
  t.header = {"trajectory", "ds_mm", "R_mm", "betaFD_deg", "betaFI_deg"};
  for (const auto& e : result.entries) {
    if (!has_run(e.stage2)) continue;
    const PlatformGeometry g = e.stage2.design.geometry();
    t.add({e.id, format_number(g.ds * 1000.0), format_number(g.R * 1000.0), deg(g.betaFD),
           deg(g.betaFI)});
  }
  return t;
}

std::string result_bundle(const PipelineResult& result, const std::string& stage,
                          std::uint64_t seed) {
  using nlohmann::json;
  json j;
  j["stage"] = stage;
  j["seed"] = seed;
  j["frozen"] = {{"Rm", result.frozen.Rm},
                 {"betaMD_deg", rad2deg(result.frozen.betaMD)},
                 {"betaMI_deg", rad2deg(result.frozen.betaMI)}};
  json entries = json::array();
  for (const auto& e : result.entries) {
    json je;
    je["trajectory"] = e.id;
    if (has_run(e.stage1)) je["stage1"] = result_json(e.stage1);
    if (has_run(e.stage2)) je["stage2"] = result_json(e.stage2);
    if (!e.error.empty()) je["error"] = e.error;
    entries.push_back(je);
  }
  j["entries"] = entries;
  return j.dump(2) + "\n";
}

}  // namespace pkm
