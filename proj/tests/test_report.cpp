#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "pkm/report.hpp"

using namespace pkm;

TEST_SUITE("report") {
  TEST_CASE("number formatting") {
    CHECK(format_number(0.0) == "0");
    CHECK(format_number(-0.0) == "0");
    CHECK(format_number(1.5) == "1.5");
    CHECK(format_number(-2.0) == "-2");
    CHECK(format_number(1.0 / 3.0) == "0.333333333333");
    CHECK(format_number(1e-20) == "1e-20");
    CHECK(format_number(std::nan("")) == "nan");
    CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
  }

  TEST_CASE("csv layout") {
    Table t;
    t.header = {"a", "b"};
    t.add({"1", "2"});
    t.add({"3", "4"});
    CHECK(t.csv() == "a,b\n1,2\n3,4\n");
    Table empty;
    empty.header = {"x"};
    CHECK(empty.csv() == "x\n");
  }

  TEST_CASE("tables along Tr8") {
    const ViaPointSeries s = build(catalog().at("Tr8"));
    const PlatformGeometry g;
    const Table ik = ik_table(g, s);
    CHECK(ik.rows.size() == 67);
    CHECK(ik.header.front() == "t");
    CHECK(ik.header.back() == "q42");
    for (const auto& r : ik.rows) CHECK(r.size() == ik.header.size());
    const Table d = detmap_table(g, s);
    CHECK(d.header == std::vector<std::string>{"t", "det_phi_x", "det_phi_q_s"});
    const Table f = forces_table(forces_along_path(g, PhysicalParams{}, s));
    CHECK(f.rows.size() == 67);
    CHECK(f.header.back() == "flag");
    int flagged = 0;
    for (const auto& r : f.rows) flagged += r.back() == "1";
    CHECK(flagged >= 2);
  }

  TEST_CASE("svg is deterministic and well formed") {
    Plot p{"det <along> Tr8", "t (s)", "det", {}, true};
    p.series.push_back({"a", {0, 1, 2, 3}, {1, -1, std::nan(""), 2}});
    p.series.push_back({"b", {0, 1, 2, 3}, {0, 0.5, 1, 1.5}});
    const std::string a = svg(p), b = svg(p);
    CHECK(a == b);
    CHECK(a.rfind("<svg", 0) == 0);
    CHECK(a.find("viewBox=\"0 0 960 540\"") != std::string::npos);
    CHECK(a.find("&lt;along&gt;") != std::string::npos);
    CHECK(a.find("</svg>") != std::string::npos);
    // The NaN splits series "a" into two polylines.
    std::size_t lines = 0;
    for (std::size_t pos = a.find("<polyline"); pos != std::string::npos; pos = a.find("<polyline", pos + 1))
      ++lines;
    CHECK(lines == 3);
  }

  TEST_CASE("write_file creates directories") {
    const auto dir = std::filesystem::temp_directory_path() / "pkm_report_test" / "nested";
    std::filesystem::remove_all(dir.parent_path());
    write_file((dir / "x.csv").string(), "a\n1\n");
    std::ifstream in(dir / "x.csv");
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == "a\n1\n");
    std::filesystem::remove_all(dir.parent_path());
  }
}
