#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "orlicz/report.hpp"
#include "orlicz/verify.hpp"

using namespace orlicz;

TEST_CASE("FNV-1a reference vectors") {
  CHECK(report::hex64(report::fnv1a("")) == "cbf29ce484222325");
  CHECK(report::hex64(report::fnv1a("a")) == "af63dc4c8601ec8c");
  CHECK(report::hex64(report::fnv1a("foobar")) == "85944171f73967e8");
}

TEST_CASE("envelope embeds the config hash and tolerances") {
  const nlohmann::json config = {{"seed", 7}, {"suite", "calculus"}};
  const auto a = report::envelope("verify", config, verify::tolerances().to_json(), {{"x", 1}});
  const auto b = report::envelope("verify", config, verify::tolerances().to_json(), {{"x", 1}});
  CHECK(a.dump() == b.dump());
  CHECK(a["config_hash"] == report::hex64(report::fnv1a(config.dump())));
  CHECK(a["tolerances"]["conjugate_rel"] == 1e-5);
}

TEST_CASE("CSV and SVG emission") {
  CHECK(report::csv_table({"a", "b"}, {{1.0, 2.5}, {0.1}}) == "a,b\n1,0.1\n2.5,\n");
  const std::string svg = report::svg_line_chart("t", {{"s", {1, 2, 4}, {1, 4, 16}}}, true, true);
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.rfind("</svg>") != std::string::npos);
}

TEST_CASE("ORLICZ_LAB_OUT overrides the requested directory") {
  const auto tmp = std::filesystem::temp_directory_path() / "orlicz_lab_env_test";
  setenv("ORLICZ_LAB_OUT", tmp.c_str(), 1);
  CHECK(report::output_dir("ignored") == tmp);
  CHECK(std::filesystem::is_directory(tmp));
  unsetenv("ORLICZ_LAB_OUT");
  std::filesystem::remove_all(tmp);
}

TEST_CASE("suites map to criteria") {
  CHECK(verify::suite_criteria("calculus") == std::vector<int>{1, 2, 3});
  CHECK(verify::suite_criteria("all").size() == 11);
  CHECK_THROWS(verify::suite_criteria("nope"));
  // Same seed, same data.
  const auto a = verify::run_criterion(4, 7);
  const auto b = verify::run_criterion(4, 7);
  CHECK(a.data.dump() == b.data.dump());
}
