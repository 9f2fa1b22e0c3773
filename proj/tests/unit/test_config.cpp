#include "ietmfc/app/commands.hpp"
#include "ietmfc/app/config.hpp"
#include "ietmfc/app/csv.hpp"
#include "ietmfc/app/svg.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <unistd.h>

namespace ietmfc::app {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() /
                       ("ietmfc_config_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

TEST(Config, DefaultMatchesReferenceScenario) {
  const RunConfig cfg = config_from_json(json::object());
  const Scenario ref = reference_scenario();
  EXPECT_EQ(cfg.scenario.params.A, ref.params.A);
  EXPECT_EQ(cfg.scenario.errors.mean_error, ref.errors.mean_error);
  EXPECT_EQ(cfg.scenario.init.N, 100);
  EXPECT_EQ(cfg.regime, Regime::erroneous);
  EXPECT_EQ(to_json(cfg), to_json(default_config()));
}

TEST(Config, FileRoundTripIsBitExact) {
  RunConfig cfg = default_config();
  cfg.scenario.params.A(0, 0) = 0.1 + 0.2;
  cfg.scenario.params.D(0, 0) = std::nextafter(0.1, 1.0);
  cfg.scenario.errors.bound = 1.0 / 3.0;
  cfg.scenario.errors.mean_error(0) = -1e-300;
  cfg.scenario.grid.mod_points = {5, 50};
  cfg.scenario.init.master_seed = std::numeric_limits<std::uint64_t>::max();
  cfg.scenario.init.recenter = true;
  cfg.regime = Regime::iet_dmfc;
  cfg.outputs.charts = false;
  const fs::path path = scratch("roundtrip.json");
  save_config(cfg, path);
  const RunConfig back = load_config(path);
  EXPECT_EQ(back.scenario.params.A(0, 0), 0.1 + 0.2);
  EXPECT_EQ(back.scenario.params.D(0, 0), std::nextafter(0.1, 1.0));
  EXPECT_EQ(back.scenario.errors.bound, 1.0 / 3.0);
  EXPECT_EQ(back.scenario.errors.mean_error(0), -1e-300);
  EXPECT_EQ(back.scenario.grid.mod_points, (std::vector<int>{5, 50}));
  EXPECT_EQ(back.scenario.init.master_seed, std::numeric_limits<std::uint64_t>::max());
  EXPECT_TRUE(back.scenario.init.recenter);
  EXPECT_EQ(back.regime, Regime::iet_dmfc);
  EXPECT_FALSE(back.outputs.charts);
  EXPECT_EQ(to_json(back), to_json(cfg));
}

TEST(Config, MatricesAsRowsOrBareNumbers) {
  const json doc = json::parse(R"({
    "params": {"A": [[0.5, 0.2], [-0.3, 0.4]], "B": [[0.6], [0.3]], "R": 2.0, "s": [1, 2]},
    "grid": {"mod_points": [5]}
  })");
  const RunConfig cfg = config_from_json(doc);
  EXPECT_EQ(cfg.scenario.params.A.rows(), 2);
  EXPECT_EQ(cfg.scenario.params.A(1, 0), -0.3);
  EXPECT_EQ(cfg.scenario.params.B.cols(), 1);
  EXPECT_EQ(cfg.scenario.params.R(0, 0), 2.0);
  EXPECT_EQ(cfg.scenario.params.s(1), 2.0);
  // Parsing succeeds; the dimension mismatch is validate()'s business.
  EXPECT_FALSE(validate(cfg.scenario).ok());
}

TEST(Config, RejectsUnknownOrMalformedInput) {
  EXPECT_THROW(config_from_json(json::parse(R"({"params": {"Z": 1}})")), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"({"extras": {}})")), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"({"regime": "psychic"})")), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"({"params": {"A": "one"}})")), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"({"params": {"A": [[1, 2], [3]]}})")), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"({"init": {"N": 1.5}})")), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"({"init": {"master_seed": -1}})")), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"([1, 2])")), ConfigError);
  EXPECT_THROW(load_config(scratch("does_not_exist.json")), ConfigError);
  const fs::path broken = scratch("broken.json");
  write_file_atomic(broken, "{\"params\": ");
  EXPECT_THROW(load_config(broken), ConfigError);
}

TEST(Config, HashIgnoresOutputsOnly) {
  RunConfig a = default_config();
  const std::string h = scenario_hash(a);
  EXPECT_EQ(h.size(), 16u);
  EXPECT_EQ(h, scenario_hash(default_config()));
  a.outputs.charts = false;
  EXPECT_EQ(scenario_hash(a), h);
  a.scenario.init.master_seed = 2;
  EXPECT_NE(scenario_hash(a), h);
}

TEST(IntList, Parses) {
  EXPECT_EQ(parse_int_list("5,50"), (std::vector<int>{5, 50}));
  EXPECT_EQ(parse_int_list(" 1, 2 ,3"), (std::vector<int>{1, 2, 3}));
  EXPECT_TRUE(parse_int_list("").empty());
  EXPECT_THROW(parse_int_list("1,,2"), ConfigError);
  EXPECT_THROW(parse_int_list("a"), ConfigError);
  EXPECT_THROW(parse_int_list("1.5"), ConfigError);
}

TEST(Threads, EnvironmentCap) {
  ::setenv("IETMFC_THREADS", "3", 1);
  EXPECT_EQ(worker_threads(), 3);
  ::unsetenv("IETMFC_THREADS");
  EXPECT_GE(worker_threads(), 1);
}

TEST(Csv, DoublesRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-310, 1e300, 0.0, 123456789.0}) {
    const std::string s = format_double(v);
    EXPECT_EQ(std::strtod(s.c_str(), nullptr), v) << s;
  }
  EXPECT_EQ(format_double(0.5), "0.5");
}

TEST(Csv, WriteParseAndLookup) {
  CsvWriter w({"t", "x_0", "x_1"});
  w.cell(0.25).cells(Eigen::Vector2d(1.0, -3.5)).end_row();
  w.cell(0.5).cell(2L).cell(1e-9).end_row();
  const CsvTable t = parse_csv(w.text());
  EXPECT_EQ(t.header, (std::vector<std::string>{"t", "x_0", "x_1"}));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.number(0, t.column("x_1")), -3.5);
  EXPECT_EQ(t.number(1, 2), 1e-9);
  EXPECT_EQ(t.indexed("x"), (std::vector<std::size_t>{1, 2}));
  EXPECT_FALSE(t.has_column("y"));
  EXPECT_THROW(t.column("y"), std::out_of_range);
  CsvWriter bad({"a", "b"});
  bad.cell(1.0);
  EXPECT_THROW(bad.end_row(), std::logic_error);
  EXPECT_EQ(indexed_columns("z", 2), (std::vector<std::string>{"z_0", "z_1"}));
}

TEST(Svg, WellFormedAndEscaped) {
  Chart c;
  c.title = "a < b & c";
  c.x_label = "t";
  c.y_label = "z";
  c.series.push_back({"one", {0.0, 1.0, 2.0}, {1.0, 0.5, 0.25}, palette(0), 1.5, false});
  c.series.push_back({"two", {0.0, 2.0}, {0.0, 0.0}, palette(1), 1.0, true});
  const std::string svg = render_svg(c);
  EXPECT_EQ(svg.rfind("<svg", 0) == 0 || svg.rfind("<?xml", 0) == 0, true);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_NE(svg.find("a &lt; b &amp; c"), std::string::npos);
  EXPECT_EQ(svg.find("a < b"), std::string::npos);
  EXPECT_NE(svg.find("<polyline"), std::string::npos);
  EXPECT_EQ(svg.find("nan"), std::string::npos);
}

}  // namespace
}  // namespace ietmfc::app
