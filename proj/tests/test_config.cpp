#include <filesystem>

#include "doctest.h"
#include "headzoom/config.hpp"
#include "headzoom/text.hpp"

using namespace headzoom;

TEST_CASE("parseRunConfig reads every key") {
  const auto c = parseRunConfig(
      "# lab setup\n"
      "mode = tilt\n"
      "zoom_min = 1.5\n"
      "zoom_max=6\n"
      "\n"
      "max_head_speed = 3\n"
      "max_gap_s = 0.25\n"
      "epsilon_zoom = 0.2\n"
      "q_curve = 0:0.02 1:0.02\n");
  CHECK(c.engine.mode == Mode::Tilt);
  CHECK(c.engine.zoom.minZoom == 1.5);
  CHECK(c.engine.zoom.maxZoom == 6);
  CHECK(c.engine.guard.maxSpeed == 3);
  CHECK(c.engine.guard.maxGapSeconds == 0.25);
  CHECK(c.zoomEpsilon == 0.2);
  REQUIRE(c.qCurve);
  CHECK(evalCurve(*c.qCurve, 0.3) == doctest::Approx(0.02));
  CHECK_FALSE(c.rCurve);
}

TEST_CASE("defaults survive an empty config") {
  const auto c = parseRunConfig("");
  const EngineConfigd d;
  CHECK(c.engine.mode == d.mode);
  CHECK(c.engine.zoom.minZoom == d.zoom.minZoom);
  CHECK(c.engine.zoom.maxZoom == d.zoom.maxZoom);
  CHECK_FALSE(c.zoomEpsilon);
}

TEST_CASE("config errors name the line") {
  for (const char* bad : {"mode = zoomy\n", "zoom_min = lots\n", "colour = red\n", "just words\n", "q_curve = 0:1 0.5\n",
                          "zoom_max = inf\n"}) {
    CAPTURE(bad);
    try {
      parseRunConfig(std::string("# header\n") + bad);
      FAIL("expected ParseError");
    } catch (const LineError& e) {
      CHECK(e.code() == ErrorCode::ParseError);
      CHECK(e.line() == 2);
    }
  }
}

TEST_CASE("resolveEngineConfig overlays curves on the mode's schedule") {
  RunConfig c = parseRunConfig("mode = parallel\nr_curve = 0:0.001 1:0.001\n");
  const auto engine = resolveEngineConfig(c);
  REQUIRE(engine.schedule);
  const auto builtin = builtinSchedule<double>(Mode::Parallel);
  for (double x : {0.0, 0.6, 1.0}) {
    CHECK(evalCurve(engine.schedule->qCurve, x) == evalCurve(builtin.qCurve, x));
    CHECK(evalCurve(engine.schedule->rCurve, x) == doctest::Approx(0.001));
  }
  CHECK_FALSE(resolveEngineConfig(parseRunConfig("mode = static\n")).schedule);
  CHECK_THROWS_AS(resolveEngineConfig(parseRunConfig("zoom_min = 4\nzoom_max = 2\n")), Error);
}

TEST_CASE("readRunConfig prefixes errors with the path") {
  const auto path = std::filesystem::temp_directory_path() / "headzoom_config_test.conf";
  text::writeFile(path, "mode = static\nbogus = 1\n");
  try {
    readRunConfig(path);
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    const std::string what = e.what();
    CHECK(what.rfind("ParseError: ", 0) == 0);
    CHECK(what.find(path.string()) != std::string::npos);
    CHECK(what.find("line 2") != std::string::npos);
  }
  std::filesystem::remove(path);
}
