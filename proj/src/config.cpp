#include "headzoom/config.hpp"

#include "headzoom/text.hpp"

namespace headzoom {

RunConfig parseRunConfig(std::string_view contents) {
  RunConfig config;
  text::forEachLine(contents, [&](std::size_t lineNo, std::string_view raw) {
    const std::string_view line = text::trim(raw);
    if (line.empty() || line.front() == '#') return;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw LineError(ErrorCode::ParseError, lineNo, "expected key = value");
    const std::string_view key = text::trim(line.substr(0, eq));
    const std::string value(text::trim(line.substr(eq + 1)));
    auto number = [&] {
      const auto v = text::parseDouble(value);
      if (!v || !std::isfinite(*v)) throw LineError(ErrorCode::ParseError, lineNo, "bad number '" + value + "'");
      return *v;
    };
    auto curve = [&] {
      try {
        return parseCurve(value);
      } catch (const Error& e) {
        throw LineError(ErrorCode::ParseError, lineNo, e.what());
      }
    };
    if (key == "mode") {
      const auto mode = parseMode(value);
      if (!mode) throw LineError(ErrorCode::ParseError, lineNo, "unknown mode '" + value + "'");
      config.engine.mode = *mode;
    } else if (key == "zoom_min") {
      config.engine.zoom.minZoom = number();
    } else if (key == "zoom_max") {
      config.engine.zoom.maxZoom = number();
    } else if (key == "max_head_speed") {
      config.engine.guard.maxSpeed = number();
    } else if (key == "max_gap_s") {
      config.engine.guard.maxGapSeconds = number();
    } else if (key == "epsilon_zoom") {
      config.zoomEpsilon = number();
    } else if (key == "q_curve") {
      config.qCurve = curve();
    } else if (key == "r_curve") {
      config.rCurve = curve();
    } else {
      throw LineError(ErrorCode::ParseError, lineNo, "unknown key '" + std::string(key) + "'");
    }
  });
  return config;
}

RunConfig readRunConfig(const std::filesystem::path& path) {
  return text::parseFile(path, parseRunConfig);
}

EngineConfigd resolveEngineConfig(const RunConfig& config) {
  EngineConfigd engine = config.engine;
  if (config.qCurve || config.rCurve) {
    FilterScheduled schedule = builtinSchedule<double>(engine.mode);
    if (config.qCurve) schedule.qCurve = *config.qCurve;
    if (config.rCurve) schedule.rCurve = *config.rCurve;
    engine.schedule = schedule;
  }
  validate(engine.zoom);
  return engine;
}

}  // namespace headzoom
