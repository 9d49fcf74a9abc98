#pragma once

// key = value run configuration mirroring EngineConfig, read from the file
// named by HEADZOOM_CONFIG. Recognised keys: mode, zoom_min, zoom_max,
// max_head_speed, max_gap_s, epsilon_zoom, q_curve, r_curve. Curves are
// written "x:y x:y ..." and replace that half of the mode's built-in schedule.

#include <filesystem>
#include <optional>
#include <string_view>

#include "headzoom/modes.hpp"

namespace headzoom {

struct RunConfig {
  EngineConfigd engine{};
  std::optional<ParamCurved> qCurve;
  std::optional<ParamCurved> rCurve;
  std::optional<double> zoomEpsilon;
};

RunConfig parseRunConfig(std::string_view contents);
RunConfig readRunConfig(const std::filesystem::path& path);

/// Engine configuration with curve overrides applied to the current mode.
EngineConfigd resolveEngineConfig(const RunConfig& config);

}  // namespace headzoom
