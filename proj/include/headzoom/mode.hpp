#pragma once

#include <optional>
#include <string_view>

namespace headzoom {

/// Interaction technique driving the image plane.
enum class Mode { Static, Parallel, Tilt };

constexpr std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::Static: return "static";
    case Mode::Parallel: return "parallel";
    case Mode::Tilt: return "tilt";
  }
  return "static";
}

/// Accepts the lowercase tags written by `to_string` and their capitalized forms.
constexpr std::optional<Mode> parseMode(std::string_view text) {
  if (text == "static" || text == "Static") return Mode::Static;
  if (text == "parallel" || text == "Parallel") return Mode::Parallel;
  if (text == "tilt" || text == "Tilt") return Mode::Tilt;
  return std::nullopt;
}

}  // namespace headzoom
