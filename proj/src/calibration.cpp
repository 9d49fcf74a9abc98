#include "headzoom/calibration.hpp"

#include <map>
#include <sstream>

#include "headzoom/text.hpp"

namespace headzoom {

namespace {

std::string joined(std::initializer_list<double> values) {
  std::string out;
  for (double v : values) {
    if (!out.empty()) out += ' ';
    out += text::formatDouble(v);
  }
  return out;
}

std::vector<double> numbers(const std::map<std::string, std::pair<std::size_t, std::string>>& fields,
                            const std::string& key, std::size_t count) {
  const auto it = fields.find(key);
  if (it == fields.end()) throw Error(ErrorCode::ParseError, "calibration profile is missing key '" + key + "'");
  const auto& [line, value] = it->second;
  const auto tokens = text::splitWhitespace(value);
  if (tokens.size() != count) {
    throw LineError(ErrorCode::ParseError, line, "key '" + key + "' expects " + std::to_string(count) + " numbers");
  }
  std::vector<double> out;
  for (auto token : tokens) {
    const auto v = text::parseDouble(token);
    if (!v) throw LineError(ErrorCode::ParseError, line, "bad number '" + std::string(token) + "'");
    out.push_back(*v);
  }
  return out;
}

}  // namespace

std::string formatProfile(const CalibrationProfiled& profile) {
  const auto& n = profile.neutralPose;
  std::ostringstream out;
  out << "# headzoom calibration profile (metres, radians)\n";
  out << "neutral_timestamp_ms = " << text::formatDouble(n.timestampMs) << '\n';
  out << "neutral_position = " << joined({n.position.x(), n.position.y(), n.position.z()}) << '\n';
  out << "neutral_orientation = " << joined({n.orientation.yaw, n.orientation.pitch, n.orientation.roll}) << '\n';
  out << "forward_limit = " << text::formatDouble(profile.forwardLimit) << '\n';
  out << "backward_limit = " << text::formatDouble(profile.backwardLimit) << '\n';
  out << "lean_axis = " << joined({profile.leanAxis.x(), profile.leanAxis.y(), profile.leanAxis.z()}) << '\n';
  return out.str();
}

CalibrationProfiled parseProfile(std::string_view contents) {
  std::map<std::string, std::pair<std::size_t, std::string>> fields;
  text::forEachLine(contents, [&](std::size_t lineNo, std::string_view line) {
    line = text::trim(line);
    if (line.empty() || line.front() == '#') return;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw LineError(ErrorCode::ParseError, lineNo, "expected 'key = value'");
    const std::string key(text::trim(line.substr(0, eq)));
    fields[key] = {lineNo, std::string(text::trim(line.substr(eq + 1)))};
  });

  CalibrationProfiled profile;
  profile.neutralPose.timestampMs = numbers(fields, "neutral_timestamp_ms", 1)[0];
  const auto pos = numbers(fields, "neutral_position", 3);
  profile.neutralPose.position = {pos[0], pos[1], pos[2]};
  const auto ori = numbers(fields, "neutral_orientation", 3);
  profile.neutralPose.orientation = {ori[0], ori[1], ori[2]};
  profile.forwardLimit = numbers(fields, "forward_limit", 1)[0];
  profile.backwardLimit = numbers(fields, "backward_limit", 1)[0];
  const auto axis = numbers(fields, "lean_axis", 3);
  profile.leanAxis = {axis[0], axis[1], axis[2]};
  validate(profile);
  return profile;
}

void writeProfile(const std::filesystem::path& path, const CalibrationProfiled& profile) {
  validate(profile);
  text::writeFile(path, formatProfile(profile));
}

CalibrationProfiled readProfile(const std::filesystem::path& path) { return text::parseFile(path, parseProfile); }

}  // namespace headzoom
