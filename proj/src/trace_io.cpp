#include "headzoom/trace_io.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "headzoom/text.hpp"

namespace headzoom {

namespace {

constexpr std::size_t kTraceColumns = 7;
constexpr std::size_t kViewColumns = 11;

void appendRow(std::string& out, std::initializer_list<double> values) {
  bool first = true;
  for (double v : values) {
    if (!first) out += '\t';
    out += text::formatDouble(v);
    first = false;
  }
  out += '\n';
}

void parseMetadata(std::string_view comment, PoseTrace& trace) {
  for (auto token : text::splitWhitespace(comment)) {
    const auto eq = token.find('=');
    if (eq == std::string_view::npos) continue;
    const auto key = token.substr(0, eq);
    const auto value = token.substr(eq + 1);
    if (key == "source") trace.source = std::string(value);
    if (key == "rate_hz") {
      if (const auto rate = text::parseDouble(value); rate && *rate > 0) trace.rateHz = *rate;
    }
  }
}

}  // namespace

std::string formatTrace(const PoseTrace& trace) {
  std::string out;
  out += "# headzoom pose trace; positions in metres, angles in radians\n";
  out += "# source=" + trace.source + " rate_hz=" + text::formatDouble(trace.rateHz) + '\n';
  out += kTraceHeader;
  out += '\n';
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    const auto& s = trace.samples[i];
    if (!isFinite(s)) {
      throw Error(ErrorCode::InvalidArgument, "sample " + std::to_string(i) + " has non-finite values");
    }
    appendRow(out, {s.timestampMs, s.position.x(), s.position.y(), s.position.z(), s.orientation.yaw,
                    s.orientation.pitch, s.orientation.roll});
  }
  return out;
}

PoseTrace parseTrace(std::string_view contents) {
  PoseTrace trace;
  bool sawHeader = false;
  std::size_t lastLine = 0;
  text::forEachLine(contents, [&](std::size_t lineNo, std::string_view line) {
    lastLine = lineNo;
    if (text::trim(line).empty()) return;
    if (line.front() == '#') {
      parseMetadata(line.substr(1), trace);
      return;
    }
    if (!sawHeader) {
      if (text::trim(line) != kTraceHeader) {
        throw LineError(ErrorCode::ParseError, lineNo, "expected trace header row");
      }
      sawHeader = true;
      return;
    }
    const auto fields = text::splitTabs(line);
    if (fields.size() != kTraceColumns) {
      throw LineError(ErrorCode::ParseError, lineNo,
                      "expected " + std::to_string(kTraceColumns) + " fields, got " + std::to_string(fields.size()));
    }
    std::array<double, kTraceColumns> v{};
    for (std::size_t i = 0; i < kTraceColumns; ++i) {
      const auto parsed = text::parseDouble(text::trim(fields[i]));
      if (!parsed) throw LineError(ErrorCode::ParseError, lineNo, "bad number '" + std::string(fields[i]) + "'");
      v[i] = *parsed;
    }
    if (!std::isfinite(v[0])) throw LineError(ErrorCode::ParseError, lineNo, "timestamp must be finite");
    if (!trace.samples.empty() && !(v[0] > trace.samples.back().timestampMs)) {
      throw LineError(ErrorCode::MonotonicityError, lineNo, "timestamp does not increase");
    }
    HeadPosed pose;
    pose.timestampMs = v[0];
    pose.position = {v[1], v[2], v[3]};
    pose.orientation = {v[4], v[5], v[6]};
    trace.samples.push_back(pose);
  });
  if (!sawHeader) throw LineError(ErrorCode::ParseError, std::max<std::size_t>(lastLine, 1), "missing trace header");
  if (trace.samples.size() < 2) {
    throw LineError(ErrorCode::ParseError, std::max<std::size_t>(lastLine, 1), "trace needs at least two samples");
  }
  return trace;
}

void writeTrace(const std::filesystem::path& path, const PoseTrace& trace) {
  text::writeFile(path, formatTrace(trace));
}

PoseTrace readTrace(const std::filesystem::path& path) {
  return text::parseFile(path, parseTrace);
}

ViewSample toSample(const ViewStated& view) {
  return {view.timestampMs, view.mode,          view.zoom, view.panUV,
          view.leanX,       view.plane.orientation, view.cursorUV};
}

std::string formatViewFields(const ViewSample& s, char sep) {
  std::string out = text::formatDouble(s.timestampMs);
  auto add = [&](std::string_view field) {
    out += sep;
    out += field;
  };
  add(to_string(s.mode));
  for (double v : {s.zoom, s.panUV.x(), s.panUV.y(), s.leanX, s.planeOrientation.yaw, s.planeOrientation.pitch,
                   s.planeOrientation.roll, s.cursorUV.x(), s.cursorUV.y()}) {
    add(text::formatDouble(v));
  }
  return out;
}

std::string formatViewStream(std::span<const ViewSample> samples) {
  std::string out(kViewHeader);
  out += '\n';
  for (const auto& s : samples) {
    out += formatViewFields(s, '\t');
    out += '\n';
  }
  return out;
}

std::vector<ViewSample> parseViewStream(std::string_view contents) {
  std::vector<ViewSample> samples;
  bool sawHeader = false;
  text::forEachLine(contents, [&](std::size_t lineNo, std::string_view line) {
    if (text::trim(line).empty() || line.front() == '#') return;
    if (!sawHeader) {
      if (text::trim(line) != kViewHeader) throw LineError(ErrorCode::ParseError, lineNo, "expected view header row");
      sawHeader = true;
      return;
    }
    const auto fields = text::splitTabs(line);
    if (fields.size() != kViewColumns) {
      throw LineError(ErrorCode::ParseError, lineNo, "expected " + std::to_string(kViewColumns) + " fields");
    }
    const auto mode = parseMode(fields[1]);
    if (!mode) throw LineError(ErrorCode::ParseError, lineNo, "unknown mode '" + std::string(fields[1]) + "'");
    std::array<double, kViewColumns> v{};
    for (std::size_t i = 0; i < kViewColumns; ++i) {
      if (i == 1) continue;
      const auto parsed = text::parseDouble(fields[i]);
      if (!parsed) throw LineError(ErrorCode::ParseError, lineNo, "bad number '" + std::string(fields[i]) + "'");
      v[i] = *parsed;
    }
    ViewSample s;
    s.timestampMs = v[0];
    s.mode = *mode;
    s.zoom = v[2];
    s.panUV = {v[3], v[4]};
    s.leanX = v[5];
    s.planeOrientation = {v[6], v[7], v[8]};
    s.cursorUV = {v[9], v[10]};
    samples.push_back(s);
  });
  if (!sawHeader) throw Error(ErrorCode::ParseError, "view stream has no header row");
  return samples;
}

void writeViewStream(const std::filesystem::path& path, std::span<const ViewSample> samples) {
  text::writeFile(path, formatViewStream(samples));
}

std::vector<ViewSample> readViewStream(const std::filesystem::path& path) {
  return text::parseFile(path, parseViewStream);
}

std::vector<ViewSample> replayTrace(const PoseTrace& trace, Engined& engine) {
  std::vector<ViewSample> out;
  out.reserve(trace.samples.size());
  for (const auto& pose : trace.samples) {
    if (const auto view = engine.step(pose)) out.push_back(toSample(*view));
  }
  return out;
}

}  // namespace headzoom
