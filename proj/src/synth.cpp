#include <cmath>
#include <limits>
#include <optional>
#include <random>

#include "headzoom/calibration.hpp"
#include "headzoom/text.hpp"
#include "headzoom/trace_io.hpp"

namespace headzoom {

namespace {

struct SynthState {
  double rateHz{kDefaultRateHz};
  std::uint64_t seed{1};
  HeadPosed start{0.0, Vec3d(0.0, 1.6, 0.0), {}};
  Vec3d leanAxis{Vec3d::UnitZ()};
  double forwardLimit{0.3};
  double backwardLimit{0.25};
  double positionSigma{0.0};
  double angleSigma{0.0};

  double leanX{0.5};
  Vec3d offset{Vec3d::Zero()};
  Orientationd orientation{};

  std::mt19937_64 rng{1};
  std::size_t index{0};
  bool started{false};
};

double leanOffset(const SynthState& st, double x) {
  return x >= 0.5 ? (x - 0.5) / 0.5 * st.forwardLimit : (x - 0.5) / 0.5 * st.backwardLimit;
}

class Synthesizer {
 public:
  explicit Synthesizer(std::optional<std::uint64_t> seedOverride) : seedOverride_(seedOverride) {
    if (seedOverride_) reseed(*seedOverride_);
  }

  PoseTrace run(std::string_view script) {
    text::forEachLine(script, [&](std::size_t lineNo, std::string_view line) { directive(lineNo, line); });
    if (trace_.samples.size() < 2) throw Error(ErrorCode::BadScript, "script produced fewer than two samples");
    trace_.source = "synthetic";
    trace_.rateHz = st_.rateHz;
    return std::move(trace_);
  }

 private:
  std::vector<double> args(std::size_t lineNo, const std::vector<std::string_view>& tokens, std::size_t min,
                           std::size_t max) {
    const std::size_t n = tokens.size() - 1;
    if (n < min || n > max) {
      throw LineError(ErrorCode::BadScript, lineNo, "'" + std::string(tokens[0]) + "' takes " + std::to_string(min) +
                                                        (min == max ? "" : "-" + std::to_string(max)) + " arguments");
    }
    std::vector<double> out;
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      const auto v = text::parseDouble(tokens[i]);
      if (!v || !std::isfinite(*v)) {
        throw LineError(ErrorCode::BadScript, lineNo, "bad number '" + std::string(tokens[i]) + "'");
      }
      out.push_back(*v);
    }
    return out;
  }

  std::size_t segmentLength(std::size_t lineNo, double seconds) const {
    if (!(seconds > 0.0)) throw LineError(ErrorCode::BadScript, lineNo, "duration must be positive");
    // Tolerate products like 2.0000000000000004 landing just above an integer.
    return static_cast<std::size_t>(std::ceil(seconds * st_.rateHz - 1e-9));
  }

  void begin(std::size_t lineNo) {
    if (st_.started) return;
    Vec3d axis = forwardVector(st_.start.orientation);
    axis.y() = 0.0;
    if (!(axis.norm() > 1e-6)) throw LineError(ErrorCode::BadScript, lineNo, "start pose has no horizontal forward");
    st_.leanAxis = axis.normalized();
    st_.orientation = st_.start.orientation;
    st_.rng.seed(st_.seed);
    st_.started = true;
  }

  void emit(bool dropout = false) {
    HeadPosed pose;
    pose.timestampMs = static_cast<double>(st_.index) * 1000.0 / st_.rateHz;
    ++st_.index;
    if (dropout) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      pose.position = Vec3d::Constant(nan);
      pose.orientation = {nan, nan, nan};
      trace_.samples.push_back(pose);
      return;
    }
    pose.position = st_.start.position + leanOffset(st_, st_.leanX) * st_.leanAxis + st_.offset;
    pose.orientation = st_.orientation;
    if (st_.positionSigma > 0.0) {
      std::normal_distribution<double> noise(0.0, st_.positionSigma);
      for (int i = 0; i < 3; ++i) pose.position[i] += noise(st_.rng);
    }
    if (st_.angleSigma > 0.0) {
      std::normal_distribution<double> noise(0.0, st_.angleSigma);
      pose.orientation.yaw = wrapAngle(pose.orientation.yaw + noise(st_.rng));
      pose.orientation.pitch = std::clamp(pose.orientation.pitch + noise(st_.rng), -std::numbers::pi / 2,
                                          std::numbers::pi / 2);
      pose.orientation.roll = wrapAngle(pose.orientation.roll + noise(st_.rng));
    }
    trace_.samples.push_back(pose);
  }

  template <typename Apply>
  void ramp(std::size_t lineNo, double seconds, Apply&& apply) {
    begin(lineNo);
    const std::size_t n = segmentLength(lineNo, seconds);
    for (std::size_t k = 1; k <= n; ++k) {
      apply(static_cast<double>(k) / static_cast<double>(n));
      emit();
    }
  }

  void directive(std::size_t lineNo, std::string_view line) {
    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tokens = text::splitWhitespace(line);
    if (tokens.empty()) return;
    const auto name = tokens[0];

    auto beforeMotion = [&] {
      if (st_.started) {
        throw LineError(ErrorCode::BadScript, lineNo, "'" + std::string(name) + "' must precede timed segments");
      }
    };

    if (name == "rate") {
      beforeMotion();
      st_.rateHz = args(lineNo, tokens, 1, 1)[0];
      if (!(st_.rateHz > 0.0)) throw LineError(ErrorCode::BadScript, lineNo, "rate must be positive");
    } else if (name == "seed") {
      const double seed = args(lineNo, tokens, 1, 1)[0];
      if (seed < 0 || seed != std::floor(seed)) throw LineError(ErrorCode::BadScript, lineNo, "seed must be a non-negative integer");
      if (!seedOverride_) reseed(static_cast<std::uint64_t>(seed));
    } else if (name == "start") {
      beforeMotion();
      const auto a = args(lineNo, tokens, 6, 6);
      st_.start.position = {a[0], a[1], a[2]};
      st_.start.orientation = {a[3], a[4], a[5]};
    } else if (name == "limits") {
      const auto a = args(lineNo, tokens, 2, 2);
      if (!(a[0] > 0.0 && a[1] > 0.0)) throw LineError(ErrorCode::BadScript, lineNo, "limits must be positive");
      st_.forwardLimit = a[0];
      st_.backwardLimit = a[1];
    } else if (name == "noise") {
      const auto a = args(lineNo, tokens, 1, 2);
      if (a[0] < 0.0 || (a.size() > 1 && a[1] < 0.0)) {
        throw LineError(ErrorCode::BadScript, lineNo, "noise sigma must be non-negative");
      }
      st_.positionSigma = a[0];
      st_.angleSigma = a.size() > 1 ? a[1] : 0.0;
    } else if (name == "hold") {
      ramp(lineNo, args(lineNo, tokens, 1, 1)[0], [](double) {});
    } else if (name == "lean") {
      const auto a = args(lineNo, tokens, 2, 2);
      if (a[0] < 0.0 || a[0] > 1.0) throw LineError(ErrorCode::BadScript, lineNo, "lean target must lie in [0,1]");
      const double from = st_.leanX;
      ramp(lineNo, a[1], [&](double s) { st_.leanX = from + (a[0] - from) * s; });
    } else if (name == "yaw" || name == "pitch" || name == "roll") {
      const auto a = args(lineNo, tokens, 2, 2);
      begin(lineNo);
      double Orientationd::*angle = name == "yaw" ? &Orientationd::yaw
                                    : name == "pitch" ? &Orientationd::pitch
                                                      : &Orientationd::roll;
      const double from = st_.orientation.*angle;
      ramp(lineNo, a[1], [&](double s) { st_.orientation.*angle = from + (a[0] - from) * s; });
    } else if (name == "move") {
      const auto a = args(lineNo, tokens, 4, 4);
      const Vec3d from = st_.offset;
      const Vec3d to = from + Vec3d(a[0], a[1], a[2]);
      ramp(lineNo, a[3], [&](double s) { st_.offset = from + (to - from) * s; });
    } else if (name == "dropout") {
      const double seconds = args(lineNo, tokens, 1, 1)[0];
      begin(lineNo);
      const std::size_t n = segmentLength(lineNo, seconds);
      for (std::size_t k = 0; k < n; ++k) emit(true);
    } else {
      throw LineError(ErrorCode::BadScript, lineNo, "unknown directive '" + std::string(name) + "'");
    }
  }

  void reseed(std::uint64_t seed) {
    st_.seed = seed;
    st_.rng.seed(seed);
  }

  std::optional<std::uint64_t> seedOverride_;
  SynthState st_;
  PoseTrace trace_;
};

}  // namespace

PoseTrace synthesizeTrace(std::string_view script, std::optional<std::uint64_t> seed) {
  return Synthesizer(seed).run(script);
}

}  // namespace headzoom
