#include "headzoom/session.hpp"

#include "headzoom/text.hpp"

namespace headzoom {

namespace {

std::vector<double> numbers(std::span<const std::string_view> tokens, std::size_t expected, std::string_view verb) {
  if (tokens.size() != expected) {
    throw Error(ErrorCode::ParseError, std::string(verb) + " expects " + std::to_string(expected) + " numbers, got " +
                                           std::to_string(tokens.size()));
  }
  std::vector<double> out;
  for (auto token : tokens) {
    const auto v = text::parseDouble(token);
    if (!v) throw Error(ErrorCode::ParseError, std::string(verb) + ": bad number '" + std::string(token) + "'");
    out.push_back(*v);
  }
  return out;
}

Outbound toSender(const Error& e) { return {Outbound::Audience::Sender, std::string("ERROR ") + e.what()}; }

}  // namespace

InboundFrame parseFrame(std::string_view line) {
  const auto tokens = text::splitWhitespace(line);
  if (tokens.empty()) throw Error(ErrorCode::ParseError, "empty frame");
  const std::string_view verb = tokens.front();
  const std::span<const std::string_view> args(tokens.begin() + 1, tokens.end());

  InboundFrame frame;
  if (verb == "POSE") {
    const auto v = numbers(args, 7, verb);
    frame.kind = FrameKind::Pose;
    frame.pose = {v[0], Vec3d(v[1], v[2], v[3]), {v[4], v[5], v[6]}};
  } else if (verb == "MODE") {
    if (args.size() != 1) throw Error(ErrorCode::ParseError, "MODE expects one of static, parallel, tilt");
    const auto mode = parseMode(args[0]);
    if (!mode) throw Error(ErrorCode::ParseError, "unknown mode '" + std::string(args[0]) + "'");
    frame.kind = FrameKind::Mode;
    frame.mode = *mode;
  } else if (verb == "CALIB") {
    const auto v = numbers(args, 8, verb);
    frame.kind = FrameKind::Calib;
    frame.profile = profileFromFrame({0.0, Vec3d(v[0], v[1], v[2]), {v[3], v[4], v[5]}}, v[6], v[7]);
  } else if (verb == "ATTEMPT") {
    const auto v = numbers(args, 2, verb);
    frame.kind = FrameKind::Attempt;
    frame.uv = Vec2d(v[0], v[1]);
  } else {
    throw Error(ErrorCode::ParseError, "unknown frame '" + std::string(verb) + "'");
  }
  return frame;
}

std::string formatPoseFrame(const HeadPosed& p) {
  std::string out = "POSE";
  for (double v : {p.timestampMs, p.position.x(), p.position.y(), p.position.z(), p.orientation.yaw,
                   p.orientation.pitch, p.orientation.roll}) {
    out += ' ' + text::formatDouble(v);
  }
  return out;
}

std::string formatViewFrame(const ViewSample& view) { return "VIEW " + formatViewFields(view, ' '); }

ViewSample parseViewFrame(std::string_view line) {
  const auto tokens = text::splitWhitespace(line);
  if (tokens.size() != 12 || tokens[0] != "VIEW") throw Error(ErrorCode::ParseError, "malformed VIEW frame");
  const auto mode = parseMode(tokens[2]);
  if (!mode) throw Error(ErrorCode::ParseError, "VIEW frame: unknown mode");
  std::vector<double> v;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    if (i == 2) continue;
    const auto d = text::parseDouble(tokens[i]);
    if (!d) throw Error(ErrorCode::ParseError, "VIEW frame: bad number '" + std::string(tokens[i]) + "'");
    v.push_back(*d);
  }
  return {v[0], *mode, v[1], Vec2d(v[2], v[3]), v[4], {v[5], v[6], v[7]}, Vec2d(v[8], v[9])};
}

CalibrationProfiled profileFromFrame(const HeadPosed& neutral, double forwardLimit, double backwardLimit) {
  if (!isFinite(neutral)) throw Error(ErrorCode::InvalidArgument, "CALIB neutral pose must be finite");
  Vec3d axis = forwardVector(neutral.orientation);
  axis.y() = 0.0;
  if (!(axis.norm() > 1e-6)) throw Error(ErrorCode::DegeneratePose, "CALIB neutral pose has no horizontal forward");
  if (!(forwardLimit > kMinLeanLimit) || !(backwardLimit > kMinLeanLimit)) {
    throw Error(ErrorCode::InvertedLimits, "CALIB limits must both exceed 0.01 m");
  }
  CalibrationProfiled profile;
  profile.neutralPose = neutral;
  profile.forwardLimit = forwardLimit;
  profile.backwardLimit = backwardLimit;
  profile.leanAxis = axis.normalized();
  validate(profile);
  return profile;
}

Session::Session(EngineConfigd config, std::optional<CalibrationProfiled> profile, SessionOptions options)
    : config_(std::move(config)),
      profile_(std::move(profile)),
      options_(options),
      trial_(options_.targetUV, options_.rules) {
  validate(config_.zoom);
  if (profile_) validate(*profile_);
  restart();
}

void Session::restart() {
  engine_.reset();
  if (config_.mode == Mode::Static || profile_) engine_.emplace(config_, profile_);
  trial_ = TrialSession(options_.targetUV, options_.rules);
  trialStartMs_.reset();
}

std::vector<Outbound> Session::handle(std::string_view line) {
  try {
    const InboundFrame frame = parseFrame(line);
    switch (frame.kind) {
      case FrameKind::Pose: return onPose(frame.pose);
      case FrameKind::Mode:
        if (frame.mode != Mode::Static && !profile_) {
          throw Error(ErrorCode::NotCalibrated, std::string(to_string(frame.mode)) + " mode requires CALIB first");
        }
        config_.mode = frame.mode;
        restart();
        return {};
      case FrameKind::Calib:
        profile_ = frame.profile;
        restart();
        return {};
      case FrameKind::Attempt: {
        if (!trialStartMs_) throw Error(ErrorCode::InvalidArgument, "no pose received yet");
        if (trial_.finished()) throw Error(ErrorCode::InvalidArgument, "trial already finished");
        const double elapsed = (lastPoseMs_ - *trialStartMs_) / 1000.0;
        const AttemptResult r = trial_.attempt(elapsed, frame.uv);
        return {{Outbound::Audience::Everyone,
                 "RESULT " + std::string(to_string(r.verdict)) + ' ' + std::to_string(r.remainingAttempts)}};
      }
    }
  } catch (const Error& e) {
    return {toSender(e)};
  }
  return {};
}

std::vector<Outbound> Session::onPose(const HeadPosed& pose) {
  if (!engine_) {
    throw Error(ErrorCode::NotCalibrated, std::string(to_string(config_.mode)) + " mode requires CALIB first");
  }
  const auto view = engine_->step(pose);
  if (!view) return {};
  if (!trialStartMs_) trialStartMs_ = view->timestampMs;
  lastPoseMs_ = view->timestampMs;
  lastView_ = toSample(*view);

  std::vector<Outbound> out{{Outbound::Audience::Everyone, formatViewFrame(*lastView_)}};
  if (trial_.advance((lastPoseMs_ - *trialStartMs_) / 1000.0)) {
    out.push_back({Outbound::Audience::Everyone,
                   "RESULT " + std::string(to_string(AttemptVerdict::Timeout)) + ' ' +
                       std::to_string(trial_.remainingAttempts())});
  }
  return out;
}

}  // namespace headzoom
