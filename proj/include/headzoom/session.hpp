#pragma once

// Live session state machine behind the `serve` endpoint. It speaks the
// line-based wire protocol and knows nothing about sockets:
//
//   inbound   POSE t px py pz yaw pitch roll
//             MODE static|parallel|tilt
//             CALIB nx ny nz yaw pitch roll forwardLimit backwardLimit
//             ATTEMPT u v
//   outbound  VIEW t mode zoom panU panV leanX planeYaw planePitch planeRoll cursorU cursorV
//             RESULT correct|wrong|timeout remainingAttempts
//             ERROR Code: detail

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "headzoom/calibration.hpp"
#include "headzoom/modes.hpp"
#include "headzoom/trace_io.hpp"
#include "headzoom/trial.hpp"

namespace headzoom {

struct SessionOptions {
  TrialRules rules{};
  Vec2d targetUV{0.5, 0.5};
};

struct Outbound {
  enum class Audience { Everyone, Sender };
  Audience audience{Audience::Everyone};
  std::string line;
};

enum class FrameKind { Pose, Mode, Calib, Attempt };

struct InboundFrame {
  FrameKind kind{FrameKind::Pose};
  HeadPosed pose{};
  Mode mode{Mode::Static};
  CalibrationProfiled profile{};
  Vec2d uv{0.5, 0.5};
};

/// Throws ParseError naming the offending token.
InboundFrame parseFrame(std::string_view line);

std::string formatPoseFrame(const HeadPosed& pose);
std::string formatViewFrame(const ViewSample& view);
/// Inverse of formatViewFrame, for consumers.
ViewSample parseViewFrame(std::string_view line);

/// CALIB carries the neutral pose and both limits; the lean axis follows
/// from the neutral forward as in calibration.
CalibrationProfiled profileFromFrame(const HeadPosed& neutral, double forwardLimit, double backwardLimit);

class Session {
 public:
  explicit Session(EngineConfigd config, std::optional<CalibrationProfiled> profile = std::nullopt,
                   SessionOptions options = {});

  /// Applies one inbound line. Malformed or rejected lines produce a single
  /// ERROR addressed to the sender and leave the state untouched.
  std::vector<Outbound> handle(std::string_view line);

  Mode mode() const { return config_.mode; }
  const std::optional<ViewSample>& lastView() const { return lastView_; }
  const TrialSession& trial() const { return trial_; }

 private:
  void restart();
  std::vector<Outbound> onPose(const HeadPosed& pose);

  EngineConfigd config_;
  std::optional<CalibrationProfiled> profile_;
  SessionOptions options_;
  std::optional<Engined> engine_;
  TrialSession trial_;
  std::optional<double> trialStartMs_;
  double lastPoseMs_{0.0};
  std::optional<ViewSample> lastView_;
};

}  // namespace headzoom
