#pragma once

// Lean-scheduled scalar Kalman smoothing of the six pose channels, plus the
// outlier / tracking-loss guard that sits in front of it.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "headzoom/geometry.hpp"
#include "headzoom/mode.hpp"

namespace headzoom {

/// Piecewise-linear curve over x in [0,1], constant outside its breakpoints.
template <typename Scalar>
class ParamCurve {
 public:
  using Breakpoint = std::pair<Scalar, Scalar>;

  ParamCurve() : ParamCurve({{Scalar(0), Scalar(1)}}) {}

  explicit ParamCurve(std::vector<Breakpoint> breakpoints) : breakpoints_(std::move(breakpoints)) {
    if (breakpoints_.empty()) throw Error(ErrorCode::InvalidArgument, "curve needs at least one breakpoint");
    for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
      const auto& [x, y] = breakpoints_[i];
      if (!(x >= Scalar(0) && x <= Scalar(1))) throw Error(ErrorCode::InvalidArgument, "breakpoint x outside [0,1]");
      if (!(y > Scalar(0))) throw Error(ErrorCode::InvalidArgument, "breakpoint y must be positive");
      if (i > 0 && !(x > breakpoints_[i - 1].first)) {
        throw Error(ErrorCode::InvalidArgument, "breakpoint x must be strictly increasing");
      }
    }
  }

  const std::vector<Breakpoint>& breakpoints() const { return breakpoints_; }

 private:
  std::vector<Breakpoint> breakpoints_;
};

template <typename Scalar>
Scalar evalCurve(const ParamCurve<Scalar>& curve, Scalar x) {
  const auto& pts = curve.breakpoints();
  x = std::clamp(x, Scalar(0), Scalar(1));
  if (x <= pts.front().first) return pts.front().second;
  if (x >= pts.back().first) return pts.back().second;
  const auto upper = std::upper_bound(pts.begin(), pts.end(), x,
                                      [](Scalar value, const auto& bp) { return value < bp.first; });
  const auto lower = std::prev(upper);
  const Scalar s = (x - lower->first) / (upper->first - lower->first);
  return lower->second + s * (upper->second - lower->second);
}

template <typename Scalar>
struct FilterSchedule {
  ParamCurve<Scalar> qCurve;
  ParamCurve<Scalar> rCurve;
  Mode mode{Mode::Static};
};

/// The lean-dependent Q/R curves of each technique. Tilt keeps Q flat and
/// raises R past neutral; Parallel additionally lowers Q past neutral.
/// Static has no zoom mapping and uses the flat low-lag pair.
template <typename Scalar>
FilterSchedule<Scalar> builtinSchedule(Mode mode) {
  using Curve = ParamCurve<Scalar>;
  const Scalar qHigh(0.01);
  const Scalar rLow(0.0001);
  const Curve risingR({{Scalar(0), rLow}, {Scalar(0.5), rLow}, {Scalar(1), Scalar(0.1)}});
  switch (mode) {
    case Mode::Tilt:
      return {Curve({{Scalar(0), qHigh}, {Scalar(1), qHigh}}), risingR, mode};
    case Mode::Parallel:
      return {Curve({{Scalar(0), qHigh}, {Scalar(0.5), qHigh}, {Scalar(1), Scalar(0.0001)}}), risingR, mode};
    case Mode::Static:
      break;
  }
  return {Curve({{Scalar(0), qHigh}, {Scalar(1), qHigh}}), Curve({{Scalar(0), rLow}, {Scalar(1), rLow}}), Mode::Static};
}

inline constexpr double kInitialCovariance = 1.0;

template <typename Scalar>
struct KalmanChannel {
  Scalar estimate{0};
  Scalar errorCovariance{Scalar(kInitialCovariance)};
  bool initialized{false};
};

enum class ChannelKind { Linear, Angular };

/// One random-walk Kalman step: P += q, K = P/(P+r), x += K*(z-x), P *= 1-K.
/// Angular channels wrap the innovation and the estimate into (-pi, pi].
/// An uninitialized channel is seeded with z and P0.
template <typename Scalar>
KalmanChannel<Scalar> updateChannel(KalmanChannel<Scalar> ch, Scalar z, Scalar q, Scalar r,
                                    ChannelKind kind = ChannelKind::Linear) {
  if (!ch.initialized) {
    ch.estimate = kind == ChannelKind::Angular ? wrapAngle(z) : z;
    ch.errorCovariance = Scalar(kInitialCovariance);
    ch.initialized = true;
    return ch;
  }
  const Scalar predicted = ch.errorCovariance + q;
  const Scalar gain = predicted / (predicted + r);
  Scalar innovation = z - ch.estimate;
  if (kind == ChannelKind::Angular) innovation = wrapAngle(innovation);
  ch.estimate += gain * innovation;
  if (kind == ChannelKind::Angular) ch.estimate = wrapAngle(ch.estimate);
  ch.errorCovariance = (Scalar(1) - gain) * predicted;
  return ch;
}

/// Outlier thresholds. Displacement from the last valid sample faster than
/// `maxSpeed` (m/s), any non-finite value, or an inter-sample gap longer than
/// `maxGapSeconds` holds the output.
struct GuardConfig {
  double maxSpeed{2.0};
  double maxGapSeconds{0.5};
};

enum class GuardVerdict { Accept, Hold };

enum PoseChannel : std::size_t { PosX = 0, PosY, PosZ, Yaw, Pitch, Roll, kPoseChannels };

template <typename Scalar>
struct FilterBank {
  std::array<KalmanChannel<Scalar>, kPoseChannels> channels{};
  FilterSchedule<Scalar> schedule{};
  GuardConfig guard{};
  HeadPose<Scalar> lastValid{};
  bool hasLastValid{false};
  bool holdActive{false};
};

template <typename Scalar>
FilterBank<Scalar> makeFilterBank(FilterSchedule<Scalar> schedule, GuardConfig guard = {}) {
  FilterBank<Scalar> bank;
  bank.schedule = std::move(schedule);
  bank.guard = guard;
  return bank;
}

/// Decides whether `raw` may enter the filter. `dtSeconds` is the interval
/// since the previously received sample and detects stream gaps; the speed
/// test measures displacement from the last valid sample over the time
/// elapsed since it, so a held stream resumes once the head is back within
/// reach of where tracking was last trusted.
template <typename Scalar>
GuardVerdict guardSample(const FilterBank<Scalar>& bank, const HeadPose<Scalar>& raw, double dtSeconds) {
  if (!isFinite(raw)) return GuardVerdict::Hold;
  if (!bank.hasLastValid) return GuardVerdict::Accept;
  if (!(dtSeconds <= bank.guard.maxGapSeconds)) return GuardVerdict::Hold;
  const double elapsed = (raw.timestampMs - bank.lastValid.timestampMs) / 1000.0;
  const double displacement = static_cast<double>((raw.position - bank.lastValid.position).norm());
  if (!(elapsed > 0.0)) return elapsed == 0.0 && displacement == 0.0 ? GuardVerdict::Accept : GuardVerdict::Hold;
  return displacement > bank.guard.maxSpeed * elapsed ? GuardVerdict::Hold : GuardVerdict::Accept;
}

/// Samples Q and R once at `leanX` and advances all six channels with them.
/// Marks `raw` as the new last valid sample and clears any hold.
template <typename Scalar>
HeadPose<Scalar> filterPose(FilterBank<Scalar>& bank, const HeadPose<Scalar>& raw, Scalar leanX) {
  const Scalar q = evalCurve(bank.schedule.qCurve, leanX);
  const Scalar r = evalCurve(bank.schedule.rCurve, leanX);
  const std::array<Scalar, kPoseChannels> z{raw.position.x(),      raw.position.y(),        raw.position.z(),
                                            raw.orientation.yaw, raw.orientation.pitch, raw.orientation.roll};
  for (std::size_t i = 0; i < kPoseChannels; ++i) {
    const auto kind = i >= Yaw ? ChannelKind::Angular : ChannelKind::Linear;
    bank.channels[i] = updateChannel(bank.channels[i], z[i], q, r, kind);
  }
  bank.lastValid = raw;
  bank.hasLastValid = true;
  bank.holdActive = false;

  HeadPose<Scalar> out;
  out.timestampMs = raw.timestampMs;
  out.position = {bank.channels[PosX].estimate, bank.channels[PosY].estimate, bank.channels[PosZ].estimate};
  out.orientation = {bank.channels[Yaw].estimate, bank.channels[Pitch].estimate, bank.channels[Roll].estimate};
  return out;
}

using ParamCurved = ParamCurve<double>;
using FilterScheduled = FilterSchedule<double>;
using FilterBankd = FilterBank<double>;

/// Breakpoint table (tab-separated: curve, x, y). With `samples` > 1 the
/// curves are additionally sampled on a uniform grid for plotting.
std::string formatSchedule(const FilterScheduled& schedule, int samples = 0);

/// Parses "x:y x:y ..." into a curve (used by config overrides).
ParamCurved parseCurve(const std::string& text);

}  // namespace headzoom
