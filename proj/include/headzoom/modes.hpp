#pragma once

// Technique controllers (Static, Parallel, Tilt) and the per-sample engine
// pipeline: guard -> filter -> normalize lean -> mode tick -> clamp.

#include <cmath>
#include <optional>
#include <utility>

#include "headzoom/calibration.hpp"
#include "headzoom/filtering.hpp"
#include "headzoom/geometry.hpp"
#include "headzoom/mode.hpp"

namespace headzoom {

template <typename Scalar>
struct ZoomRange {
  Scalar minZoom{1};
  Scalar maxZoom{8};
};

template <typename Scalar>
void validate(const ZoomRange<Scalar>& range) {
  if (!(range.minZoom >= Scalar(1))) throw Error(ErrorCode::InvalidArgument, "minimum zoom must be >= 1");
  if (!(range.maxZoom > range.minZoom)) throw Error(ErrorCode::InvalidArgument, "maximum zoom must exceed minimum zoom");
}

template <typename Scalar>
struct EngineConfig {
  Mode mode{Mode::Parallel};
  ZoomRange<Scalar> zoom{};
  GuardConfig guard{};
  /// Replaces the built-in schedule of `mode` when set.
  std::optional<FilterSchedule<Scalar>> schedule{};
};

template <typename Scalar>
struct ViewState {
  double timestampMs{0.0};
  Mode mode{Mode::Static};
  Scalar zoom{1};
  /// Image point brought under the ring; follows the cursor except in Static.
  Vec2<Scalar> panUV{Scalar(0.5), Scalar(0.5)};
  /// Raycast hit of the head ray, i.e. where the red ring is drawn.
  Vec2<Scalar> cursorUV{Scalar(0.5), Scalar(0.5)};
  Scalar leanX{Scalar(0.5)};
  ImagePlane<Scalar> plane{};
  /// Filtered pose the view was computed from.
  HeadPose<Scalar> pose{};
  /// Re-emitted frame while the guard holds the output.
  bool held{false};
};

/// Linear lean-to-zoom map over the calibrated range.
template <typename Scalar>
Scalar zoomFromLean(Scalar leanX, const ZoomRange<Scalar>& range) {
  const Scalar x = std::clamp(leanX, Scalar(0), Scalar(1));
  return range.minZoom + x * (range.maxZoom - range.minZoom);
}

/// Zoom is a dolly: the renderer moves the image to this distance instead of
/// narrowing the field of view. Magnification is the distance ratio.
template <typename Scalar>
Scalar dollyDistance(Scalar zoom, Scalar baseDistance = Scalar(kPlaneDistance)) {
  return baseDistance / zoom;
}

/// Mutable per-trial controller state. `plane` starts at the initial
/// placement and only ever changes orientation, in Tilt.
template <typename Scalar>
struct ControllerState {
  ImagePlane<Scalar> initialPlane{};
  ImagePlane<Scalar> plane{};
  Vec2<Scalar> lastPanUV{Scalar(0.5), Scalar(0.5)};
  Vec2<Scalar> lastCursorUV{Scalar(0.5), Scalar(0.5)};
};

template <typename Scalar>
ControllerState<Scalar> makeControllerState(const ImagePlane<Scalar>& initialPlane) {
  ControllerState<Scalar> state;
  state.initialPlane = initialPlane;
  state.plane = initialPlane;
  return state;
}

namespace detail {

template <typename Scalar>
Vec2<Scalar> castCursor(const HeadPose<Scalar>& pose, const ImagePlane<Scalar>& plane, Vec2<Scalar>& last) {
  const PlaneHit<Scalar> hit = raycastPlane(pose.position, forwardVector(pose.orientation), plane);
  if (hit.valid) last = hit.uv;
  return last;
}

template <typename Scalar>
ViewState<Scalar> baseView(const HeadPose<Scalar>& pose, Mode mode) {
  ViewState<Scalar> view;
  view.timestampMs = pose.timestampMs;
  view.mode = mode;
  view.pose = pose;
  return view;
}

}  // namespace detail

/// Baseline: the image never moves or scales; only the ring follows the head.
template <typename Scalar>
ViewState<Scalar> tickStatic(const HeadPose<Scalar>& pose, const EngineConfig<Scalar>& config,
                             ControllerState<Scalar>& state, Scalar leanX = Scalar(0.5)) {
  auto view = detail::baseView(pose, Mode::Static);
  state.plane = state.initialPlane;
  view.zoom = config.zoom.minZoom;
  view.plane = state.initialPlane;
  view.leanX = leanX;
  view.panUV = Vec2<Scalar>(Scalar(0.5), Scalar(0.5));
  view.cursorUV = detail::castCursor(pose, state.initialPlane, state.lastCursorUV);
  return view;
}

/// Fixed plane; lean drives zoom and the head ray drives pan.
template <typename Scalar>
ViewState<Scalar> tickParallel(const HeadPose<Scalar>& pose, const CalibrationProfile<Scalar>& profile,
                               const EngineConfig<Scalar>& config, ControllerState<Scalar>& state) {
  auto view = detail::baseView(pose, Mode::Parallel);
  state.plane = state.initialPlane;
  view.leanX = normalizeLean(pose.position, profile);
  view.zoom = zoomFromLean(view.leanX, config.zoom);
  view.plane = state.plane;
  view.cursorUV = detail::castCursor(pose, state.plane, state.lastCursorUV);
  view.panUV = view.cursorUV;
  state.lastPanUV = view.panUV;
  return view;
}

/// Parallel with the plane yawed/pitched about its fixed center to face the
/// head and rolled with it.
template <typename Scalar>
ViewState<Scalar> tickTilt(const HeadPose<Scalar>& pose, const CalibrationProfile<Scalar>& profile,
                           const EngineConfig<Scalar>& config, ControllerState<Scalar>& state) {
  auto view = detail::baseView(pose, Mode::Tilt);
  const Vec3<Scalar> away = state.initialPlane.center - pose.position;
  if (away.norm() > Scalar(1e-9)) {
    state.plane.orientation = orientationFacing(away);
  }
  state.plane.orientation.roll = pose.orientation.roll;
  view.leanX = normalizeLean(pose.position, profile);
  view.zoom = zoomFromLean(view.leanX, config.zoom);
  view.plane = state.plane;
  view.cursorUV = detail::castCursor(pose, state.plane, state.lastCursorUV);
  view.panUV = view.cursorUV;
  state.lastPanUV = view.panUV;
  return view;
}

/// Single-user sequential pipeline. Every finite-or-held input after the
/// first valid sample yields exactly one ViewState.
template <typename Scalar>
class Engine {
 public:
  explicit Engine(EngineConfig<Scalar> config, std::optional<CalibrationProfile<Scalar>> profile = std::nullopt)
      : config_(std::move(config)), profile_(std::move(profile)) {
    validate(config_.zoom);
    if (config_.mode != Mode::Static && !profile_) {
      throw Error(ErrorCode::NotCalibrated, std::string(to_string(config_.mode)) + " mode requires a calibration profile");
    }
    if (profile_) validate(*profile_);
    reset();
  }

  /// Drops all per-trial state; the next sample re-places the plane.
  void reset() {
    bank_ = makeFilterBank(config_.schedule.value_or(builtinSchedule<Scalar>(config_.mode)), config_.guard);
    state_.reset();
    last_.reset();
    lastReceivedMs_ = 0.0;
    leanX_ = Scalar(0.5);
  }

  std::optional<ViewState<Scalar>> step(const HeadPose<Scalar>& raw) {
    if (!state_) {
      if (!isFinite(raw)) return std::nullopt;
      const HeadPose<Scalar> filtered = filterPose(bank_, raw, leanX_);
      state_ = makeControllerState(placePlane(filtered));
      lastReceivedMs_ = raw.timestampMs;
      return emit(tick(filtered));
    }

    double dtSeconds = 0.0;
    if (std::isfinite(raw.timestampMs)) {
      dtSeconds = (raw.timestampMs - lastReceivedMs_) / 1000.0;
      lastReceivedMs_ = raw.timestampMs;
    }
    if (guardSample(bank_, raw, dtSeconds) == GuardVerdict::Hold) {
      bank_.holdActive = true;
      ViewState<Scalar> view = *last_;
      if (std::isfinite(raw.timestampMs)) view.timestampMs = raw.timestampMs;
      view.held = true;
      last_ = view;
      return view;
    }
    return emit(tick(filterPose(bank_, raw, leanX_)));
  }

  const EngineConfig<Scalar>& config() const { return config_; }
  const std::optional<CalibrationProfile<Scalar>>& profile() const { return profile_; }
  const std::optional<ViewState<Scalar>>& lastView() const { return last_; }
  const FilterBank<Scalar>& filterBank() const { return bank_; }

 private:
  ViewState<Scalar> tick(const HeadPose<Scalar>& filtered) {
    switch (config_.mode) {
      case Mode::Parallel: return tickParallel(filtered, *profile_, config_, *state_);
      case Mode::Tilt: return tickTilt(filtered, *profile_, config_, *state_);
      case Mode::Static: break;
    }
    const Scalar x = profile_ ? normalizeLean(filtered.position, *profile_) : Scalar(0.5);
    return tickStatic(filtered, config_, *state_, x);
  }

  ViewState<Scalar> emit(ViewState<Scalar> view) {
    leanX_ = view.leanX;
    last_ = view;
    return view;
  }

  EngineConfig<Scalar> config_;
  std::optional<CalibrationProfile<Scalar>> profile_;
  FilterBank<Scalar> bank_{};
  std::optional<ControllerState<Scalar>> state_{};
  std::optional<ViewState<Scalar>> last_{};
  double lastReceivedMs_{0.0};
  Scalar leanX_{Scalar(0.5)};
};

/// Free-function form of `Engine::step`.
template <typename Scalar>
std::optional<ViewState<Scalar>> stepEngine(const HeadPose<Scalar>& raw, Engine<Scalar>& engine) {
  return engine.step(raw);
}

using ZoomRanged = ZoomRange<double>;
using EngineConfigd = EngineConfig<double>;
using ViewStated = ViewState<double>;
using ControllerStated = ControllerState<double>;
using Engined = Engine<double>;

}  // namespace headzoom
