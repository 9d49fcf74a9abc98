#pragma once

// Seeded random trials shared by the metric tests and the acceptance suite.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "headzoom/trace_io.hpp"
#include "oracles.hpp"

namespace fixtures {

using namespace headzoom;

/// Wandering head at 72 Hz; about 1% of samples lose tracking.
inline std::vector<HeadPosed> randomWalk(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> step(0.0, 0.004), turn(0.0, 0.02);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<HeadPosed> trace;
  HeadPosed p{0, Vec3d(0, 1.6, 0), {0, 0, 0}};
  for (std::size_t i = 0; i < n; ++i) {
    p.timestampMs = i * 1000.0 / 72;
    p.position += Vec3d(step(rng), step(rng), step(rng));
    p.orientation.yaw = wrapAngle(p.orientation.yaw + turn(rng));
    p.orientation.pitch = std::clamp(p.orientation.pitch + turn(rng), -1.4, 1.4);
    p.orientation.roll += turn(rng);
    HeadPosed out = p;
    if (u(rng) < 0.01) out.position.x() = std::nan("");
    trace.push_back(out);
  }
  return trace;
}

/// Cursor drifting around `near` with jittered frame spacing and a zoom that
/// random-walks half the time.
inline std::vector<ViewSample> randomViews(std::mt19937_64& rng, std::size_t n, const Vec2d& near) {
  std::normal_distribution<double> drift(0.0, 0.01), zoomStep(0.0, 0.05);
  std::uniform_real_distribution<double> u(0, 1), jitter(4, 24);
  std::vector<ViewSample> views;
  ViewSample v;
  v.cursorUV = near;
  v.zoom = 2.0;
  double t = 0;
  for (std::size_t i = 0; i < n; ++i) {
    v.timestampMs = t;
    t += jitter(rng);
    v.cursorUV = (v.cursorUV + Vec2d(drift(rng), drift(rng))).cwiseMax(0.0).cwiseMin(1.0);
    if (u(rng) < 0.02) v.cursorUV = near;
    v.zoom = std::clamp(v.zoom + (u(rng) < 0.5 ? zoomStep(rng) : 0.0), 1.0, 8.0);
    views.push_back(v);
  }
  return views;
}

inline std::vector<oracle::Pose> toOracle(const std::vector<HeadPosed>& trace) {
  std::vector<oracle::Pose> out;
  for (const auto& s : trace) {
    out.push_back({s.timestampMs, {s.position.x(), s.position.y(), s.position.z()}, s.orientation.yaw,
                   s.orientation.pitch, s.orientation.roll});
  }
  return out;
}

inline std::vector<oracle::Frame> toOracle(const std::vector<ViewSample>& views) {
  std::vector<oracle::Frame> out;
  for (const auto& v : views) out.push_back({v.timestampMs / 1000.0, v.cursorUV.x(), v.cursorUV.y(), v.zoom});
  return out;
}

inline std::vector<double> zooms(const std::vector<ViewSample>& views) {
  std::vector<double> z;
  for (const auto& v : views) z.push_back(v.zoom);
  return z;
}

}  // namespace fixtures
