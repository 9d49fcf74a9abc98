#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "headzoom/geometry.hpp"

namespace headzoom {

inline constexpr std::size_t kMinCalibrationSamples = 30;
inline constexpr double kMinLeanLimit = 0.01;

/// Per-user neutral pose plus the comfortable lean extents along the
/// horizontal forward axis captured at calibration time.
template <typename Scalar>
struct CalibrationProfile {
  HeadPose<Scalar> neutralPose{};
  Scalar forwardLimit{Scalar(0.3)};
  Scalar backwardLimit{Scalar(0.3)};
  Vec3<Scalar> leanAxis{Vec3<Scalar>::UnitZ()};
};

/// Throws InvertedLimits / InvalidArgument when the profile breaks its invariants.
template <typename Scalar>
void validate(const CalibrationProfile<Scalar>& profile) {
  using std::abs;
  if (!(profile.forwardLimit > Scalar(kMinLeanLimit)) || !(profile.backwardLimit > Scalar(kMinLeanLimit))) {
    throw Error(ErrorCode::InvertedLimits, "lean limits must both exceed " + std::to_string(kMinLeanLimit) + " m");
  }
  if (!(abs(profile.leanAxis.norm() - Scalar(1)) < Scalar(1e-9)) || !(abs(profile.leanAxis.y()) < Scalar(1e-12))) {
    throw Error(ErrorCode::InvalidArgument, "lean axis must be a horizontal unit vector");
  }
  if (!isFinite(profile.neutralPose)) {
    throw Error(ErrorCode::InvalidArgument, "neutral pose must be finite");
  }
}

namespace detail {

template <typename Scalar>
Scalar circularMean(std::span<const HeadPose<Scalar>> samples, Scalar Orientation<Scalar>::*angle) {
  using std::atan2;
  using std::cos;
  using std::sin;
  Scalar s(0);
  Scalar c(0);
  for (const auto& p : samples) {
    s += sin(p.orientation.*angle);
    c += cos(p.orientation.*angle);
  }
  return atan2(s, c);
}

template <typename Scalar>
Vec3<Scalar> meanPosition(std::span<const HeadPose<Scalar>> samples) {
  Vec3<Scalar> sum = Vec3<Scalar>::Zero();
  for (const auto& p : samples) sum += p.position;
  return sum / Scalar(samples.size());
}

template <typename Scalar>
void requireSamples(std::span<const HeadPose<Scalar>> samples, std::string_view which) {
  if (samples.size() < kMinCalibrationSamples) {
    throw Error(ErrorCode::InsufficientSamples, std::string(which) + " capture has " + std::to_string(samples.size()) +
                                                    " samples, need at least " +
                                                    std::to_string(kMinCalibrationSamples));
  }
  for (const auto& p : samples) {
    if (!isFinite(p)) throw Error(ErrorCode::InvalidArgument, std::string(which) + " capture contains non-finite values");
  }
}

}  // namespace detail

/// Averages the three captures into a profile. Angles are averaged on the
/// circle so captures straddling +-pi stay well defined.
template <typename Scalar>
CalibrationProfile<Scalar> calibrate(std::span<const HeadPose<Scalar>> neutralSamples,
                                     std::span<const HeadPose<Scalar>> forwardSamples,
                                     std::span<const HeadPose<Scalar>> backwardSamples) {
  detail::requireSamples(neutralSamples, "neutral");
  detail::requireSamples(forwardSamples, "forward");
  detail::requireSamples(backwardSamples, "backward");

  CalibrationProfile<Scalar> profile;
  profile.neutralPose.timestampMs = neutralSamples.front().timestampMs;
  profile.neutralPose.position = detail::meanPosition(neutralSamples);
  profile.neutralPose.orientation = {detail::circularMean(neutralSamples, &Orientation<Scalar>::yaw),
                                     detail::circularMean(neutralSamples, &Orientation<Scalar>::pitch),
                                     detail::circularMean(neutralSamples, &Orientation<Scalar>::roll)};

  Vec3<Scalar> axis = forwardVector(profile.neutralPose.orientation);
  axis.y() = Scalar(0);
  if (!(axis.norm() > Scalar(1e-6))) {
    throw Error(ErrorCode::DegeneratePose, "neutral capture looks straight up or down; no horizontal lean axis");
  }
  profile.leanAxis = axis.normalized();

  const Scalar neutralProjection = profile.neutralPose.position.dot(profile.leanAxis);
  const Scalar forward = detail::meanPosition(forwardSamples).dot(profile.leanAxis) - neutralProjection;
  const Scalar backward = detail::meanPosition(backwardSamples).dot(profile.leanAxis) - neutralProjection;
  if (!(forward > Scalar(kMinLeanLimit)) || !(backward < -Scalar(kMinLeanLimit))) {
    throw Error(ErrorCode::InvertedLimits, "forward capture must lie ahead of neutral and backward capture behind it");
  }
  profile.forwardLimit = forward;
  profile.backwardLimit = -backward;
  return profile;
}

/// Signed lean displacement along the profile axis (positive = toward the image).
template <typename Scalar>
Scalar leanDisplacement(const Vec3<Scalar>& position, const CalibrationProfile<Scalar>& profile) {
  return (position - profile.neutralPose.position).dot(profile.leanAxis);
}

/// Lean coordinate in [0,1]: 0 at the backward limit, 0.5 at neutral, 1 at
/// the forward limit, clamped beyond the limits.
template <typename Scalar>
Scalar normalizeLean(const Vec3<Scalar>& position, const CalibrationProfile<Scalar>& profile) {
  const Scalar d = leanDisplacement(position, profile);
  const Scalar x = d >= Scalar(0) ? Scalar(0.5) + Scalar(0.5) * d / profile.forwardLimit
                                  : Scalar(0.5) + Scalar(0.5) * d / profile.backwardLimit;
  return std::clamp(x, Scalar(0), Scalar(1));
}

using CalibrationProfiled = CalibrationProfile<double>;

/// Key-value text form (`key = values`, `#` comments). Numbers are written
/// with round-trip precision.
std::string formatProfile(const CalibrationProfiled& profile);
CalibrationProfiled parseProfile(std::string_view text);

void writeProfile(const std::filesystem::path& path, const CalibrationProfiled& profile);
CalibrationProfiled readProfile(const std::filesystem::path& path);

}  // namespace headzoom
