#pragma once

// Vector/angle primitives, image-plane placement and ray-plane picking.
//
// World frame: Y up, +Z forward at yaw 0, +X to the right of a user looking
// down +Z (the display-style frame used by common game engines). Positive
// yaw turns toward +X, positive pitch looks up. Orientations compose as
// yaw about the vertical axis, then pitch, then roll about the view axis.

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

#include "headzoom/error.hpp"

namespace headzoom {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Mat3 = Eigen::Matrix<Scalar, 3, 3>;

inline constexpr double kPlaneWidth = 2.0;
inline constexpr double kPlaneHeight = 1.0;
inline constexpr double kPlaneDistance = 2.0;

/// Wraps an angle into (-pi, pi].
template <typename Scalar>
Scalar wrapAngle(Scalar angle) {
  using std::floor;
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const Scalar twoPi = Scalar(2) * pi;
  Scalar wrapped = angle - twoPi * floor((angle + pi) / twoPi);
  // floor() maps +pi to -pi; the range is half-open on the other side.
  if (wrapped <= -pi) wrapped += twoPi;
  return wrapped;
}

template <typename Scalar>
struct Orientation {
  Scalar yaw{0};
  Scalar pitch{0};
  Scalar roll{0};

  bool operator==(const Orientation&) const = default;
};

template <typename Scalar>
struct HeadPose {
  double timestampMs{0.0};
  Vec3<Scalar> position{Vec3<Scalar>::Zero()};
  Orientation<Scalar> orientation{};
};

template <typename Scalar>
struct ImagePlane {
  Vec3<Scalar> center{Vec3<Scalar>::Zero()};
  Orientation<Scalar> orientation{};
  Scalar width{Scalar(kPlaneWidth)};
  Scalar height{Scalar(kPlaneHeight)};
};

template <typename Scalar>
struct PlaneHit {
  Vec3<Scalar> hitPoint{Vec3<Scalar>::Zero()};
  /// (0,0) is the top-left image corner, (0.5,0.5) the center; v grows downward.
  Vec2<Scalar> uv{Scalar(0.5), Scalar(0.5)};
  bool valid{false};
  /// True when the geometric hit fell outside the rectangle and uv was clamped.
  bool clamped{false};
};

template <typename Scalar>
bool isFinite(const HeadPose<Scalar>& pose) {
  using std::isfinite;
  return isfinite(pose.timestampMs) && pose.position.allFinite() && isfinite(pose.orientation.yaw) &&
         isfinite(pose.orientation.pitch) && isfinite(pose.orientation.roll);
}

template <typename Scalar>
Mat3<Scalar> rotationMatrix(const Orientation<Scalar>& o) {
  using AngleAxis = Eigen::AngleAxis<Scalar>;
  return (AngleAxis(o.yaw, Vec3<Scalar>::UnitY()) * AngleAxis(-o.pitch, Vec3<Scalar>::UnitX()) *
          AngleAxis(o.roll, Vec3<Scalar>::UnitZ()))
      .toRotationMatrix();
}

/// Unit view direction. Roll spins about this axis and so never changes it.
template <typename Scalar>
Vec3<Scalar> forwardVector(const Orientation<Scalar>& o) {
  using std::cos;
  using std::sin;
  const Scalar cp = cos(o.pitch);
  return Vec3<Scalar>(cp * sin(o.yaw), sin(o.pitch), cp * cos(o.yaw));
}

/// Yaw/pitch whose forward vector is `dir` (need not be normalized); roll is zero.
template <typename Scalar>
Orientation<Scalar> orientationFacing(const Vec3<Scalar>& dir) {
  using std::asin;
  using std::atan2;
  const Vec3<Scalar> unit = dir.normalized();
  const Scalar y = std::clamp(unit.y(), Scalar(-1), Scalar(1));
  return {atan2(unit.x(), unit.z()), asin(y), Scalar(0)};
}

/// Axis pointing from the user into the plane (the plane's local +Z).
template <typename Scalar>
Vec3<Scalar> planeForward(const ImagePlane<Scalar>& plane) {
  return forwardVector(plane.orientation);
}

/// Normal on the side facing the user.
template <typename Scalar>
Vec3<Scalar> planeNormal(const ImagePlane<Scalar>& plane) {
  return -planeForward(plane);
}

/// Plane centred `distance` metres ahead of the pose at eye height, with the
/// normal along the horizontalized forward direction. Pitch and roll of the
/// pose are ignored.
template <typename Scalar>
ImagePlane<Scalar> placePlane(const HeadPose<Scalar>& initial, Scalar distance = Scalar(kPlaneDistance)) {
  Vec3<Scalar> horizontal = forwardVector(initial.orientation);
  horizontal.y() = Scalar(0);
  // cos(pitch) can leave a residue near +-pi/2; treat anything this small as straight up/down.
  if (!(horizontal.norm() > Scalar(1e-6))) {
    throw Error(ErrorCode::DegeneratePose, "initial pose looks straight up or down; cannot place the image plane");
  }
  horizontal.normalize();
  ImagePlane<Scalar> plane;
  plane.center = initial.position + distance * horizontal;
  plane.orientation = orientationFacing(horizontal);
  plane.orientation.pitch = Scalar(0);
  return plane;
}

/// World point of a normalized image coordinate.
template <typename Scalar>
Vec3<Scalar> planePoint(const ImagePlane<Scalar>& plane, const Vec2<Scalar>& uv) {
  const Vec3<Scalar> local((uv.x() - Scalar(0.5)) * plane.width, (Scalar(0.5) - uv.y()) * plane.height, Scalar(0));
  return plane.center + rotationMatrix(plane.orientation) * local;
}

/// Intersects the ray origin + t*dir (t >= 0) with the plane's carrier. Hits
/// outside the rectangle stay valid with uv clamped into [0,1]^2; parallel
/// rays and rays pointing away from the carrier are invalid.
template <typename Scalar>
PlaneHit<Scalar> raycastPlane(const Vec3<Scalar>& origin, const Vec3<Scalar>& dir, const ImagePlane<Scalar>& plane) {
  using std::abs;
  PlaneHit<Scalar> hit;
  const Vec3<Scalar> axis = planeForward(plane);
  const Scalar denom = dir.dot(axis);
  if (!(abs(denom) > Scalar(1e-12))) return hit;
  const Scalar t = (plane.center - origin).dot(axis) / denom;
  if (!(t >= Scalar(0))) return hit;

  hit.hitPoint = origin + t * dir;
  const Vec3<Scalar> local = rotationMatrix(plane.orientation).transpose() * (hit.hitPoint - plane.center);
  const Vec2<Scalar> raw(Scalar(0.5) + local.x() / plane.width, Scalar(0.5) - local.y() / plane.height);
  hit.uv = raw.cwiseMax(Scalar(0)).cwiseMin(Scalar(1));
  hit.clamped = (hit.uv != raw);
  hit.valid = true;
  return hit;
}

/// Angle between the user-facing normal and the direction from the plane
/// center to `viewer`.
template <typename Scalar>
Scalar facingAngle(const ImagePlane<Scalar>& plane, const Vec3<Scalar>& viewer) {
  using std::atan2;
  const Vec3<Scalar> toViewer = viewer - plane.center;
  const Vec3<Scalar> normal = planeNormal(plane);
  return atan2(normal.cross(toViewer).norm(), normal.dot(toViewer));
}

using Vec3d = Vec3<double>;
using Vec2d = Vec2<double>;
using Orientationd = Orientation<double>;
using HeadPosed = HeadPose<double>;
using ImagePlaned = ImagePlane<double>;
using PlaneHitd = PlaneHit<double>;

}  // namespace headzoom
