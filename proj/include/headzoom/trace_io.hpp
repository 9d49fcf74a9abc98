#pragma once

// Pose traces, view streams and their tab-separated file formats, plus the
// scripted trace synthesizer used by tests and demos.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "headzoom/geometry.hpp"
#include "headzoom/modes.hpp"

namespace headzoom {

inline constexpr double kDefaultRateHz = 72.0;

struct PoseTrace {
  std::string source{"unknown"};
  double rateHz{kDefaultRateHz};
  std::vector<HeadPosed> samples;
};

/// Column order of the canonical trace file.
inline constexpr std::string_view kTraceHeader = "timestamp_ms\tpos_x\tpos_y\tpos_z\tyaw_rad\tpitch_rad\troll_rad";

/// Serialized trace: `#` comment lines (source/rate metadata), the header
/// row, then one tab-separated row per sample. Non-finite values are rejected.
std::string formatTrace(const PoseTrace& trace);

/// Throws LineError(ParseError) on malformed rows or fewer than two samples,
/// LineError(MonotonicityError) when a timestamp does not strictly increase.
/// NaN fields are accepted so recorded tracking loss can be replayed.
PoseTrace parseTrace(std::string_view contents);

void writeTrace(const std::filesystem::path& path, const PoseTrace& trace);
PoseTrace readTrace(const std::filesystem::path& path);

/// One row of a view stream, the flat form of a ViewState that files and the
/// wire protocol carry.
struct ViewSample {
  double timestampMs{0.0};
  Mode mode{Mode::Static};
  double zoom{1.0};
  Vec2d panUV{0.5, 0.5};
  double leanX{0.5};
  Orientationd planeOrientation{};
  Vec2d cursorUV{0.5, 0.5};
};

ViewSample toSample(const ViewStated& view);

inline constexpr std::string_view kViewHeader =
    "timestamp_ms\tmode\tzoom\tpan_u\tpan_v\tlean_x\tplane_yaw\tplane_pitch\tplane_roll\tcursor_u\tcursor_v";

/// The fields of a sample in header order, separated by `sep`.
std::string formatViewFields(const ViewSample& sample, char sep);

std::string formatViewStream(std::span<const ViewSample> samples);
std::vector<ViewSample> parseViewStream(std::string_view contents);
void writeViewStream(const std::filesystem::path& path, std::span<const ViewSample> samples);
std::vector<ViewSample> readViewStream(const std::filesystem::path& path);

/// Runs every sample of `trace` through `engine`, collecting one view per
/// emitted frame.
std::vector<ViewSample> replayTrace(const PoseTrace& trace, Engined& engine);

/// Motion script, one directive per line (`#` comments):
///
///   rate <hz>                     sampling rate (default 72)
///   seed <n>                      noise seed (default 1)
///   start <x> <y> <z> <yaw> <pitch> <roll>
///   limits <forward m> <backward m>   lean extents used by `lean`
///   noise <sigma m> [<sigma rad>]     Gaussian noise on later samples
///   hold <seconds>
///   lean <x> <seconds>            ramp to lean coordinate x in [0,1]
///   yaw|pitch|roll <rad> <seconds>    ramp an angle to an absolute value
///   move <dx> <dy> <dz> <seconds>     ramp a world-space offset
///   dropout <seconds>             NaN samples (tracking loss)
///
/// Each timed directive emits ceil(seconds * rate) samples on the global
/// grid t_i = i / rate; ramps reach their target on the segment's last sample.
/// The lean axis is the horizontal forward of the start pose. A `seed`
/// argument takes precedence over the script's own.
PoseTrace synthesizeTrace(std::string_view script, std::optional<std::uint64_t> seed = std::nullopt);

}  // namespace headzoom
