#pragma once

// Per-trial interaction metrics computed from a pose trace, the engine's
// view stream and the trial record.

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "headzoom/calibration.hpp"
#include "headzoom/trace_io.hpp"
#include "headzoom/trial.hpp"

namespace headzoom {

/// Sum of Euclidean distances between consecutive positions. Non-finite
/// samples are skipped.
double totalHeadMovement(std::span<const HeadPosed> trace);

/// Sum of angles between consecutive forward vectors.
double totalHeadRotation(std::span<const HeadPosed> trace);

/// Largest |displacement along `leanAxis`| from the first valid sample.
double maxLean(std::span<const HeadPosed> trace, const Vec3d& leanAxis);
double maxLean(std::span<const HeadPosed> trace, const CalibrationProfiled& profile);

/// Number of consecutive-sample transitions the totals sum over.
std::size_t transitionCount(std::span<const HeadPosed> trace);

/// Seconds the ring spent strictly within the hit radius of each target.
/// Frame i contributes t_{i+1} - t_i; the last frame contributes nothing.
std::map<std::string, double> hoverTime(std::span<const ViewSample> views, const std::map<std::string, Vec2d>& targets,
                                        const ImageSpec& image = {});

struct ZoomMetrics {
  int changeCount{0};
  double totalDistance{0.0};
  double average{0.0};
  double maximum{0.0};
};

/// A zoom change is a leg between confirmed turning points of at least
/// `epsilon`: a reversal only counts once the zoom has moved back by
/// `epsilon` from the running extreme, so sub-epsilon jitter never splits or
/// creates legs.
ZoomMetrics zoomMetrics(std::span<const ViewSample> views, double epsilon);

/// Default epsilon: 2% of the configured zoom range.
double defaultZoomEpsilon(const ZoomRanged& range = {});

struct ErrorMetrics {
  int falsePositives{0};
  bool success{false};
};

ErrorMetrics errorMetrics(const TrialRecord& trial);

/// Character names with dedicated hover columns in the results table.
inline const std::vector<std::string> kReportedCharacters{"Wally", "Wenda", "Wizard", "Odlaw"};

struct MetricsReport {
  std::string participantId;
  Mode mode{Mode::Static};
  std::string imageId;
  TrialOutcome outcome{TrialOutcome::Timeout};
  double completionTimeSeconds{0.0};
  double totalHeadMovement{0.0};
  double totalHeadRotation{0.0};
  double avgHeadMovement{0.0};
  double avgHeadRotation{0.0};
  double maxLean{0.0};
  double hoverTargetSeconds{0.0};
  std::map<std::string, double> hoverTimeSeconds;
  ZoomMetrics zoom{};
  int falsePositives{0};
  bool success{false};
  std::optional<int> imageUserGrade;
};

struct MetricsOptions {
  std::optional<CalibrationProfiled> profile;
  double zoomEpsilon{defaultZoomEpsilon()};
  ImageSpec image{};
};

/// Requires at least two trace samples and two views.
MetricsReport computeMetrics(const TrialRecord& trial, std::span<const ViewSample> views,
                             const MetricsOptions& options = {});

/// Header of the results table; `formatMetricsRow` emits the matching row.
std::string metricsTableHeader();
std::string formatMetricsRow(const MetricsReport& report);
std::string formatMetricsTable(std::span<const MetricsReport> reports);

}  // namespace headzoom
