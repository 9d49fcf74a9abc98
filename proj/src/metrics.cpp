#include "headzoom/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "headzoom/text.hpp"

namespace headzoom {

namespace {

std::vector<HeadPosed> finiteSamples(std::span<const HeadPosed> trace) {
  std::vector<HeadPosed> out;
  out.reserve(trace.size());
  std::copy_if(trace.begin(), trace.end(), std::back_inserter(out), [](const auto& p) { return isFinite(p); });
  return out;
}

}  // namespace

double totalHeadMovement(std::span<const HeadPosed> trace) {
  const auto samples = finiteSamples(trace);
  double total = 0.0;
  for (std::size_t i = 1; i < samples.size(); ++i) total += (samples[i].position - samples[i - 1].position).norm();
  return total;
}

double totalHeadRotation(std::span<const HeadPosed> trace) {
  const auto samples = finiteSamples(trace);
  double total = 0.0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const Vec3d a = forwardVector(samples[i - 1].orientation);
    const Vec3d b = forwardVector(samples[i].orientation);
    const double cosine = std::clamp(a.dot(b) / (a.norm() * b.norm()), -1.0, 1.0);
    total += std::acos(cosine);
  }
  return total;
}

std::size_t transitionCount(std::span<const HeadPosed> trace) {
  const auto n = static_cast<std::size_t>(std::count_if(trace.begin(), trace.end(), [](const auto& p) { return isFinite(p); }));
  return n > 0 ? n - 1 : 0;
}

double maxLean(std::span<const HeadPosed> trace, const Vec3d& leanAxis) {
  const auto samples = finiteSamples(trace);
  if (samples.empty()) return 0.0;
  const double initial = samples.front().position.dot(leanAxis);
  double best = 0.0;
  for (const auto& p : samples) best = std::max(best, std::abs(p.position.dot(leanAxis) - initial));
  return best;
}

double maxLean(std::span<const HeadPosed> trace, const CalibrationProfiled& profile) {
  return maxLean(trace, profile.leanAxis);
}

std::map<std::string, double> hoverTime(std::span<const ViewSample> views, const std::map<std::string, Vec2d>& targets,
                                        const ImageSpec& image) {
  std::map<std::string, double> out;
  for (const auto& [name, uv] : targets) {
    double seconds = 0.0;
    for (std::size_t i = 0; i + 1 < views.size(); ++i) {
      if (insideRing(views[i].cursorUV, uv, image)) {
        seconds += (views[i + 1].timestampMs - views[i].timestampMs) / 1000.0;
      }
    }
    out[name] = seconds;
  }
  return out;
}

ZoomMetrics zoomMetrics(std::span<const ViewSample> views, double epsilon) {
  if (views.size() < 2) throw Error(ErrorCode::InsufficientData, "zoom metrics need at least two views");
  ZoomMetrics m;
  double sum = 0.0;
  m.maximum = views.front().zoom;
  for (std::size_t i = 0; i < views.size(); ++i) {
    const double z = views[i].zoom;
    sum += z;
    m.maximum = std::max(m.maximum, z);
    if (i > 0) m.totalDistance += std::abs(z - views[i - 1].zoom);
  }
  m.average = sum / static_cast<double>(views.size());

  // Zigzag over the series: direction 0 until the first epsilon move.
  int direction = 0;
  double low = views.front().zoom;
  double high = low;
  double legStart = low;
  double extreme = low;
  for (const auto& v : views) {
    const double z = v.zoom;
    if (direction == 0) {
      low = std::min(low, z);
      high = std::max(high, z);
      if (z - low >= epsilon) {
        direction = 1;
        legStart = low;
        extreme = z;
      } else if (high - z >= epsilon) {
        direction = -1;
        legStart = high;
        extreme = z;
      }
      continue;
    }
    if ((direction > 0 && z >= extreme) || (direction < 0 && z <= extreme)) {
      extreme = z;
    } else if (std::abs(extreme - z) >= epsilon) {
      ++m.changeCount;
      legStart = extreme;
      extreme = z;
      direction = -direction;
    }
  }
  if (direction != 0 && std::abs(extreme - legStart) >= epsilon) ++m.changeCount;
  return m;
}

double defaultZoomEpsilon(const ZoomRanged& range) { return 0.02 * (range.maxZoom - range.minZoom); }

ErrorMetrics errorMetrics(const TrialRecord& trial) {
  ErrorMetrics m;
  m.falsePositives = static_cast<int>(std::count_if(trial.attempts.begin(), trial.attempts.end(),
                                                    [](const Attempt& a) { return !a.correct; }));
  m.success = trial.outcome == TrialOutcome::Success;
  return m;
}

MetricsReport computeMetrics(const TrialRecord& trial, std::span<const ViewSample> views,
                             const MetricsOptions& options) {
  const auto& samples = trial.trace.samples;
  const std::size_t transitions = transitionCount(samples);
  if (transitions < 1) throw Error(ErrorCode::InsufficientData, "trace needs at least two valid samples");
  if (views.size() < 2) throw Error(ErrorCode::InsufficientData, "view stream needs at least two frames");

  MetricsReport r;
  r.participantId = trial.participantId;
  r.mode = trial.mode;
  r.imageId = trial.imageId;
  r.outcome = trial.outcome;
  r.completionTimeSeconds = trial.durationSeconds;
  r.totalHeadMovement = totalHeadMovement(samples);
  r.totalHeadRotation = totalHeadRotation(samples);
  r.avgHeadMovement = r.totalHeadMovement / static_cast<double>(transitions);
  r.avgHeadRotation = r.totalHeadRotation / static_cast<double>(transitions);

  if (options.profile) {
    r.maxLean = maxLean(samples, *options.profile);
  } else {
    const auto first = std::find_if(samples.begin(), samples.end(), [](const auto& p) { return isFinite(p); });
    Vec3d axis = forwardVector(first->orientation);
    axis.y() = 0.0;
    r.maxLean = axis.norm() > 1e-6 ? maxLean(samples, axis.normalized()) : 0.0;
  }

  r.hoverTimeSeconds = hoverTime(views, trial.targetUVs, options.image);
  if (const auto it = r.hoverTimeSeconds.find(trial.targetName); it != r.hoverTimeSeconds.end()) {
    r.hoverTargetSeconds = it->second;
  }
  r.zoom = zoomMetrics(views, options.zoomEpsilon);
  const auto errors = errorMetrics(trial);
  r.falsePositives = errors.falsePositives;
  r.success = errors.success;
  r.imageUserGrade = trial.imageUserGrade;
  return r;
}

std::string metricsTableHeader() {
  std::string h =
      "participant\tmode\timage\toutcome\tcompletion_time_s\ttotal_head_movement_m\ttotal_head_rotation_rad\t"
      "avg_head_movement_m\tavg_head_rotation_rad\tmax_lean_m\thover_target_s";
  for (const auto& name : kReportedCharacters) {
    std::string lower = name;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    h += "\thover_" + lower + "_s";
  }
  h += "\tzoom_change_count\ttotal_zoom_distance\tavg_zoom\tmax_zoom\tfalse_positives\tsuccess\timage_user_grade";
  return h;
}

std::string formatMetricsRow(const MetricsReport& r) {
  using text::formatDouble;
  std::string row = r.participantId + '\t' + std::string(to_string(r.mode)) + '\t' + r.imageId + '\t' +
                    std::string(to_string(r.outcome));
  for (double v : {r.completionTimeSeconds, r.totalHeadMovement, r.totalHeadRotation, r.avgHeadMovement,
                   r.avgHeadRotation, r.maxLean, r.hoverTargetSeconds}) {
    row += '\t' + formatDouble(v);
  }
  for (const auto& name : kReportedCharacters) {
    const auto it = r.hoverTimeSeconds.find(name);
    row += '\t' + (it == r.hoverTimeSeconds.end() ? std::string("NA") : formatDouble(it->second));
  }
  row += '\t' + std::to_string(r.zoom.changeCount);
  for (double v : {r.zoom.totalDistance, r.zoom.average, r.zoom.maximum}) row += '\t' + formatDouble(v);
  row += '\t' + std::to_string(r.falsePositives);
  row += '\t' + std::string(r.success ? "1" : "0");
  row += '\t' + (r.imageUserGrade ? std::to_string(*r.imageUserGrade) : std::string("NA"));
  return row;
}

std::string formatMetricsTable(std::span<const MetricsReport> reports) {
  std::string out = metricsTableHeader() + '\n';
  for (const auto& r : reports) out += formatMetricsRow(r) + '\n';
  return out;
}

}  // namespace headzoom
