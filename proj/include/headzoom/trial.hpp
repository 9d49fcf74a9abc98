#pragma once

// Target-finding trial rules and the trial record sidecar.

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "headzoom/geometry.hpp"
#include "headzoom/mode.hpp"
#include "headzoom/trace_io.hpp"

namespace headzoom {

/// Reference image the uv space is measured against.
struct ImageSpec {
  double widthPx{2800.0};
  double heightPx{1749.0};
  double ringRadiusPx{105.0};
};

/// Distance between two uv points measured in reference-image pixels.
double pixelDistance(const Vec2d& a, const Vec2d& b, const ImageSpec& image = {});

/// Strictly inside the ring: distance < radius.
bool insideRing(const Vec2d& cursor, const Vec2d& target, const ImageSpec& image = {});

struct TrialRules {
  double timeLimitSeconds{120.0};
  int maxAttempts{3};
  ImageSpec image{};
};

enum class TrialOutcome { Success, FailedAttempts, Timeout };

std::string_view to_string(TrialOutcome outcome);
std::optional<TrialOutcome> parseOutcome(std::string_view text);

struct Attempt {
  double timeSeconds{0.0};
  Vec2d cursorUV{0.5, 0.5};
  bool correct{false};
};

/// Outcome implied by the attempt list and elapsed time under `rules`, or
/// nullopt while the trial is still running.
std::optional<TrialOutcome> classifyTrial(std::span<const Attempt> attempts, double elapsedSeconds,
                                          const TrialRules& rules = {});

enum class AttemptVerdict { Correct, Wrong, Timeout };

std::string_view to_string(AttemptVerdict verdict);

struct AttemptResult {
  AttemptVerdict verdict{AttemptVerdict::Wrong};
  int remainingAttempts{0};
};

/// Live trial state machine: ends on the first correct attempt, after the
/// last allowed wrong attempt, or when the time limit passes.
class TrialSession {
 public:
  TrialSession(Vec2d targetUV, TrialRules rules = {});

  /// Registers an attempt at `elapsedSeconds` into the trial. Attempts after
  /// the time limit resolve to Timeout. Throws InvalidArgument once finished.
  AttemptResult attempt(double elapsedSeconds, const Vec2d& cursorUV);

  /// Advances the clock; returns true exactly once, when the limit is crossed.
  bool advance(double elapsedSeconds);

  bool finished() const { return outcome_.has_value(); }
  std::optional<TrialOutcome> outcome() const { return outcome_; }
  int remainingAttempts() const;
  double durationSeconds() const { return duration_; }
  const std::vector<Attempt>& attempts() const { return attempts_; }
  const TrialRules& rules() const { return rules_; }

 private:
  Vec2d target_;
  TrialRules rules_;
  std::vector<Attempt> attempts_;
  std::optional<TrialOutcome> outcome_;
  double duration_{0.0};
};

struct TrialRecord {
  std::string participantId{"P00"};
  /// Trace file, relative paths resolve against the sidecar's directory.
  std::filesystem::path tracePath;
  PoseTrace trace;
  Mode mode{Mode::Static};
  std::string imageId;
  std::string targetName{"Wally"};
  std::map<std::string, Vec2d> targetUVs;
  std::vector<Attempt> attempts;
  TrialOutcome outcome{TrialOutcome::Timeout};
  double durationSeconds{0.0};
  std::optional<int> imageUserGrade;
};

/// Throws InvalidArgument when the record breaks the trial rules.
void validate(const TrialRecord& record, const TrialRules& rules = {});

/// JSON sidecar. `writeTrialRecord` does not write the trace itself.
std::string formatTrialRecord(const TrialRecord& record);
TrialRecord parseTrialRecord(std::string_view contents);
void writeTrialRecord(const std::filesystem::path& path, const TrialRecord& record);
/// Reads the sidecar and loads the referenced trace.
TrialRecord readTrialRecord(const std::filesystem::path& path);

}  // namespace headzoom
