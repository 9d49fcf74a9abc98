#include "headzoom/trial.hpp"

#include <cmath>

#include "headzoom/text.hpp"
#include "json.hpp"

namespace headzoom {

using nlohmann::json;

double pixelDistance(const Vec2d& a, const Vec2d& b, const ImageSpec& image) {
  const Vec2d scale(image.widthPx, image.heightPx);
  return (a - b).cwiseProduct(scale).norm();
}

bool insideRing(const Vec2d& cursor, const Vec2d& target, const ImageSpec& image) {
  return pixelDistance(cursor, target, image) < image.ringRadiusPx;
}

std::string_view to_string(TrialOutcome outcome) {
  switch (outcome) {
    case TrialOutcome::Success: return "success";
    case TrialOutcome::FailedAttempts: return "failed_attempts";
    case TrialOutcome::Timeout: return "timeout";
  }
  return "timeout";
}

std::optional<TrialOutcome> parseOutcome(std::string_view text) {
  if (text == "success") return TrialOutcome::Success;
  if (text == "failed_attempts") return TrialOutcome::FailedAttempts;
  if (text == "timeout") return TrialOutcome::Timeout;
  return std::nullopt;
}

std::string_view to_string(AttemptVerdict verdict) {
  switch (verdict) {
    case AttemptVerdict::Correct: return "correct";
    case AttemptVerdict::Wrong: return "wrong";
    case AttemptVerdict::Timeout: return "timeout";
  }
  return "wrong";
}

std::optional<TrialOutcome> classifyTrial(std::span<const Attempt> attempts, double elapsedSeconds,
                                          const TrialRules& rules) {
  int wrong = 0;
  for (const auto& a : attempts) {
    if (a.timeSeconds >= rules.timeLimitSeconds) return TrialOutcome::Timeout;
    if (a.correct) return TrialOutcome::Success;
    if (++wrong >= rules.maxAttempts) return TrialOutcome::FailedAttempts;
  }
  if (elapsedSeconds >= rules.timeLimitSeconds) return TrialOutcome::Timeout;
  return std::nullopt;
}

TrialSession::TrialSession(Vec2d targetUV, TrialRules rules) : target_(std::move(targetUV)), rules_(rules) {}

int TrialSession::remainingAttempts() const {
  return std::max(0, rules_.maxAttempts - static_cast<int>(attempts_.size()));
}

bool TrialSession::advance(double elapsedSeconds) {
  if (outcome_) return false;
  duration_ = std::max(duration_, std::min(elapsedSeconds, rules_.timeLimitSeconds));
  if (elapsedSeconds >= rules_.timeLimitSeconds) {
    outcome_ = TrialOutcome::Timeout;
    duration_ = rules_.timeLimitSeconds;
    return true;
  }
  return false;
}

AttemptResult TrialSession::attempt(double elapsedSeconds, const Vec2d& cursorUV) {
  if (outcome_) throw Error(ErrorCode::InvalidArgument, "trial already finished");
  if (advance(elapsedSeconds)) return {AttemptVerdict::Timeout, remainingAttempts()};

  const bool correct = insideRing(cursorUV, target_, rules_.image);
  attempts_.push_back({elapsedSeconds, cursorUV, correct});
  duration_ = elapsedSeconds;
  outcome_ = classifyTrial(attempts_, elapsedSeconds, rules_);
  return {correct ? AttemptVerdict::Correct : AttemptVerdict::Wrong, remainingAttempts()};
}

void validate(const TrialRecord& record, const TrialRules& rules) {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::InvalidArgument, "trial record: " + why); };
  if (static_cast<int>(record.attempts.size()) > rules.maxAttempts) fail("more attempts than allowed");
  if (record.durationSeconds < 0.0 || record.durationSeconds > rules.timeLimitSeconds) {
    fail("duration outside [0, time limit]");
  }
  for (std::size_t i = 0; i < record.attempts.size(); ++i) {
    if (record.attempts[i].correct && i + 1 != record.attempts.size()) fail("attempts continue after a correct one");
  }
  const auto implied = classifyTrial(record.attempts, record.durationSeconds, rules);
  if (!implied || *implied != record.outcome) fail("outcome does not follow from attempts and duration");
  if (record.outcome == TrialOutcome::Timeout && record.durationSeconds != rules.timeLimitSeconds) {
    fail("timeout trials must last the full time limit");
  }
  if (record.imageUserGrade && (*record.imageUserGrade < 1 || *record.imageUserGrade > 7)) {
    fail("image grade must be 1-7");
  }
}

std::string formatTrialRecord(const TrialRecord& record) {
  json j;
  j["participant"] = record.participantId;
  j["trace"] = record.tracePath.generic_string();
  j["mode"] = std::string(to_string(record.mode));
  j["image"] = record.imageId;
  j["target"] = record.targetName;
  json targets = json::object();
  for (const auto& [name, uv] : record.targetUVs) targets[name] = {uv.x(), uv.y()};
  j["targets"] = targets;
  json attempts = json::array();
  for (const auto& a : record.attempts) {
    attempts.push_back({{"t", a.timeSeconds}, {"u", a.cursorUV.x()}, {"v", a.cursorUV.y()}, {"correct", a.correct}});
  }
  j["attempts"] = attempts;
  j["outcome"] = std::string(to_string(record.outcome));
  j["duration_s"] = record.durationSeconds;
  j["grade"] = record.imageUserGrade ? json(*record.imageUserGrade) : json(nullptr);
  return j.dump(2) + "\n";
}

TrialRecord parseTrialRecord(std::string_view contents) {
  try {
    const json j = json::parse(contents);
    TrialRecord r;
    r.participantId = j.value("participant", std::string("P00"));
    r.tracePath = j.at("trace").get<std::string>();
    const auto mode = parseMode(j.at("mode").get<std::string>());
    if (!mode) throw Error(ErrorCode::ParseError, "trial record: unknown mode");
    r.mode = *mode;
    r.imageId = j.value("image", std::string());
    r.targetName = j.value("target", std::string("Wally"));
    for (const auto& [name, uv] : j.at("targets").items()) {
      r.targetUVs[name] = Vec2d(uv.at(0).get<double>(), uv.at(1).get<double>());
    }
    for (const auto& a : j.at("attempts")) {
      r.attempts.push_back({a.at("t").get<double>(), Vec2d(a.at("u").get<double>(), a.at("v").get<double>()),
                            a.at("correct").get<bool>()});
    }
    const auto outcome = parseOutcome(j.at("outcome").get<std::string>());
    if (!outcome) throw Error(ErrorCode::ParseError, "trial record: unknown outcome");
    r.outcome = *outcome;
    r.durationSeconds = j.at("duration_s").get<double>();
    if (j.contains("grade") && !j["grade"].is_null()) r.imageUserGrade = j["grade"].get<int>();
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("trial record: ") + e.what());
  }
}

void writeTrialRecord(const std::filesystem::path& path, const TrialRecord& record) {
  validate(record);
  text::writeFile(path, formatTrialRecord(record));
}

TrialRecord readTrialRecord(const std::filesystem::path& path) {
  TrialRecord record = text::parseFile(path, [](std::string_view contents) {
    TrialRecord r = parseTrialRecord(contents);
    validate(r);
    return r;
  });
  const auto tracePath = record.tracePath.is_absolute() ? record.tracePath : path.parent_path() / record.tracePath;
  record.trace = readTrace(tracePath);
  return record;
}

}  // namespace headzoom
