// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>

#include "fixtures.hpp"
#include "headzoom/calibration.hpp"
#include "headzoom/filtering.hpp"
#include "headzoom/metrics.hpp"
#include "headzoom/session.hpp"
#include "headzoom/stats.hpp"
#include "headzoom/text.hpp"
#include "oracles.hpp"
#include "ws_client.hpp"

using namespace headzoom;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void criterion(const std::string& name, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome r;
  try {
    r = body();
  } catch (const std::exception& e) {
    r = {false, std::string("threw ") + e.what()};
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!r.pass) ++failures;
  std::printf("%s  %-24s %s [%.2f s]\n", r.pass ? "PASS" : "FAIL", name.c_str(), r.detail.c_str(), seconds);
  std::fflush(stdout);
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

double elapsedSince(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

CalibrationProfiled standardProfile() {
  CalibrationProfiled p;
  p.neutralPose = {0, Vec3d(0, 1.6, 0), {}};
  p.forwardLimit = 0.3;
  p.backwardLimit = 0.25;
  p.leanAxis = Vec3d::UnitZ();
  return p;
}

EngineConfigd config(Mode mode) {
  EngineConfigd c;
  c.mode = mode;
  return c;
}

double variance(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

// ---- criteria ---------------------------------------------------------------

Outcome scheduleFidelity() {
  const auto start = std::chrono::steady_clock::now();
  const double xs[] = {0, 0.25, 0.5, 0.75, 1};
  const double r[] = {1e-4, 1e-4, 1e-4, 0.05005, 0.1};
  const double parallelQ[] = {0.01, 0.01, 0.01, 0.00505, 1e-4};
  const auto tilt = builtinSchedule<double>(Mode::Tilt);
  const auto parallel = builtinSchedule<double>(Mode::Parallel);
  double worst = 0.0;
  for (int i = 0; i < 5; ++i) {
    worst = std::max(worst, std::abs(evalCurve(tilt.qCurve, xs[i]) - 0.01));
    worst = std::max(worst, std::abs(evalCurve(tilt.rCurve, xs[i]) - r[i]));
    worst = std::max(worst, std::abs(evalCurve(parallel.rCurve, xs[i]) - r[i]));
    worst = std::max(worst, std::abs(evalCurve(parallel.qCurve, xs[i]) - parallelQ[i]));
  }
  const double took = elapsedSince(start);
  return {worst <= 1e-12 && took < 1.0, "max |error| " + num(worst) + " (tol 1e-12), runtime " + num(took) + " s (< 1 s)"};
}

Outcome calibrationAnchors() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> limit(0.011, 0.6), yaw(-3.1, 3.1), coord(-1, 1);
  double worst = 0.0;
  int nonMonotone = 0;
  for (int i = 0; i < 1000; ++i) {
    CalibrationProfiled p;
    const double heading = yaw(rng);
    p.neutralPose = {0, Vec3d(coord(rng), 1.6 + coord(rng) / 5, coord(rng)), {heading, 0, 0}};
    p.leanAxis = Vec3d(std::sin(heading), 0, std::cos(heading));
    p.forwardLimit = limit(rng);
    p.backwardLimit = limit(rng);
    const Vec3d n = p.neutralPose.position;
    worst = std::max(worst, std::abs(normalizeLean(Vec3d(n - p.backwardLimit * p.leanAxis), p) - 0.0));
    worst = std::max(worst, std::abs(normalizeLean(n, p) - 0.5));
    worst = std::max(worst, std::abs(normalizeLean(Vec3d(n + p.forwardLimit * p.leanAxis), p) - 1.0));
    double prev = -1.0;
    for (double d = -1.0; d <= 1.0; d += 0.005) {
      const double x = normalizeLean(Vec3d(n + d * p.leanAxis), p);
      if (x < prev) ++nonMonotone;
      prev = x;
    }
  }
  return {worst <= 1e-12 && nonMonotone == 0,
          "anchor error " + num(worst) + " (tol 1e-12), monotonicity violations " + std::to_string(nonMonotone) +
              " over 1000 profiles"};
}

Outcome geometryOracle() {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> angle(-0.8, 0.8), roll(-3.1, 3.1), coord(-1, 1), spread(-0.9, 0.9);
  double worstPoint = 0.0, worstUV = 0.0;
  int compared = 0, disagreements = 0;
  for (int i = 0; i < 10000; ++i) {
    const oracle::Plane op{{coord(rng), 1.6 + coord(rng), 3 + coord(rng)}, angle(rng), angle(rng), roll(rng)};
    ImagePlaned plane;
    plane.center = Vec3d(op.center[0], op.center[1], op.center[2]);
    plane.orientation = {op.yaw, op.pitch, op.roll};
    const Vec3d origin(coord(rng), 1.6 + coord(rng), coord(rng));
    const Vec3d dir = forwardVector(Orientationd{spread(rng), spread(rng), 0});
    const auto hit = raycastPlane(origin, dir, plane);
    const auto ref = oracle::marchRay({origin.x(), origin.y(), origin.z()}, {dir.x(), dir.y(), dir.z()}, op, 12.0);
    if (!hit.valid || (hit.hitPoint - origin).norm() > 11.9) {
      if (!hit.valid && ref.valid) ++disagreements;
      continue;
    }
    if (!ref.valid) {
      ++disagreements;
      continue;
    }
    ++compared;
    worstPoint = std::max(worstPoint, (hit.hitPoint - Vec3d(ref.point[0], ref.point[1], ref.point[2])).norm());
    worstUV = std::max({worstUV, std::abs(hit.uv.x() - ref.u), std::abs(hit.uv.y() - ref.v)});
  }
  const auto flat = placePlane(HeadPosed{0, Vec3d(0, 1.6, 0), {}});
  const auto edge = raycastPlane(Vec3d(0, 1.6, 0), forwardVector(Orientationd{std::atan(0.5), 0, 0}), flat);
  const double edgeErr = std::max(std::abs(edge.uv.x() - 1.0), std::abs(edge.uv.y() - 0.5));
  return {worstPoint <= 1e-6 && worstUV <= 1e-6 && disagreements == 0 && edge.valid && edgeErr <= 1e-6,
          "max hit error " + num(worstPoint) + " m over " + std::to_string(compared) + " hits, " +
              std::to_string(disagreements) + " validity mismatches, 26.57 deg edge uv error " + num(edgeErr)};
}

Outcome modeContracts() {
  const auto start = std::chrono::steady_clock::now();
  // Ten seconds of leaning, turning, rolling and strafing with sensor noise.
  const auto trace = synthesizeTrace(
                         "seed 7\nnoise 0.002 0.002\nhold 1\nlean 1 1.5\nyaw 0.35 1\npitch -0.2 1\nroll 0.26 1\n"
                         "move 0.3 0 0 1\nlean 0.1 1.5\nyaw -0.3 1\nroll -0.1 1\n")
                         .samples;
  const auto profile = standardProfile();
  std::ostringstream detail;
  bool ok = trace.size() == 720;
  detail << trace.size() / 72.0 << " s trace; ";

  {
    Engined engine(config(Mode::Static), profile);
    std::optional<ViewStated> first;
    double spread = 0.0;
    for (const auto& p : trace) {
      const auto v = *engine.step(p);
      if (!first) first = v;
      spread = std::max({spread, std::abs(v.zoom - first->zoom), (v.plane.center - first->plane.center).norm(),
                         std::abs(v.plane.orientation.yaw - first->plane.orientation.yaw),
                         std::abs(v.plane.orientation.pitch - first->plane.orientation.pitch),
                         std::abs(v.plane.orientation.roll - first->plane.orientation.roll)});
    }
    ok = ok && spread == 0.0;
    detail << "static spread " << num(spread) << "; ";
  }
  {
    Engined engine(config(Mode::Parallel), profile);
    double orient = 0.0, mapping = 0.0;
    std::optional<Orientationd> first;
    const auto& zr = engine.config().zoom;
    for (const auto& p : trace) {
      const auto v = *engine.step(p);
      if (!first) first = v.plane.orientation;
      orient = std::max({orient, std::abs(v.plane.orientation.yaw - first->yaw),
                         std::abs(v.plane.orientation.pitch - first->pitch),
                         std::abs(v.plane.orientation.roll - first->roll)});
      const double lean = normalizeLean(v.pose.position, profile);
      mapping = std::max(mapping, std::abs(v.zoom - (zr.minZoom + lean * (zr.maxZoom - zr.minZoom))));
    }
    ok = ok && orient <= 1e-12 && mapping <= 1e-9;
    detail << "parallel orientation drift " << num(orient) << ", zoom map error " << num(mapping) << "; ";
  }
  {
    Engined engine(config(Mode::Tilt), profile);
    double facing = 0.0, roll = 0.0;
    for (const auto& p : trace) {
      const auto v = *engine.step(p);
      facing = std::max(facing, facingAngle(v.plane, v.pose.position));
      roll = std::max(roll, std::abs(v.plane.orientation.roll - v.pose.orientation.roll));
    }
    ok = ok && facing <= 1e-6 && roll <= 1e-9;
    detail << "tilt facing " << num(facing) << " rad, roll error " << num(roll);
  }
  const double took = elapsedSince(start);
  detail << "; runtime " << num(took) << " s (< 5 s)";
  return {ok && took < 5.0, detail.str()};
}

Outcome jitterSuppression() {
  // A head held at lean 0.9 with 2 mm of positional noise, run through the
  // whole engine so the schedule follows the tracked lean.
  const char* script = "seed 42\nnoise 0.002\nlean 0.9 0.5\nhold 120\n";
  const auto trace = synthesizeTrace(script).samples;
  const auto profile = standardProfile();
  auto positions = [&](Mode mode) {
    Engined engine(config(mode), profile);
    std::array<std::vector<double>, 3> in, out;
    for (std::size_t i = 0; i < trace.size(); ++i) {
      const auto v = *engine.step(trace[i]);
      if (i < 72 * 5) continue;
      for (int k = 0; k < 3; ++k) {
        in[k].push_back(trace[i].position[k]);
        out[k].push_back(v.pose.position[k]);
      }
    }
    double vin = 0, vout = 0;
    for (int k = 0; k < 3; ++k) {
      vin += variance(in[k]);
      vout += variance(out[k]);
    }
    return std::sqrt(vout / vin);
  };
  const double parallel = positions(Mode::Parallel);
  const double tilt = positions(Mode::Tilt);
  const double best = std::min(parallel, tilt);

  // Fixed-lean comparison on identical noise.
  std::mt19937_64 rng(43);
  std::normal_distribution<double> noise(0.0, 0.002);
  std::vector<HeadPosed> still;
  for (int i = 0; i < 2000; ++i) still.push_back({i * 1000.0 / 72, Vec3d(noise(rng), 1.6, noise(rng)), {}});
  auto tiltVariance = [&](double lean) {
    auto bank = makeFilterBank(builtinSchedule<double>(Mode::Tilt));
    std::vector<double> x;
    for (const auto& p : still) x.push_back(filterPose(bank, p, lean).position.x());
    return variance(x);
  };
  const double high = tiltVariance(0.95), low = tiltVariance(0.2);

  const auto again = synthesizeTrace(script).samples;
  Engined a(config(Mode::Parallel), profile), b(config(Mode::Parallel), profile);
  bool deterministic = again.size() == trace.size();
  for (std::size_t i = 0; deterministic && i < trace.size(); ++i) {
    deterministic = formatViewFields(toSample(*a.step(trace[i])), '\t') == formatViewFields(toSample(*b.step(again[i])), '\t');
  }
  // Steady-state bound of a random-walk Kalman filter: sqrt(K / (2 - K)).
  const auto s = builtinSchedule<double>(Mode::Parallel);
  const double q = evalCurve(s.qCurve, 0.9), r = evalCurve(s.rCurve, 0.9);
  const double m = (q + std::sqrt(q * q + 4 * q * r)) / 2, k = m / (m + r);
  return {best <= 0.25 && high < low && deterministic,
          "output/input std " + num(parallel) + " parallel, " + num(tilt) + " tilt (need <= 0.25; scalar filter floor " +
              num(std::sqrt(k / (2 - k))) + "); tilt var 0.95 vs 0.2: " + num(high) + " < " + num(low) +
              "; deterministic " + (deterministic ? "yes" : "no")};
}

Outcome metricsOracles() {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  double worst = 0.0, worstHoverSlack = 0.0;
  int zoomMismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto trace = fixtures::randomWalk(rng, 300 + trial * 7);
    const Vec2d target(u(rng), u(rng));
    const auto views = fixtures::randomViews(rng, 400 + trial * 5, target);
    const auto ot = fixtures::toOracle(trace);
    const auto ov = fixtures::toOracle(views);
    worst = std::max({worst, std::abs(totalHeadMovement(trace) - oracle::headMovement(ot)),
                      std::abs(totalHeadRotation(trace) - oracle::headRotation(ot)),
                      std::abs(maxLean(trace, Vec3d::UnitZ()) - oracle::maxLean(ot, {0, 0, 1}))});
    double maxDt = 0;
    for (std::size_t i = 1; i < ov.size(); ++i) maxDt = std::max(maxDt, ov[i].t - ov[i - 1].t);
    const double hover = hoverTime(views, {{"Wally", target}}).at("Wally");
    worstHoverSlack = std::max(worstHoverSlack, std::abs(hover - oracle::hover(ov, target.x(), target.y())) / maxDt);
    const auto z = fixtures::zooms(views);
    const auto zm = zoomMetrics(views, defaultZoomEpsilon());
    if (zm.changeCount != oracle::zoomChanges(z, defaultZoomEpsilon())) ++zoomMismatches;
    double distance = 0, sum = 0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      sum += z[i];
      if (i) distance += std::abs(z[i] - z[i - 1]);
    }
    worst = std::max({worst, std::abs(zm.totalDistance - distance), std::abs(zm.average - sum / z.size()),
                      std::abs(zm.maximum - *std::max_element(z.begin(), z.end()))});
  }
  std::vector<ViewSample> miss;
  for (int i = 0; i <= 100; ++i) {
    ViewSample v;
    v.timestampMs = i * 10.0;
    v.cursorUV = Vec2d(0.4 + 106.0 / 2800, 0.4);
    miss.push_back(v);
  }
  const double missHover = hoverTime(miss, {{"Wally", Vec2d(0.4, 0.4)}}).at("Wally");
  return {worst <= 1e-9 && worstHoverSlack <= 1.0 && zoomMismatches == 0 && missHover == 0.0,
          "max error " + num(worst) + " (tol 1e-9), hover within " + num(worstHoverSlack) +
              " frame dt (<= 1), zoom-change mismatches " + std::to_string(zoomMismatches) +
              ", 106 px hover " + num(missHover) + " s"};
}

Outcome trialRules() {
  const Vec2d target(0.6, 0.4), far(0.1, 0.9);
  int wrong = 0;
  auto expect = [&](bool cond) { wrong += cond ? 0 : 1; };

  TrialSession success(target);
  success.attempt(30, far);
  success.attempt(90, target);
  expect(success.outcome() == TrialOutcome::Success);

  TrialSession failed(target);
  for (double t : {10.0, 25.0, 40.0}) failed.attempt(t, far);
  expect(failed.outcome() == TrialOutcome::FailedAttempts);
  bool rejected = false;
  try {
    failed.attempt(50, target);
  } catch (const Error&) {
    rejected = true;
  }
  expect(rejected);

  TrialSession timeout(target);
  timeout.attempt(30, far);
  expect(!timeout.advance(119.99));
  expect(timeout.advance(120.0));
  expect(timeout.outcome() == TrialOutcome::Timeout && timeout.durationSeconds() == 120.0);

  const std::vector<Attempt> late{{120.5, target, true}};
  expect(classifyTrial(late, 120.5) == TrialOutcome::Timeout);
  return {wrong == 0, std::to_string(wrong) + " misclassified fixtures (success, three misses, 120 s limit)"};
}

Outcome statsOracles() {
  const std::vector<std::vector<double>> textbook{{45, 50, 55}, {42, 42, 45}, {36, 41, 43},
                                                  {39, 35, 40}, {51, 55, 59}, {44, 49, 56}};
  std::vector<double> flat;
  for (const auto& r : textbook) flat.insert(flat.end(), r.begin(), r.end());
  const auto ref = oracle::anovaBySquares(textbook);
  const auto a = rmAnova(flat, 6, 3);
  const double fErr = std::abs(a.fStatistic - ref.f);
  const double etaErr = std::abs(a.etaSquared - ref.ssModes / (ref.ssModes + ref.ssError));

  std::mt19937_64 rng(31);
  std::normal_distribution<double> shifted(0.5, 1.0), base(0.0, 1.0);
  std::vector<double> x(31), y(31), diffs(31);
  for (std::size_t i = 0; i < 31; ++i) {
    x[i] = shifted(rng);
    y[i] = base(rng);
    diffs[i] = x[i] - y[i];
  }
  const double pT = pairedTTest(x, y).pValue;
  const double pPerm = oracle::permutationPairedP(diffs, 100000, 7);

  const bool bands = effectBand(0.1999) == EffectBand::Negligible && effectBand(0.2) == EffectBand::Small &&
                     effectBand(0.4999) == EffectBand::Small && effectBand(0.5) == EffectBand::Medium &&
                     effectBand(0.7999) == EffectBand::Medium && effectBand(0.8) == EffectBand::Large;
  const bool bonferroni = kBonferroniAlpha == 0.05 / 3 && PairedTestResult{}.alpha == 0.05 / 3;
  return {fErr <= 1e-6 && etaErr <= 1e-6 && std::abs(pT - pPerm) <= 0.02 && bands && bonferroni,
          "anova F error " + num(fErr) + ", t p " + num(pT) + " vs permutation " + num(pPerm) + " (tol 0.02), bands " +
              (bands ? "ok" : "wrong") + ", bonferroni " + (bonferroni ? "0.05/3" : "wrong")};
}

// ---- end to end -------------------------------------------------------------

struct CliRun {
  int status;
  std::string out;
};

CliRun cli(const fs::path& dir, const std::string& args) {
  const auto out = dir / "cli_stdout.txt";
  const std::string cmd = "cd '" + dir.string() + "' && '" + HEADZOOM_CLI + "' " + args + " >'" + out.string() + "' 2>&1";
  const int raw = std::system(cmd.c_str());
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, text::readFile(out)};
}

/// Starts `headzoom serve` with a free port and returns its pid and port.
std::pair<pid_t, unsigned short> spawnServe(const fs::path& dir, std::vector<std::string> args) {
  int fds[2];
  if (pipe(fds) != 0) throw std::runtime_error("pipe failed");
  const pid_t pid = fork();
  if (pid == 0) {
    dup2(fds[1], STDOUT_FILENO);
    close(fds[0]);
    close(fds[1]);
    if (chdir(dir.c_str()) != 0) _exit(127);
    std::vector<char*> argv{const_cast<char*>(HEADZOOM_CLI), const_cast<char*>("serve")};
    for (auto& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);
    execv(HEADZOOM_CLI, argv.data());
    _exit(127);
  }
  close(fds[1]);
  FILE* in = fdopen(fds[0], "r");
  char line[256] = {};
  const bool got = std::fgets(line, sizeof line, in) != nullptr;
  std::fclose(in);
  const std::string text(line);
  const auto colon = text.rfind(':');
  if (!got || colon == std::string::npos) {
    kill(pid, SIGTERM);
    waitpid(pid, nullptr, 0);
    throw std::runtime_error("serve did not report its port: '" + text + "'");
  }
  return {pid, static_cast<unsigned short>(std::stoi(text.substr(colon + 1)))};
}

Outcome endToEnd() {
  const auto dir = fs::temp_directory_path() / "headzoom_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  text::writeFile(dir / "walk.txt",
                  "seed 11\nnoise 0.002 0.002\nhold 0.5\nlean 0.95 1.5\nyaw 0.3 1\nroll 0.2 0.5\nlean 0.2 1.5\n");
  writeProfile(dir / "profile.txt", standardProfile());
  if (cli(dir, "synth walk.txt -o walk.tsv").status != 0) return {false, "synth failed"};

  bool identical = true;
  for (const char* mode : {"static", "parallel", "tilt"}) {
    const std::string args = std::string("replay walk.tsv --profile profile.txt --mode ") + mode;
    if (cli(dir, args + " -o first.tsv").status != 0 || cli(dir, args + " -o second.tsv").status != 0) {
      return {false, std::string("replay failed in ") + mode};
    }
    identical = identical && text::readFile(dir / "first.tsv") == text::readFile(dir / "second.tsv");
  }

  // Live: stream the trace through `headzoom serve` and compare with a batch replay.
  if (cli(dir, "replay walk.tsv --profile profile.txt --mode tilt -o batch.tsv").status != 0) {
    return {false, "batch replay failed"};
  }
  const auto batch = readViewStream(dir / "batch.tsv");
  const auto trace = readTrace(dir / "walk.tsv");
  const auto [pid, port] = spawnServe(dir, {"--mode", "tilt", "--profile", "profile.txt", "--port", "0"});
  std::size_t matched = 0;
  std::string firstMismatch;
  try {
    wsclient::Client client(port);
    for (std::size_t i = 0; i < trace.samples.size() && i < batch.size(); ++i) {
      const auto live = client.request(formatPoseFrame(trace.samples[i]));
      if (wsclient::withoutTimestamp(live) == wsclient::withoutTimestamp(formatViewFrame(batch[i]))) {
        ++matched;
      } else if (firstMismatch.empty()) {
        firstMismatch = " first mismatch at frame " + std::to_string(i);
      }
    }
    client.close();
  } catch (...) {
    kill(pid, SIGTERM);
    waitpid(pid, nullptr, 0);
    throw;
  }
  kill(pid, SIGTERM);
  int status = 0;
  waitpid(pid, &status, 0);
  fs::remove_all(dir);
  const bool live = matched == batch.size() && batch.size() == trace.samples.size();
  return {identical && live, std::string("replay twice ") + (identical ? "byte-identical" : "differs") +
                                 " in 3 modes, live serve matched " + std::to_string(matched) + "/" +
                                 std::to_string(batch.size()) + " frames" + firstMismatch};
}

}  // namespace

int main() {
  criterion("schedule-fidelity", scheduleFidelity);
  criterion("calibration-anchors", calibrationAnchors);
  criterion("geometry-oracle", geometryOracle);
  criterion("mode-contracts", modeContracts);
  criterion("jitter-suppression", jitterSuppression);
  criterion("metrics-oracles", metricsOracles);
  criterion("trial-rules", trialRules);
  criterion("stats-oracles", statsOracles);
  criterion("end-to-end-determinism", endToEnd);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
