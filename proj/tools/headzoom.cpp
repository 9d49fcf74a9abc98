// headzoom command-line driver.

#include <csignal>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "headzoom/calibration.hpp"
#include "headzoom/config.hpp"
#include "headzoom/metrics.hpp"
#include "headzoom/server.hpp"
#include "headzoom/session.hpp"
#include "headzoom/stats.hpp"
#include "headzoom/text.hpp"
#include "headzoom/trace_io.hpp"

using namespace headzoom;

namespace {

constexpr int kExitError = 1;
constexpr int kExitNoData = 2;

struct EngineFlags {
  std::string mode;
  std::optional<double> zoomMin;
  std::optional<double> zoomMax;
  std::string profilePath;

  void attach(CLI::App* cmd) {
    cmd->add_option("--mode", mode, "static, parallel or tilt");
    cmd->add_option("--zoom-min", zoomMin, "Zoom at full backward lean");
    cmd->add_option("--zoom-max", zoomMax, "Zoom at full forward lean");
    cmd->add_option("--profile", profilePath, "Calibration profile file");
  }
};

RunConfig baseConfig() {
  if (const char* path = std::getenv("HEADZOOM_CONFIG"); path && *path) return readRunConfig(path);
  return {};
}

RunConfig applyFlags(RunConfig config, const EngineFlags& flags) {
  if (!flags.mode.empty()) {
    const auto mode = parseMode(flags.mode);
    if (!mode) throw Error(ErrorCode::InvalidArgument, "unknown mode '" + flags.mode + "'");
    config.engine.mode = *mode;
  }
  if (flags.zoomMin) config.engine.zoom.minZoom = *flags.zoomMin;
  if (flags.zoomMax) config.engine.zoom.maxZoom = *flags.zoomMax;
  return config;
}

std::optional<CalibrationProfiled> loadProfile(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return readProfile(path);
}

void emit(const std::string& outPath, const std::string& contents) {
  if (outPath.empty() || outPath == "-") {
    std::cout << contents;
  } else {
    text::writeFile(outPath, contents);
  }
}

Server* activeServer = nullptr;

void onSignal(int) {
  if (activeServer) activeServer->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hands-free zoom and pan engine: calibration, replay, metrics, statistics and live serving."};
  app.require_subcommand(1);

  std::string outPath;

  // calibrate
  auto* calibrateCmd = app.add_subcommand("calibrate", "Build a calibration profile from three captures");
  std::string neutralPath, forwardPath, backwardPath;
  calibrateCmd->add_option("--neutral", neutralPath, "Trace captured at the neutral posture")->required();
  calibrateCmd->add_option("--forward", forwardPath, "Trace captured at full forward lean")->required();
  calibrateCmd->add_option("--backward", backwardPath, "Trace captured at full backward lean")->required();
  calibrateCmd->add_option("-o,--out", outPath, "Profile file to write")->required();

  // replay
  auto* replayCmd = app.add_subcommand("replay", "Run a pose trace through the engine");
  std::string tracePath;
  EngineFlags replayFlags;
  replayCmd->add_option("trace", tracePath, "Pose trace")->required();
  replayFlags.attach(replayCmd);
  replayCmd->add_option("-o,--out", outPath, "View stream file (default stdout)");

  // synth
  auto* synthCmd = app.add_subcommand("synth", "Synthesize a pose trace from a motion script");
  std::string scriptPath;
  std::optional<std::uint64_t> seed;
  synthCmd->add_option("script", scriptPath, "Motion script")->required();
  synthCmd->add_option("--seed", seed, "Noise seed, overriding the script");
  synthCmd->add_option("-o,--out", outPath, "Trace file (default stdout)");

  // metrics
  auto* metricsCmd = app.add_subcommand("metrics", "Per-trial metrics table");
  std::vector<std::string> trialPaths, viewPaths;
  std::string metricsProfile;
  std::optional<double> epsilonZoom;
  metricsCmd->add_option("--trial", trialPaths, "Trial record (repeatable)")->required();
  metricsCmd->add_option("--views", viewPaths, "View stream matching each --trial")->required();
  metricsCmd->add_option("--profile", metricsProfile, "Calibration profile for the lean axis");
  metricsCmd->add_option("--epsilon-zoom", epsilonZoom, "Smallest zoom swing counted as a change");
  metricsCmd->add_option("-o,--out", outPath, "Results table (default stdout)");

  // stats
  auto* statsCmd = app.add_subcommand("stats", "Repeated-measures analysis of a results table");
  std::string tablePath;
  statsCmd->add_option("table", tablePath, "Results table from `metrics`")->required();
  statsCmd->add_option("-o,--out", outPath, "Report TSV (summary goes to stdout)");

  // serve
  auto* serveCmd = app.add_subcommand("serve", "Serve the live session over WebSocket");
  EngineFlags serveFlags;
  unsigned short port = 8765;
  std::string address = "127.0.0.1";
  std::vector<double> target{0.5, 0.5};
  serveFlags.attach(serveCmd);
  serveCmd->add_option("--port", port, "TCP port (0 picks a free one)");
  serveCmd->add_option("--address", address, "Listen address");
  serveCmd->add_option("--target", target, "Trial target u v")->expected(2);

  // schedule
  auto* scheduleCmd = app.add_subcommand("schedule", "Print the Q/R schedule of a mode");
  EngineFlags scheduleFlags;
  int samples = 5;
  scheduleFlags.attach(scheduleCmd);
  scheduleCmd->add_option("--samples", samples, "Evenly spaced lean samples to tabulate")->check(CLI::NonNegativeNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*calibrateCmd) {
      const auto neutral = readTrace(neutralPath);
      const auto forward = readTrace(forwardPath);
      const auto backward = readTrace(backwardPath);
      const auto profile = calibrate<double>(neutral.samples, forward.samples, backward.samples);
      writeProfile(outPath, profile);
      std::cout << "forward_limit_m=" << text::formatDouble(profile.forwardLimit)
                << " backward_limit_m=" << text::formatDouble(profile.backwardLimit) << '\n';
    } else if (*replayCmd) {
      const RunConfig config = applyFlags(baseConfig(), replayFlags);
      Engined engine(resolveEngineConfig(config), loadProfile(replayFlags.profilePath));
      const auto trace = readTrace(tracePath);
      emit(outPath, formatViewStream(replayTrace(trace, engine)));
    } else if (*synthCmd) {
      emit(outPath, formatTrace(synthesizeTrace(text::readFile(scriptPath), seed)));
    } else if (*metricsCmd) {
      if (trialPaths.size() != viewPaths.size()) {
        throw Error(ErrorCode::InvalidArgument, "each --trial needs a matching --views");
      }
      const RunConfig config = baseConfig();
      MetricsOptions options;
      options.profile = loadProfile(metricsProfile);
      options.zoomEpsilon = epsilonZoom.value_or(config.zoomEpsilon.value_or(defaultZoomEpsilon(config.engine.zoom)));
      std::vector<MetricsReport> reports;
      for (std::size_t i = 0; i < trialPaths.size(); ++i) {
        const auto trial = readTrialRecord(trialPaths[i]);
        const auto views = readViewStream(viewPaths[i]);
        try {
          reports.push_back(computeMetrics(trial, views, options));
        } catch (const Error& e) {
          throw withPath(e, viewPaths[i]);
        }
      }
      emit(outPath, formatMetricsTable(reports));
    } else if (*statsCmd) {
      const auto table = readResultsTable(tablePath);
      if (table.empty()) {
        std::cerr << "error: InsufficientData: " << tablePath << ": results table has no rows\n";
        return kExitNoData;
      }
      const auto report = analyze(table);
      if (!outPath.empty()) text::writeFile(outPath, formatReportTsv(report));
      std::cout << formatReportSummary(report);
    } else if (*serveCmd) {
      const RunConfig config = applyFlags(baseConfig(), serveFlags);
      SessionOptions options;
      options.targetUV = Vec2d(target[0], target[1]);
      Server server(Session(resolveEngineConfig(config), loadProfile(serveFlags.profilePath), options),
                    {address, port});
      activeServer = &server;
      std::signal(SIGINT, onSignal);
      std::signal(SIGTERM, onSignal);
      std::cout << "listening on ws://" << address << ':' << server.port() << std::endl;
      server.run();
      activeServer = nullptr;
    } else if (*scheduleCmd) {
      const RunConfig config = applyFlags(baseConfig(), scheduleFlags);
      const EngineConfigd engine = resolveEngineConfig(config);
      std::cout << formatSchedule(engine.schedule.value_or(builtinSchedule<double>(engine.mode)), samples);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return 0;
}
