#pragma once

// Within-subject comparison of the interaction modes: repeated-measures
// ANOVA per metric, Bonferroni-corrected paired t-tests and paired Cohen's d.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "headzoom/mode.hpp"

namespace headzoom {

inline constexpr double kAlpha = 0.05;
inline constexpr int kPairwiseComparisons = 3;
inline constexpr double kBonferroniAlpha = kAlpha / kPairwiseComparisons;

/// Regularized incomplete beta I_x(a, b), by continued fraction.
double regularizedIncompleteBeta(double a, double b, double x);

/// P(T <= t) for Student's t with `df` degrees of freedom.
double studentTCdf(double t, double df);
/// Two-sided p-value P(|T| >= |t|).
double studentTTwoSided(double t, double df);
/// Upper tail P(F >= f) of the F distribution.
double fUpperTail(double f, double df1, double df2);

struct MetricRow {
  std::string participant;
  Mode mode{Mode::Static};
  std::string metric;
  double value{0.0};
};

/// Long-format table. Repeated (participant, mode, metric) rows, e.g. one
/// per image difficulty, are averaged into a single cell before testing.
struct MetricTable {
  std::vector<MetricRow> rows;

  void add(std::string participant, Mode mode, std::string metric, double value);
  std::vector<std::string> metrics() const;
  bool empty() const { return rows.empty(); }
};

/// Melts the metrics results table: every column after the four identifier
/// columns becomes a metric; `NA` cells are skipped.
MetricTable parseResultsTable(std::string_view contents);
MetricTable readResultsTable(const std::filesystem::path& path);

struct AnovaResult {
  double fStatistic{0.0};
  double dfBetween{0.0};
  double dfWithin{0.0};
  double pValue{1.0};
  /// Partial eta squared, SS_modes / (SS_modes + SS_error).
  double etaSquared{0.0};
  std::size_t participants{0};
  std::vector<Mode> modes;
  std::vector<double> modeMeans;
};

/// One-factor within-subject ANOVA. Participants missing any mode are
/// dropped. Throws InsufficientData for fewer than two complete participants
/// or two modes.
AnovaResult rmAnova(const MetricTable& table, const std::string& metric);

/// Same test on an explicit participants x modes matrix (row-major).
AnovaResult rmAnova(std::span<const double> values, std::size_t participants, std::size_t modes);

enum class EffectBand { Negligible, Small, Medium, Large };

std::string_view to_string(EffectBand band);

/// Bands on |d|: < 0.2, [0.2, 0.5), [0.5, 0.8), >= 0.8.
EffectBand effectBand(double d);

struct EffectSize {
  double d{0.0};
  EffectBand band{EffectBand::Negligible};
};

/// Paired d = mean(a - b) / sd(a - b). Identical samples give d = 0; a
/// nonzero constant difference throws ZeroVariance.
EffectSize cohensD(std::span<const double> a, std::span<const double> b);

struct PairedTestResult {
  Mode modeA{Mode::Static};
  Mode modeB{Mode::Parallel};
  std::size_t n{0};
  double meanDifference{0.0};
  double tStatistic{0.0};
  double df{0.0};
  double pValue{1.0};
  double alpha{kBonferroniAlpha};
  EffectSize effect{};
  bool significantAfterCorrection{false};
};

/// Two-sided paired t-test of a - b. Throws InsufficientData for n < 2 and
/// PerfectSeparation when the differences are a nonzero constant.
PairedTestResult pairedTTest(std::span<const double> a, std::span<const double> b,
                             double alphaCorrected = kBonferroniAlpha);

PairedTestResult pairwiseT(const MetricTable& table, const std::string& metric, Mode modeA, Mode modeB,
                           double alphaCorrected = kBonferroniAlpha);

/// Colour buckets of the summary: p <= 0.01 high, p <= 0.05 moderate.
enum class Significance { High, Moderate, None };

Significance significanceBucket(double p);
std::string_view to_string(Significance s);

struct PairwiseEntry {
  Mode modeA{Mode::Static};
  Mode modeB{Mode::Parallel};
  std::optional<PairedTestResult> result;
  std::string note;
};

struct MetricAnalysis {
  std::string metric;
  std::optional<AnovaResult> anova;
  std::string note;
  std::vector<PairwiseEntry> pairwise;

  bool significant() const { return anova && anova->pValue <= kAlpha; }
};

struct AnalysisReport {
  std::vector<MetricAnalysis> metrics;

  bool empty() const { return metrics.empty(); }
};

/// ANOVA for every metric; metrics significant at 0.05 also get every
/// pairwise paired t-test with effect sizes.
AnalysisReport analyze(const MetricTable& table);

std::string formatReportTsv(const AnalysisReport& report);
std::string formatReportSummary(const AnalysisReport& report);

}  // namespace headzoom
