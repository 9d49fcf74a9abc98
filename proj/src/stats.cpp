#include "headzoom/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "headzoom/error.hpp"
#include "headzoom/text.hpp"

namespace headzoom {

namespace {

// Modified Lentz evaluation of the incomplete beta continued fraction.
double betaContinuedFraction(double a, double b, double x) {
  constexpr int kMaxIterations = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

double mean(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

double sampleSd(std::span<const double> v, double mu) {
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::vector<double> differences(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::InvalidArgument, "paired samples differ in length");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

constexpr std::string_view kIdColumns[] = {"participant", "mode", "image", "outcome"};

using CellKey = std::pair<std::string, Mode>;

/// participant -> mode -> averaged value for one metric.
std::map<std::string, std::map<Mode, double>> cells(const MetricTable& table, const std::string& metric) {
  std::map<CellKey, std::pair<double, int>> sums;
  for (const auto& row : table.rows) {
    if (row.metric != metric) continue;
    auto& [sum, count] = sums[{row.participant, row.mode}];
    sum += row.value;
    ++count;
  }
  std::map<std::string, std::map<Mode, double>> out;
  for (const auto& [key, acc] : sums) out[key.first][key.second] = acc.first / acc.second;
  return out;
}

std::string fmt(double v, int precision = 6) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream ss;
  ss.precision(precision);
  ss << v;
  return ss.str();
}

std::string pairName(Mode a, Mode b) { return std::string(to_string(a)) + "-" + std::string(to_string(b)); }

}  // namespace

double regularizedIncompleteBeta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw Error(ErrorCode::InvalidArgument, "incomplete beta needs a, b > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double logFront =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(logFront);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betaContinuedFraction(a, b, x) / a;
  return 1.0 - front * betaContinuedFraction(b, a, 1.0 - x) / b;
}

double studentTTwoSided(double t, double df) {
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return 0.0;
  return regularizedIncompleteBeta(0.5 * df, 0.5, df / (df + t * t));
}

double studentTCdf(double t, double df) {
  const double tail = 0.5 * studentTTwoSided(t, df);
  return t > 0.0 ? 1.0 - tail : tail;
}

double fUpperTail(double f, double df1, double df2) {
  if (!(f > 0.0)) return 1.0;
  if (std::isinf(f)) return 0.0;
  return regularizedIncompleteBeta(0.5 * df2, 0.5 * df1, df2 / (df2 + df1 * f));
}

void MetricTable::add(std::string participant, Mode mode, std::string metric, double value) {
  rows.push_back({std::move(participant), mode, std::move(metric), value});
}

std::vector<std::string> MetricTable::metrics() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& row : rows) {
    if (seen.insert(row.metric).second) out.push_back(row.metric);
  }
  return out;
}

MetricTable parseResultsTable(std::string_view contents) {
  MetricTable table;
  std::vector<std::string> header;
  text::forEachLine(contents, [&](std::size_t lineNo, std::string_view line) {
    if (text::trim(line).empty() || line.front() == '#') return;
    const auto fields = text::splitTabs(line);
    if (header.empty()) {
      for (std::size_t i = 0; i < std::size(kIdColumns); ++i) {
        if (i >= fields.size() || fields[i] != kIdColumns[i]) {
          throw LineError(ErrorCode::ParseError, lineNo, "results table must start with participant, mode, image, outcome");
        }
      }
      for (auto f : fields) header.emplace_back(f);
      return;
    }
    if (fields.size() != header.size()) {
      throw LineError(ErrorCode::ParseError, lineNo, "expected " + std::to_string(header.size()) + " fields");
    }
    const auto mode = parseMode(fields[1]);
    if (!mode) throw LineError(ErrorCode::ParseError, lineNo, "unknown mode '" + std::string(fields[1]) + "'");
    for (std::size_t i = std::size(kIdColumns); i < fields.size(); ++i) {
      if (fields[i] == "NA" || fields[i].empty()) continue;
      const auto v = text::parseDouble(fields[i]);
      if (!v) throw LineError(ErrorCode::ParseError, lineNo, "bad number '" + std::string(fields[i]) + "'");
      table.add(std::string(fields[0]), *mode, header[i], *v);
    }
  });
  return table;
}

MetricTable readResultsTable(const std::filesystem::path& path) { return text::parseFile(path, parseResultsTable); }

AnovaResult rmAnova(std::span<const double> values, std::size_t n, std::size_t k) {
  if (n < 2 || k < 2) throw Error(ErrorCode::InsufficientData, "ANOVA needs at least two participants and two modes");
  if (values.size() != n * k) throw Error(ErrorCode::InvalidArgument, "value matrix size mismatch");

  const double grand = mean(values);
  double ssTotal = 0.0;
  for (double v : values) ssTotal += (v - grand) * (v - grand);

  double ssSubjects = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double m = mean(values.subspan(i * k, k));
    ssSubjects += static_cast<double>(k) * (m - grand) * (m - grand);
  }

  AnovaResult r;
  r.participants = n;
  double ssModes = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += values[i * k + j];
    const double m = sum / static_cast<double>(n);
    r.modeMeans.push_back(m);
    ssModes += static_cast<double>(n) * (m - grand) * (m - grand);
  }
  const double ssError = std::max(0.0, ssTotal - ssSubjects - ssModes);

  r.dfBetween = static_cast<double>(k - 1);
  r.dfWithin = static_cast<double>((n - 1) * (k - 1));
  // Relative threshold: subtracting the subject and mode sums leaves rounding residue.
  const double noise = 1e-12 * std::max(ssTotal, 1e-300);
  if (ssModes <= noise) {
    r.fStatistic = 0.0;
    r.pValue = 1.0;
    r.etaSquared = 0.0;
  } else if (ssError <= noise) {
    r.fStatistic = std::numeric_limits<double>::infinity();
    r.pValue = 0.0;
    r.etaSquared = 1.0;
  } else {
    r.fStatistic = (ssModes / r.dfBetween) / (ssError / r.dfWithin);
    r.pValue = fUpperTail(r.fStatistic, r.dfBetween, r.dfWithin);
    r.etaSquared = ssModes / (ssModes + ssError);
  }
  return r;
}

AnovaResult rmAnova(const MetricTable& table, const std::string& metric) {
  const auto byParticipant = cells(table, metric);
  std::set<Mode> present;
  for (const auto& [p, modes] : byParticipant) {
    for (const auto& [m, v] : modes) present.insert(m);
  }
  const std::vector<Mode> modes(present.begin(), present.end());

  std::vector<double> values;
  std::size_t complete = 0;
  for (const auto& [p, byMode] : byParticipant) {
    if (byMode.size() != modes.size()) continue;
    for (Mode m : modes) values.push_back(byMode.at(m));
    ++complete;
  }
  if (complete < 2 || modes.size() < 2) {
    throw Error(ErrorCode::InsufficientData, "metric '" + metric + "' lacks two complete participants over two modes");
  }
  AnovaResult r = rmAnova(values, complete, modes.size());
  r.modes = modes;
  return r;
}

std::string_view to_string(EffectBand band) {
  switch (band) {
    case EffectBand::Negligible: return "negligible";
    case EffectBand::Small: return "small";
    case EffectBand::Medium: return "medium";
    case EffectBand::Large: return "large";
  }
  return "negligible";
}

EffectBand effectBand(double d) {
  const double magnitude = std::abs(d);
  if (magnitude < 0.2) return EffectBand::Negligible;
  if (magnitude < 0.5) return EffectBand::Small;
  if (magnitude < 0.8) return EffectBand::Medium;
  return EffectBand::Large;
}

EffectSize cohensD(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2) throw Error(ErrorCode::InsufficientData, "Cohen's d needs at least two pairs");
  const auto diff = differences(a, b);
  const double mu = mean(diff);
  const double sd = sampleSd(diff, mu);
  if (sd == 0.0) {
    if (mu == 0.0) return {0.0, EffectBand::Negligible};
    throw Error(ErrorCode::ZeroVariance, "differences are constant and nonzero");
  }
  const double d = mu / sd;
  return {d, effectBand(d)};
}

PairedTestResult pairedTTest(std::span<const double> a, std::span<const double> b, double alphaCorrected) {
  if (a.size() < 2) throw Error(ErrorCode::InsufficientData, "paired t-test needs at least two pairs");
  const auto diff = differences(a, b);
  PairedTestResult r;
  r.n = diff.size();
  r.alpha = alphaCorrected;
  r.df = static_cast<double>(r.n - 1);
  r.meanDifference = mean(diff);
  const double sd = sampleSd(diff, r.meanDifference);
  if (sd == 0.0) {
    if (r.meanDifference != 0.0) throw Error(ErrorCode::PerfectSeparation, "differences are constant and nonzero");
    r.tStatistic = 0.0;
    r.pValue = 1.0;
    r.effect = {0.0, EffectBand::Negligible};
    r.significantAfterCorrection = false;
    return r;
  }
  r.tStatistic = r.meanDifference / (sd / std::sqrt(static_cast<double>(r.n)));
  r.pValue = studentTTwoSided(r.tStatistic, r.df);
  r.effect = {r.meanDifference / sd, effectBand(r.meanDifference / sd)};
  r.significantAfterCorrection = r.pValue <= alphaCorrected;
  return r;
}

PairedTestResult pairwiseT(const MetricTable& table, const std::string& metric, Mode modeA, Mode modeB,
                           double alphaCorrected) {
  std::vector<double> a;
  std::vector<double> b;
  for (const auto& [p, byMode] : cells(table, metric)) {
    const auto ia = byMode.find(modeA);
    const auto ib = byMode.find(modeB);
    if (ia == byMode.end() || ib == byMode.end()) continue;
    a.push_back(ia->second);
    b.push_back(ib->second);
  }
  PairedTestResult r = pairedTTest(a, b, alphaCorrected);
  r.modeA = modeA;
  r.modeB = modeB;
  return r;
}

Significance significanceBucket(double p) {
  if (p <= 0.01) return Significance::High;
  if (p <= 0.05) return Significance::Moderate;
  return Significance::None;
}

std::string_view to_string(Significance s) {
  switch (s) {
    case Significance::High: return "high significance";
    case Significance::Moderate: return "moderate significance";
    case Significance::None: return "not significant";
  }
  return "not significant";
}

AnalysisReport analyze(const MetricTable& table) {
  AnalysisReport report;
  auto metrics = table.metrics();
  std::sort(metrics.begin(), metrics.end());
  for (const auto& metric : metrics) {
    MetricAnalysis analysis;
    analysis.metric = metric;
    try {
      analysis.anova = rmAnova(table, metric);
    } catch (const Error& e) {
      analysis.note = e.what();
    }
    if (analysis.significant()) {
      const auto& modes = analysis.anova->modes;
      for (std::size_t i = 0; i < modes.size(); ++i) {
        for (std::size_t j = i + 1; j < modes.size(); ++j) {
          PairwiseEntry entry{modes[i], modes[j], std::nullopt, {}};
          try {
            entry.result = pairwiseT(table, metric, modes[i], modes[j]);
          } catch (const Error& e) {
            entry.note = e.what();
          }
          analysis.pairwise.push_back(std::move(entry));
        }
      }
    }
    report.metrics.push_back(std::move(analysis));
  }
  return report;
}

std::string formatReportTsv(const AnalysisReport& report) {
  std::ostringstream out;
  out << "metric\ttest\tcomparison\tstatistic\tdf1\tdf2\tp_value\teffect\tband\tsignificant\tbucket\tnote\n";
  for (const auto& m : report.metrics) {
    if (!m.anova) {
      out << m.metric << "\tanova\t\t\t\t\t\t\t\t\t\t" << m.note << '\n';
      continue;
    }
    const auto& a = *m.anova;
    std::string modes;
    for (Mode mode : a.modes) modes += (modes.empty() ? "" : "|") + std::string(to_string(mode));
    out << m.metric << "\tanova\t" << modes << '\t' << fmt(a.fStatistic) << '\t' << fmt(a.dfBetween) << '\t'
        << fmt(a.dfWithin) << '\t' << fmt(a.pValue) << '\t' << fmt(a.etaSquared) << "\t\t"
        << (m.significant() ? "yes" : "no") << '\t' << to_string(significanceBucket(a.pValue)) << "\t\n";
    for (const auto& entry : m.pairwise) {
      out << m.metric << "\tpaired_t\t" << pairName(entry.modeA, entry.modeB) << '\t';
      if (!entry.result) {
        out << "\t\t\t\t\t\t\t\t" << entry.note << '\n';
        continue;
      }
      const auto& r = *entry.result;
      out << fmt(r.tStatistic) << '\t' << fmt(r.df) << "\t\t" << fmt(r.pValue) << '\t' << fmt(r.effect.d) << '\t'
          << to_string(r.effect.band) << '\t' << (r.significantAfterCorrection ? "yes" : "no") << '\t'
          << to_string(significanceBucket(r.pValue)) << "\t\n";
    }
  }
  return out.str();
}

std::string formatReportSummary(const AnalysisReport& report) {
  std::ostringstream out;
  out << "Repeated-measures ANOVA per metric (alpha " << fmt(kAlpha) << "); pairwise paired t-tests at alpha "
      << fmt(kBonferroniAlpha) << " (0.05/" << kPairwiseComparisons << ").\n";
  for (const auto& m : report.metrics) {
    out << '\n' << m.metric << ": ";
    if (!m.anova) {
      out << "not tested (" << m.note << ")\n";
      continue;
    }
    const auto& a = *m.anova;
    out << "F(" << fmt(a.dfBetween) << "," << fmt(a.dfWithin) << ") = " << fmt(a.fStatistic, 4)
        << ", p = " << fmt(a.pValue, 4) << ", eta2 = " << fmt(a.etaSquared, 3) << " ["
        << to_string(significanceBucket(a.pValue)) << "]\n";
    for (const auto& entry : m.pairwise) {
      out << "  " << pairName(entry.modeA, entry.modeB) << ": ";
      if (!entry.result) {
        out << entry.note << '\n';
        continue;
      }
      const auto& r = *entry.result;
      out << "t(" << fmt(r.df) << ") = " << fmt(r.tStatistic, 4) << ", p = " << fmt(r.pValue, 4)
          << (r.significantAfterCorrection ? " significant" : " not significant") << ", d = " << fmt(r.effect.d, 3)
          << " (" << to_string(r.effect.band) << ")\n";
    }
  }
  return out.str();
}

}  // namespace headzoom
