#include "headzoom/filtering.hpp"

#include <sstream>

#include "headzoom/text.hpp"

namespace headzoom {

std::string formatSchedule(const FilterScheduled& schedule, int samples) {
  std::ostringstream out;
  out << "# filter schedule mode=" << to_string(schedule.mode) << '\n';
  out << "curve\tx\ty\n";
  for (const auto& [x, y] : schedule.qCurve.breakpoints()) {
    out << "Q\t" << text::formatDouble(x) << '\t' << text::formatDouble(y) << '\n';
  }
  for (const auto& [x, y] : schedule.rCurve.breakpoints()) {
    out << "R\t" << text::formatDouble(x) << '\t' << text::formatDouble(y) << '\n';
  }
  if (samples > 1) {
    out << "# sampled\n";
    out << "x\tQ\tR\n";
    for (int i = 0; i < samples; ++i) {
      const double x = static_cast<double>(i) / (samples - 1);
      out << text::formatDouble(x) << '\t' << text::formatDouble(evalCurve(schedule.qCurve, x)) << '\t'
          << text::formatDouble(evalCurve(schedule.rCurve, x)) << '\n';
    }
  }
  return out.str();
}

ParamCurved parseCurve(const std::string& breakpoints) {
  std::vector<ParamCurved::Breakpoint> points;
  for (auto token : text::splitWhitespace(breakpoints)) {
    const auto colon = token.find(':');
    const auto x = colon == std::string_view::npos ? std::nullopt : text::parseDouble(token.substr(0, colon));
    const auto y = colon == std::string_view::npos ? std::nullopt : text::parseDouble(token.substr(colon + 1));
    if (!x || !y) throw Error(ErrorCode::ParseError, "curve breakpoint '" + std::string(token) + "' is not x:y");
    points.emplace_back(*x, *y);
  }
  return ParamCurved(std::move(points));
}

}  // namespace headzoom
