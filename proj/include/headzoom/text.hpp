#pragma once

// Small text helpers shared by the file formats and the wire protocol.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "headzoom/error.hpp"

namespace headzoom::text {

/// Shortest decimal form that parses back to the identical double.
std::string formatDouble(double value);

std::optional<double> parseDouble(std::string_view token);
std::optional<long long> parseInt(std::string_view token);

/// Splits on any run of spaces/tabs; drops empty tokens.
std::vector<std::string_view> splitWhitespace(std::string_view line);

/// Splits on single tabs, keeping empty fields.
std::vector<std::string_view> splitTabs(std::string_view line);

std::string_view trim(std::string_view s);

std::string readFile(const std::filesystem::path& path);
void writeFile(const std::filesystem::path& path, std::string_view contents);

/// Calls `fn(lineNumber, line)` for each line, 1-based, without the trailing
/// newline (and without a trailing '\r').
template <typename Fn>
void forEachLine(std::string_view contents, Fn&& fn) {
  std::size_t lineNo = 0;
  std::size_t pos = 0;
  while (pos < contents.size()) {
    std::size_t end = contents.find('\n', pos);
    if (end == std::string_view::npos) end = contents.size();
    std::string_view line = contents.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    fn(++lineNo, line);
    pos = end + 1;
  }
}

/// Reads `path` and applies `parse` to its contents; parse errors gain the
/// path as a prefix.
template <typename Parse>
auto parseFile(const std::filesystem::path& path, Parse&& parse) {
  const std::string contents = readFile(path);
  try {
    return parse(std::string_view(contents));
  } catch (const Error& e) {
    throw withPath(e, path.string());
  }
}

}  // namespace headzoom::text
