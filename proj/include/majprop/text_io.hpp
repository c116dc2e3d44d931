// Copyright 2026 The majprop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "majprop/errors.hpp"

namespace majprop::detail {

/// Non-empty, comment-stripped line with its 1-based source line number.
struct SourceLine {
  int number = 0;
  std::string_view text;
};

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

/// Splits text into lines, dropping '#' comments and blank lines.
inline std::vector<SourceLine> content_lines(std::string_view text) {
  std::vector<SourceLine> out;
  int number = 0;
  while (!text.empty()) {
    ++number;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (!line.empty()) out.push_back({number, line});
  }
  return out;
}

/// Splits on runs of blanks, keeping bracketed groups ("[1, 2]") whole.
inline std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    int depth = 0;
    while (j < line.size() && (depth > 0 || (line[j] != ' ' && line[j] != '\t'))) {
      if (line[j] == '[') ++depth;
      if (line[j] == ']') --depth;
      ++j;
    }
    out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

[[noreturn]] inline void fail_at(std::string_view source, int line, const std::string& message) {
  throw InputError(std::string(source) + ":" + std::to_string(line) + ": " + message);
}

inline bool parse_double(std::string_view token, double& value) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  return ec == std::errc{} && ptr == end;
}

inline bool parse_int(std::string_view token, long long& value) {
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  return ec == std::errc{} && ptr == end;
}

/// Round-trip formatting (17 significant digits).
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Reads the "modes N" header that every text format starts with.
inline int header_modes(std::string_view text, std::string_view source) {
  const auto lines = content_lines(text);
  if (lines.empty()) fail_at(source, 1, "empty input, expected 'modes N'");
  const auto tok = tokens(lines.front().text);
  long long n = 0;
  if (tok.size() != 2 || tok[0] != "modes" || !parse_int(tok[1], n) || n < 1) {
    fail_at(source, lines.front().number, "expected header 'modes N' with N >= 1");
  }
  return static_cast<int>(n);
}

}  // namespace majprop::detail
