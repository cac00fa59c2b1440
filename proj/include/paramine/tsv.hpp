#pragma once

#include <charconv>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "paramine/error.hpp"

#ifndef PARAMINE_VERSION
#define PARAMINE_VERSION "0.1.0"
#endif

namespace paramine {

inline constexpr std::string_view kBuildId = PARAMINE_VERSION;

// Every file this project writes starts with one header line:
//   ##paramine <build-id>[<TAB>key=value]...
// Readers skip such lines wherever they appear.
inline constexpr std::string_view kHeaderPrefix = "##paramine";

inline bool is_header_line(std::string_view line) {
  return line.substr(0, kHeaderPrefix.size()) == kHeaderPrefix &&
         (line.size() == kHeaderPrefix.size() ||
          line[kHeaderPrefix.size()] == ' ');
}

inline std::string header_line(
    const std::vector<std::pair<std::string, std::string>>& meta = {}) {
  std::string out(kHeaderPrefix);
  out += ' ';
  out += kBuildId;
  for (const auto& [k, v] : meta) {
    out += '\t';
    out += k;
    out += '=';
    out += v;
  }
  return out;
}

/// Key/value metadata of a header line; empty for non-header lines.
inline std::map<std::string, std::string> header_meta(std::string_view line) {
  std::map<std::string, std::string> meta;
  if (!is_header_line(line)) return meta;
  std::size_t pos = line.find('\t');
  while (pos != std::string_view::npos) {
    std::size_t next = line.find('\t', pos + 1);
    auto field = line.substr(pos + 1, next == std::string_view::npos
                                          ? std::string_view::npos
                                          : next - pos - 1);
    auto eq = field.find('=');
    if (eq != std::string_view::npos)
      meta.emplace(std::string(field.substr(0, eq)),
                   std::string(field.substr(eq + 1)));
    pos = next;
  }
  return meta;
}

inline std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

inline std::vector<std::string> split_list(std::string_view s, char sep = ',') {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto pos = s.find(sep, start);
    auto item = s.substr(start, pos == std::string_view::npos ? std::string_view::npos
                                                              : pos - start);
    if (!item.empty()) out.emplace_back(item);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

/// getline that also drops a trailing CR.
inline bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

template <typename Int>
std::optional<Int> parse_int(std::string_view s) {
  Int value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
    return std::nullopt;
  return value;
}

inline std::optional<double> parse_double(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::string tmp(s);
  char* end = nullptr;
  double v = std::strtod(tmp.c_str(), &end);
  if (end != tmp.c_str() + tmp.size()) return std::nullopt;
  return v;
}

template <typename Int>
Int require_int(std::string_view s, std::string_view what) {
  auto v = parse_int<Int>(s);
  if (!v) throw Error("malformed " + std::string(what) + ": '" + std::string(s) + "'");
  return *v;
}

inline double require_double(std::string_view s, std::string_view what) {
  auto v = parse_double(s);
  if (!v) throw Error("malformed " + std::string(what) + ": '" + std::string(s) + "'");
  return *v;
}

/// Shortest text that round-trips the double exactly.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw Error("cannot format double");
  return std::string(buf, ptr);
}

inline std::string format_fraction(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace paramine
