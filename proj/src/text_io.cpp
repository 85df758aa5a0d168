// Copyright 2026 The RLGLC Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rlglc/text_io.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <set>

#include <fmt/format.h>

#include "rlglc/error.hpp"

namespace rlglc::text {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(trim(s.substr(start)));
      return parts;
    }
    parts.push_back(trim(s.substr(start, pos - start)));
    start = pos + 1;
  }
}

double parse_double(std::string_view s, std::size_t line) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ParseError(fmt::format("not a number: '{}'", s), line);
  }
  if (!std::isfinite(v)) throw ParseError(fmt::format("non-finite number: '{}'", s), line);
  return v;
}

long long parse_int(std::string_view s, std::size_t line) {
  s = trim(s);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ParseError(fmt::format("not an integer: '{}'", s), line);
  }
  return v;
}

std::string format_double(double v) { return fmt::format("{}", v); }

bool skippable(std::string_view line) {
  line = trim(line);
  return line.empty() || line.front() == '#';
}

std::vector<KeyValue> parse_key_values(std::istream& in) {
  std::vector<KeyValue> out;
  std::set<std::string, std::less<>> seen;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (skippable(raw)) continue;
    const auto eq = raw.find('=');
    if (eq == std::string::npos) throw ParseError(fmt::format("expected key = value, got '{}'", trim(raw)), lineno);
    std::string key(trim(std::string_view(raw).substr(0, eq)));
    std::string value(trim(std::string_view(raw).substr(eq + 1)));
    if (key.empty()) throw ParseError("empty key", lineno);
    if (!seen.insert(key).second) throw ParseError(fmt::format("duplicate key '{}'", key), lineno);
    out.push_back({std::move(key), std::move(value), lineno});
  }
  return out;
}

}  // namespace rlglc::text
