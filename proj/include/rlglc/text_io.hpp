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

#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace rlglc::text {

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

// Locale-independent number parsing; throws ParseError carrying `line`.
double parse_double(std::string_view s, std::size_t line);
long long parse_int(std::string_view s, std::size_t line);

// Shortest representation that reads back to the same double.
std::string format_double(double v);

// True for blank lines and '#' comments.
bool skippable(std::string_view line);

struct KeyValue {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

// `key = value` lines; blank lines and '#' comments are skipped. Throws
// ParseError for a line without '=' or a repeated key.
std::vector<KeyValue> parse_key_values(std::istream& in);

}  // namespace rlglc::text
