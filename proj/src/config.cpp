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

#include "rlglc/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <ostream>

#include <fmt/format.h>

#include "rlglc/error.hpp"
#include "rlglc/ot.hpp"
#include "rlglc/text_io.hpp"

namespace rlglc {

namespace {

struct Field {
  std::function<std::string(const TrainConfig&)> get;
  std::function<void(TrainConfig&, const std::string&)> set;
};

Field real(double TrainConfig::*m) {
  return {[m](const TrainConfig& c) { return text::format_double(c.*m); },
          [m](TrainConfig& c, const std::string& v) { c.*m = text::parse_double(v, 0); }};
}

Field count(std::size_t TrainConfig::*m) {
  return {[m](const TrainConfig& c) { return std::to_string(c.*m); },
          [m](TrainConfig& c, const std::string& v) {
            const auto x = text::parse_int(v, 0);
            if (x < 0) throw ParseError(fmt::format("expected a non-negative integer, got '{}'", v), 0);
            c.*m = static_cast<std::size_t>(x);
          }};
}

Field flag(bool TrainConfig::*m) {
  return {[m](const TrainConfig& c) { return std::string(c.*m ? "true" : "false"); },
          [m](TrainConfig& c, const std::string& v) {
            if (v == "true" || v == "1") c.*m = true;
            else if (v == "false" || v == "0") c.*m = false;
            else throw ParseError(fmt::format("expected true or false, got '{}'", v), 0);
          }};
}

Field str(std::string TrainConfig::*m) {
  return {[m](const TrainConfig& c) { return c.*m; },
          [m](TrainConfig& c, const std::string& v) { c.*m = v; }};
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = {
      {"seed",
       {[](const TrainConfig& c) { return std::to_string(c.seed); },
        [](TrainConfig& c, const std::string& v) {
          const auto x = text::parse_int(v, 0);
          if (x < 0) throw ParseError(fmt::format("seed must be non-negative, got '{}'", v), 0);
          c.seed = static_cast<std::uint64_t>(x);
        }}},
      {"beta", real(&TrainConfig::beta)},
      {"alpha", real(&TrainConfig::alpha)},
      {"lambda", real(&TrainConfig::lambda)},
      {"lr", real(&TrainConfig::lr)},
      {"critic_lr", real(&TrainConfig::critic_lr)},
      {"scorer_lr", real(&TrainConfig::scorer_lr)},
      {"batch_size", count(&TrainConfig::batch_size)},
      {"epochs", count(&TrainConfig::epochs)},
      {"critic_steps", count(&TrainConfig::critic_steps)},
      {"scorer_steps", count(&TrainConfig::scorer_steps)},
      {"feature_dim", count(&TrainConfig::feature_dim)},
      {"hidden_width", count(&TrainConfig::hidden_width)},
      {"critic_width", count(&TrainConfig::critic_width)},
      {"scorer_width", count(&TrainConfig::scorer_width)},
      {"measure", str(&TrainConfig::measure)},
      {"dataset", str(&TrainConfig::dataset)},
      {"data_n", count(&TrainConfig::data_n)},
      {"rotation_deg", real(&TrainConfig::rotation_deg)},
      {"noise_sigma", real(&TrainConfig::noise_sigma)},
      {"source_ratio", real(&TrainConfig::source_ratio)},
      {"target_ratio", real(&TrainConfig::target_ratio)},
      {"shift", str(&TrainConfig::shift)},
      {"data_path", str(&TrainConfig::data_path)},
      {"use_cls", flag(&TrainConfig::use_cls)},
      {"use_global", flag(&TrainConfig::use_global)},
      {"use_local", flag(&TrainConfig::use_local)},
      {"use_reg", flag(&TrainConfig::use_reg)},
      {"global_weight", real(&TrainConfig::global_weight)},
      {"local_weight", real(&TrainConfig::local_weight)},
      {"report_path", str(&TrainConfig::report_path)},
  };
  return table;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ContractError("config: " + what);
}

}  // namespace

void TrainConfig::validate() const {
  require(beta > 0.0 && beta < 1.0, fmt::format("beta = {} not in (0, 1)", beta));
  require(alpha >= 0.0, fmt::format("alpha = {} is negative", alpha));
  require(lambda >= 0.0, fmt::format("lambda = {} is negative", lambda));
  require(lr > 0.0, "lr must be positive");
  require(critic_lr > 0.0, "critic_lr must be positive");
  require(scorer_lr > 0.0, "scorer_lr must be positive");
  require(batch_size >= 2, fmt::format("batch_size = {} < 2 leaves no negatives", batch_size));
  require(feature_dim >= 1, "feature_dim must be at least 1");
  require(hidden_width >= 1, "hidden_width must be at least 1");
  require(critic_width >= 1, "critic_width must be at least 1");
  require(global_weight >= 0.0, "global_weight is negative");
  require(local_weight >= 0.0, "local_weight is negative");
  (void)parse_measure_transform(measure);
  require(dataset == "two_moons" || dataset == "gaussian" || dataset == "file",
          fmt::format("unknown dataset '{}'", dataset));
  if (dataset == "file") require(!data_path.empty(), "dataset = file needs data_path");
  if (dataset != "file") require(data_n >= 4, fmt::format("data_n = {} < 4", data_n));
}

void TrainConfig::set(const std::string& key, const std::string& value) {
  const auto it = fields().find(key);
  if (it == fields().end()) throw ParseError(fmt::format("config: unknown key '{}'", key), 0);
  try {
    it->second.set(*this, value);
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("config: {}: {}", key, e.what()), 0);
  }
}

std::vector<std::pair<std::string, std::string>> TrainConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [key, field] : fields()) out.emplace_back(key, field.get(*this));
  return out;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string TrainConfig::hash() const {
  std::string canon;
  for (const auto& [k, v] : entries()) {
    if (k == "report_path") continue;
    canon += k + "=" + v + "\n";
  }
  return fmt::format("{:016x}", fnv1a64(canon));
}

TrainConfig parse_config(std::istream& in) {
  TrainConfig c;
  for (const auto& kv : text::parse_key_values(in)) {
    try {
      c.set(kv.key, kv.value);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), kv.line);
    }
  }
  c.validate();
  return c;
}

TrainConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open config '{}'", path));
  try {
    return parse_config(in);
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", path, e.what()), 0);
  }
}

void write_config(std::ostream& out, const TrainConfig& c) {
  for (const auto& [k, v] : c.entries()) out << k << " = " << v << '\n';
}

void apply_overrides(TrainConfig& c, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ParseError(fmt::format("override '{}' is not key=value", o), 0);
    c.set(std::string(text::trim(std::string_view(o).substr(0, eq))),
          std::string(text::trim(std::string_view(o).substr(eq + 1))));
  }
  c.validate();
}

}  // namespace rlglc
