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

#include "rlglc/evalstats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "rlglc/error.hpp"
#include "rlglc/text_io.hpp"

namespace rlglc {

double accuracy(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) {
    throw ContractError(fmt::format("accuracy: {} predictions for {} labels", predictions.size(), labels.size()));
  }
  if (labels.empty()) throw ContractError("accuracy: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += predictions[i] == labels[i];
  return 100.0 * static_cast<double>(hits) / static_cast<double>(labels.size());
}

double threshold_th(double x, std::size_t classes) {
  if (classes < 2) throw ContractError("threshold_th: need at least two classes");
  const double cap = 1.0 - 1.0 / static_cast<double>(classes);
  return std::min(std::max(x, 0.0), cap);
}

void BoundInputs::validate() const {
  const auto check = [](double v, const char* name) {
    if (!std::isfinite(v)) throw ContractError(fmt::format("bound inputs: {} is not finite", name));
    if (v < 0.0) throw ContractError(fmt::format("bound inputs: {} = {} is negative", name, v));
  };
  check(label_entropy, "label_entropy");
  check(source_given_target, "source_given_target");
  check(target_given_source, "target_given_source");
  check(cross_given_source, "cross_given_source");
  check(cross_given_target, "cross_given_target");
  check(delta, "delta");
  if (classes < 2) throw ContractError("bound inputs: classes must be at least 2");
}

std::array<double, 4> BoundInputs::terms() const {
  return {source_given_target, target_given_source, cross_given_source, cross_given_target + delta};
}

BayesBounds bayes_bound(const BoundInputs& in) {
  in.validate();
  const auto bound = [&](double term) {
    return threshold_th(1.0 - std::exp(-in.label_entropy + term), in.classes);
  };
  BayesBounds out;
  const auto terms = in.terms();
  for (std::size_t k = 0; k < terms.size(); ++k) out.individual[k] = bound(terms[k]);
  out.unified = bound(*std::min_element(terms.begin(), terms.end()));
  return out;
}

BoundInputs parse_bound_inputs(std::istream& in) {
  BoundInputs b;
  const std::map<std::string, double*, std::less<>> fields = {
      {"label_entropy", &b.label_entropy},
      {"source_given_target", &b.source_given_target},
      {"target_given_source", &b.target_given_source},
      {"cross_given_source", &b.cross_given_source},
      {"cross_given_target", &b.cross_given_target},
      {"delta", &b.delta},
  };
  for (const auto& kv : text::parse_key_values(in)) {
    if (kv.key == "classes") {
      const auto c = text::parse_int(kv.value, kv.line);
      if (c < 2) throw ContractError(fmt::format("bound inputs: classes = {} (line {})", c, kv.line));
      b.classes = static_cast<std::size_t>(c);
      continue;
    }
    const auto it = fields.find(kv.key);
    if (it == fields.end()) throw ParseError(fmt::format("unknown key '{}'", kv.key), kv.line);
    *it->second = text::parse_double(kv.value, kv.line);
  }
  b.validate();
  return b;
}

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path));
  return in;
}

struct RawTable {
  std::vector<std::string> header;
  std::vector<std::string> names;
  std::vector<std::vector<double>> rows;
};

RawTable parse_raw_table(std::istream& in) {
  RawTable t;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (text::skippable(raw)) continue;
    const auto fields = text::split(raw, ',');
    if (t.header.empty()) {
      if (fields.size() < 2) throw ParseError("table header needs a name column and one value column", lineno);
      for (std::size_t k = 1; k < fields.size(); ++k) t.header.emplace_back(fields[k]);
      continue;
    }
    if (fields.size() != t.header.size() + 1) {
      throw ParseError(fmt::format("expected {} fields, got {}", t.header.size() + 1, fields.size()), lineno);
    }
    if (fields[0].empty()) throw ParseError("empty method name", lineno);
    t.names.emplace_back(fields[0]);
    std::vector<double> row;
    row.reserve(t.header.size());
    for (std::size_t k = 1; k < fields.size(); ++k) row.push_back(text::parse_double(fields[k], lineno));
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty() || t.rows.empty()) throw ContractError("table has no rows");
  return t;
}

Tensor to_tensor(const std::vector<std::vector<double>>& rows, std::size_t cols) {
  Tensor m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

std::vector<double> row_means(const Tensor& m) {
  std::vector<double> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j);
    out[i] = s / static_cast<double>(m.cols());
  }
  return out;
}

}  // namespace

void AccuracyTable::validate() const {
  if (methods.size() < 2) throw ContractError("accuracy table: need at least two methods");
  if (tasks.empty()) throw ContractError("accuracy table: need at least one task");
  if (values.rows() != methods.size() || values.cols() != tasks.size()) {
    throw DimensionError(fmt::format("accuracy table: values {} for {} methods x {} tasks", values.shape_string(),
                                     methods.size(), tasks.size()));
  }
  for (std::size_t i = 0; i < values.rows(); ++i) {
    for (std::size_t j = 0; j < values.cols(); ++j) {
      const double v = values(i, j);
      if (!(v >= 0.0 && v <= 100.0)) {
        throw ContractError(fmt::format("accuracy table: {} on {} = {} outside [0, 100]", methods[i], tasks[j], v));
      }
    }
  }
}

void RankTable::validate() const {
  if (ranks.rows() != methods.size() || ranks.cols() != tasks.size()) {
    throw DimensionError("rank table: shape does not match names");
  }
  if (averages.size() != methods.size()) throw DimensionError("rank table: one average per method required");
  for (const double r : ranks.values()) {
    if (!(r >= 1.0)) throw ContractError(fmt::format("rank table: rank {} below 1", r));
  }
}

AccuracyTable parse_accuracy_table(std::istream& in) {
  auto raw = parse_raw_table(in);
  AccuracyTable t{raw.names, raw.header, to_tensor(raw.rows, raw.header.size())};
  t.validate();
  return t;
}

AccuracyTable read_accuracy_table(const std::string& path) {
  auto in = open_input(path);
  try {
    return parse_accuracy_table(in);
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", path, e.what()), 0);
  }
}

RankTable parse_rank_table(std::istream& in) {
  auto raw = parse_raw_table(in);
  RankTable t;
  t.methods = raw.names;
  std::size_t cols = raw.header.size();
  if (raw.header.back() == "R_j") {
    --cols;
    std::vector<double> published;
    for (const auto& row : raw.rows) published.push_back(row.back());
    t.published_averages = std::move(published);
  }
  if (cols == 0) throw ContractError("rank table: no task columns");
  t.tasks.assign(raw.header.begin(), raw.header.begin() + static_cast<std::ptrdiff_t>(cols));
  t.ranks = to_tensor(raw.rows, cols);
  t.averages = row_means(t.ranks);
  t.validate();
  return t;
}

RankTable read_rank_table(const std::string& path) {
  auto in = open_input(path);
  try {
    return parse_rank_table(in);
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", path, e.what()), 0);
  }
}

void write_rank_table(std::ostream& out, const RankTable& t) {
  out << "Method";
  for (const auto& task : t.tasks) out << ',' << task;
  out << ",R_j\n";
  for (std::size_t i = 0; i < t.methods.size(); ++i) {
    out << t.methods[i];
    for (std::size_t j = 0; j < t.tasks.size(); ++j) out << ',' << text::format_double(t.ranks(i, j));
    out << ',' << fmt::format("{:.4f}", t.averages[i]) << '\n';
  }
}

RankTable competition_ranks(const AccuracyTable& table, TieMode mode) {
  table.validate();
  const std::size_t m = table.methods.size();
  RankTable out;
  out.methods = table.methods;
  out.tasks = table.tasks;
  out.ranks = Tensor(m, table.tasks.size());
  for (std::size_t j = 0; j < table.tasks.size(); ++j) {
    for (std::size_t i = 0; i < m; ++i) {
      std::size_t better = 0, tied = 0;
      for (std::size_t k = 0; k < m; ++k) {
        better += table.values(k, j) > table.values(i, j);
        tied += table.values(k, j) == table.values(i, j);
      }
      double r = 1.0 + static_cast<double>(better);
      if (mode == TieMode::Average) r += 0.5 * static_cast<double>(tied - 1);
      out.ranks(i, j) = r;
    }
  }
  out.averages = row_means(out.ranks);
  return out;
}

double friedman_chi2(const RankTable& ranks, const FriedmanOptions& opts, std::vector<double>* averages_used) {
  ranks.validate();
  const std::size_t m = ranks.methods.size();
  const std::size_t n = ranks.tasks.size();
  if (m < 2) throw ContractError("friedman: need at least two methods");
  if (n < 2) throw ContractError("friedman: need at least two tasks");
  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(n);
  if (averages_used) averages_used->resize(m);
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) total += ranks.ranks(i, j);
    // A single division keeps exact half-way cases exact for nearbyint.
    const double r = opts.round_averages ? std::nearbyint(10.0 * total / nd) / 10.0 : total / nd;
    if (averages_used) (*averages_used)[i] = r;
    sum_sq += r * r;
  }
  return 12.0 * nd / (md * (md + 1.0)) * (sum_sq - md * (md + 1.0) * (md + 1.0) / 4.0);
}

FriedmanResult friedman(const RankTable& ranks, const FriedmanOptions& opts) {
  FriedmanResult res;
  res.chi2 = friedman_chi2(ranks, opts, &res.averages_used);
  const std::size_t m = ranks.methods.size();
  const std::size_t n = ranks.tasks.size();
  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(n);
  const double denom = nd * (md - 1.0) - res.chi2;
  if (std::abs(denom) <= 1e-12 * nd * md) {
    throw DomainError(fmt::format("friedman: F statistic undefined, chi2 = {} equals n(m-1)", res.chi2));
  }
  res.ff = (nd - 1.0) * res.chi2 / denom;
  res.dof_methods = m - 1;
  res.dof_error = (m - 1) * (n - 1);
  return res;
}

namespace {

using nlohmann::json;

double finite_metric(double v, const std::string& name) {
  if (!std::isfinite(v)) throw ContractError(fmt::format("report: metric '{}' is {}", name, v));
  return v;
}

template <class T>
T get_field(const json& j, const char* key) {
  if (!j.contains(key)) throw ParseError(fmt::format("report: missing key '{}'", key), 0);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("report: bad value for '{}': {}", key, e.what()), 0);
  }
}

}  // namespace

std::string report_to_string(const ExperimentReport& r) {
  json doc;
  doc["config_hash"] = r.config_hash;
  doc["seed"] = r.seed;
  doc["config"] = json::object();
  for (const auto& [k, v] : r.config) doc["config"][k] = v;
  doc["per_epoch"] = json::array();
  for (const auto& e : r.per_epoch) {
    const std::string at = fmt::format("per_epoch[{}].", e.epoch);
    doc["per_epoch"].push_back({
        {"epoch", e.epoch},
        {"source_acc", finite_metric(e.source_acc, at + "source_acc")},
        {"target_acc", finite_metric(e.target_acc, at + "target_acc")},
        {"gcm_value", finite_metric(e.gcm_value, at + "gcm_value")},
        {"cnce_value", finite_metric(e.cnce_value, at + "cnce_value")},
        {"cls_loss", finite_metric(e.cls_loss, at + "cls_loss")},
    });
  }
  const auto& b = r.bound_inputs;
  doc["final"] = {
      {"target_acc", finite_metric(r.final_target_acc, "final.target_acc")},
      {"bound_inputs",
       {
           {"label_entropy", finite_metric(b.label_entropy, "bound_inputs.label_entropy")},
           {"cross_given_target", finite_metric(b.cross_given_target, "bound_inputs.cross_given_target")},
           {"delta", finite_metric(b.delta, "bound_inputs.delta")},
           {"classes", b.classes},
       }},
  };
  return doc.dump(2) + "\n";
}

ExperimentReport parse_report(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("report: {}", e.what()), 0);
  }
  ExperimentReport r;
  r.config_hash = get_field<std::string>(doc, "config_hash");
  r.seed = get_field<std::uint64_t>(doc, "seed");
  if (doc.contains("config")) r.config = get_field<std::map<std::string, std::string>>(doc, "config");
  for (const auto& e : get_field<json>(doc, "per_epoch")) {
    EpochMetrics m;
    m.epoch = get_field<std::size_t>(e, "epoch");
    m.source_acc = get_field<double>(e, "source_acc");
    m.target_acc = get_field<double>(e, "target_acc");
    m.gcm_value = get_field<double>(e, "gcm_value");
    m.cnce_value = get_field<double>(e, "cnce_value");
    m.cls_loss = get_field<double>(e, "cls_loss");
    r.per_epoch.push_back(m);
  }
  const auto fin = get_field<json>(doc, "final");
  r.final_target_acc = get_field<double>(fin, "target_acc");
  const auto b = get_field<json>(fin, "bound_inputs");
  r.bound_inputs.label_entropy = get_field<double>(b, "label_entropy");
  r.bound_inputs.cross_given_target = get_field<double>(b, "cross_given_target");
  r.bound_inputs.delta = get_field<double>(b, "delta");
  r.bound_inputs.classes = get_field<std::size_t>(b, "classes");
  return r;
}

void emit_report(const ExperimentReport& r, const std::string& path) {
  const std::string body = report_to_string(r);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write report '{}'", path));
  out << body;
  out.flush();
  if (!out) throw IoError(fmt::format("write failed for report '{}'", path));
}

ExperimentReport read_report(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open report '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_report(ss.str());
}

BoundInputs read_bound_inputs(const std::string& path) {
  auto in = open_input(path);
  return parse_bound_inputs(in);
}

}  // namespace rlglc
