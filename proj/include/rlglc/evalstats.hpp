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

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rlglc/tensor.hpp"

namespace rlglc {

// Percentage of positions where prediction and label agree.
double accuracy(std::span<const int> predictions, std::span<const int> labels);

// Clamp into [0, 1 - 1/classes].
double threshold_th(double x, std::size_t classes);

struct BoundInputs {
  double label_entropy = 0.0;          // H(Y), nats
  double source_given_target = 0.0;    // I(X_s; Z_s | X_t)
  double target_given_source = 0.0;    // I(X_t; Z_t | X_s)
  double cross_given_source = 0.0;     // I(X_s; X_t | Z_s)
  double cross_given_target = 0.0;     // I(X_s; X_t | Z_t)
  double delta = 0.0;                  // regularizer value, joins the last term
  std::size_t classes = 2;

  // Throws ContractError on negative or non-finite values, classes < 2.
  void validate() const;
  // The four terms in order, delta already added to the last one.
  std::array<double, 4> terms() const;
};

struct BayesBounds {
  std::array<double, 4> individual{};
  double unified = 0.0;
};

BayesBounds bayes_bound(const BoundInputs& in);

// Key-value text (`key = value`, '#' comments); keys are the BoundInputs
// field names.
BoundInputs parse_bound_inputs(std::istream& in);
BoundInputs read_bound_inputs(const std::string& path);

struct AccuracyTable {
  std::vector<std::string> methods;
  std::vector<std::string> tasks;
  Tensor values;  // methods x tasks, percentages

  void validate() const;
};

struct RankTable {
  std::vector<std::string> methods;
  std::vector<std::string> tasks;
  Tensor ranks;                   // methods x tasks
  std::vector<double> averages;   // mean rank per method
  // Averages printed next to a published table, when the file carries them.
  std::optional<std::vector<double>> published_averages;

  void validate() const;
};

// Header `Method,<task>,...`. A trailing `R_j` column in a rank file is read
// into published_averages rather than treated as a task.
AccuracyTable parse_accuracy_table(std::istream& in);
AccuracyTable read_accuracy_table(const std::string& path);
RankTable parse_rank_table(std::istream& in);
RankTable read_rank_table(const std::string& path);
void write_rank_table(std::ostream& out, const RankTable& t);

enum class TieMode {
  Competition,  // ties share the smallest position, next rank skips (1,1,3)
  Average,      // ties share the mean of their positions (1.5,1.5,3)
};

RankTable competition_ranks(const AccuracyTable& table, TieMode mode = TieMode::Competition);

struct FriedmanOptions {
  // Round each mean rank to one decimal (half to even) before the statistic,
  // matching how published rank tables report them.
  bool round_averages = true;
};

struct FriedmanResult {
  double chi2 = 0.0;
  double ff = 0.0;
  std::size_t dof_methods = 0;  // m - 1
  std::size_t dof_error = 0;    // (m - 1)(n - 1)
  std::vector<double> averages_used;
};

// The chi-square statistic alone; defined even where F is not.
double friedman_chi2(const RankTable& ranks, const FriedmanOptions& opts = {},
                     std::vector<double>* averages_used = nullptr);

// Throws ContractError for fewer than two methods or tasks and DomainError
// when the F statistic's denominator vanishes.
FriedmanResult friedman(const RankTable& ranks, const FriedmanOptions& opts = {});

// One epoch of training metrics.
struct EpochMetrics {
  std::size_t epoch = 0;
  double source_acc = 0.0;
  double target_acc = 0.0;
  double gcm_value = 0.0;   // global consistency (dual) term
  double cnce_value = 0.0;  // local consistency estimate
  double cls_loss = 0.0;

  friend bool operator==(const EpochMetrics&, const EpochMetrics&) = default;
};

// The part of BoundInputs a training run can estimate on its own.
struct ReportBoundInputs {
  double label_entropy = 0.0;       // of the source labels, nats
  double cross_given_target = 0.0;  // final CNCE estimate
  double delta = 0.0;               // final regularizer value
  std::size_t classes = 2;

  friend bool operator==(const ReportBoundInputs&, const ReportBoundInputs&) = default;
};

struct ExperimentReport {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> config;
  std::vector<EpochMetrics> per_epoch;
  double final_target_acc = 0.0;
  ReportBoundInputs bound_inputs;

  friend bool operator==(const ExperimentReport&, const ExperimentReport&) = default;
};

// Structured text with sorted keys. Throws ContractError when any metric is
// NaN or infinite.
std::string report_to_string(const ExperimentReport& r);
ExperimentReport parse_report(const std::string& text);
void emit_report(const ExperimentReport& r, const std::string& path);
ExperimentReport read_report(const std::string& path);

}  // namespace rlglc
