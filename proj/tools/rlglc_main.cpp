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

// Command-line front end. Exit codes: 0 success, 2 invalid configuration or
// input, 3 numeric failure, 4 infeasible transport problem.
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "rlglc/cmi.hpp"
#include "rlglc/config.hpp"
#include "rlglc/data.hpp"
#include "rlglc/error.hpp"
#include "rlglc/evalstats.hpp"
#include "rlglc/ot.hpp"
#include "rlglc/pipeline.hpp"
#include "rlglc/text_io.hpp"

namespace {

using namespace rlglc;
using nlohmann::json;

enum Exit { kOk = 0, kInvalid = 2, kNumeric = 3, kInfeasible = 4 };

struct Common {
  std::string format = "text";
  bool structured() const { return format == "structured"; }
};

void print_json(const json& j) { std::cout << j.dump(2) << '\n'; }

std::string fixed9(double v) { return fmt::format("{:.9f}", v); }

// ---- train / sweep

struct TrainArgs {
  std::string config;
  std::vector<std::string> overrides;
  std::string report;
};

TrainConfig resolve_config(const TrainArgs& a) {
  TrainConfig c = load_config(a.config);
  apply_overrides(c, a.overrides);
  if (!a.report.empty()) c.report_path = a.report;
  return c;
}

int cmd_train(const Common& common, const TrainArgs& a) {
  const TrainConfig c = resolve_config(a);
  const ExperimentReport r = run_experiment(c, true);
  if (common.structured()) {
    std::cout << report_to_string(r);
  } else {
    std::cout << fmt::format("config_hash {}\nseed {}\nepochs {}\nfinal_target_acc {:.4f}\nreport {}\n",
                             r.config_hash, r.seed, r.per_epoch.size() - 1, r.final_target_acc, c.report_path);
  }
  return kOk;
}

struct SweepArgs {
  TrainArgs train;
  std::string betas = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9";
  std::string out = "sweep";
  std::size_t threads = 1;
};

int cmd_sweep(const Common& common, const SweepArgs& a) {
  const TrainConfig base = resolve_config(a.train);
  std::vector<double> grid;
  for (const auto part : text::split(a.betas, ',')) grid.push_back(text::parse_double(part, 0));
  const auto entries = run_sweep(base, grid, a.out, a.threads);
  bool failed = false;
  json rows = json::array();
  for (const auto& e : entries) {
    failed = failed || !e.error.empty();
    if (!common.structured()) {
      std::cout << fmt::format("run {} beta {} config_hash {} ", e.run_id, text::format_double(e.beta), e.config_hash)
                << (e.error.empty() ? fmt::format("final_target_acc {:.4f}", e.final_target_acc) : "error " + e.error)
                << '\n';
    }
    json row = {{"run_id", e.run_id}, {"beta", e.beta}, {"config_hash", e.config_hash}, {"report_path", e.report_path}};
    if (e.error.empty()) row["final_target_acc"] = e.final_target_acc;
    else row["error"] = e.error;
    rows.push_back(row);
  }
  if (common.structured()) print_json(rows);
  return failed ? kNumeric : kOk;
}

// ---- ot

struct OtArgs {
  std::string source, target, plan;
  double beta = 0.0;
  bool nested = false;
  std::string measure = "softplus-normalize";
};

Tensor rows_as_tensor(const DiscreteMeasure& m) {
  Tensor t(m.size(), m.dimension());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t k = 0; k < m.dimension(); ++k) t(i, k) = m.atoms[i][k];
  return t;
}

int cmd_ot(const Common& common, const OtArgs& a) {
  const DiscreteMeasure src = read_measure(a.source);
  const DiscreteMeasure tgt = read_measure(a.target);
  if (!(a.beta >= 0.0 && a.beta < 1.0)) throw ContractError(fmt::format("--beta {} not in [0, 1)", a.beta));
  CostMatrix cost;
  if (a.nested) {
    // Each atom is a feature vector; the ground cost between two of them is
    // the 2-Wasserstein distance of their dimension measures.
    cost = wwd_ground_cost(rows_as_tensor(src), rows_as_tensor(tgt), parse_measure_transform(a.measure));
  } else {
    cost = euclidean_cost(src, tgt);
  }
  const TransportResult res = a.beta > 0.0 ? ar_wwd_primal(src, tgt, cost, a.beta) : wasserstein_exact(src, tgt, cost);
  if (!a.plan.empty()) {
    std::FILE* f = std::fopen(a.plan.c_str(), "w");
    if (!f) throw IoError(fmt::format("cannot write plan '{}'", a.plan));
    const Tensor& c = res.plan.coupling;
    for (std::size_t i = 0; i < c.rows(); ++i) {
      std::string line;
      for (std::size_t j = 0; j < c.cols(); ++j) line += (j ? "," : "") + text::format_double(c(i, j));
      std::fprintf(f, "%s\n", line.c_str());
    }
    std::fclose(f);
  }
  if (common.structured()) {
    print_json({{"value", res.value}, {"beta", a.beta}, {"nested", a.nested}});
  } else {
    std::cout << fixed9(res.value) << '\n';
  }
  return kOk;
}

// ---- cmi

struct CmiArgs {
  std::string joint, source, target;
  long long k = -1;  // unset
  std::size_t samples = 10000;
  std::uint64_t seed = 0;
  std::size_t steps = 200;
};

int cmd_cmi(const Common& common, const CmiArgs& a) {
  if (a.k == 0 || a.k < -1) throw ContractError(fmt::format("--k {} must be at least 1", a.k));
  json out;
  std::ostringstream text_out;
  if (!a.joint.empty()) {
    const DiscreteJoint joint = read_joint(a.joint);
    const double exact = exact_cmi(joint);
    out["exact_cmi"] = exact;
    text_out << "exact_cmi " << fixed9(exact) << '\n';
    if (a.k >= 1) {
      Rng rng(a.seed);
      const auto draws = sample_contrasts(joint, static_cast<std::size_t>(a.k), a.samples, rng);
      const auto est = cnce_estimate(optimal_scorer(joint), draws);
      out["cnce"] = {{"value", est.value}, {"standard_error", est.standard_error}, {"k", a.k}, {"samples", a.samples}};
      text_out << fmt::format("cnce {} se {} k {} samples {}\n", fixed9(est.value), fixed9(est.standard_error), a.k,
                              a.samples);
    }
  } else {
    if (a.source.empty() || a.target.empty()) throw ContractError("cmi needs --joint or both --source and --target");
    const Tensor zs = load_domain(a.source, DomainTag::Source).features;
    const Tensor zt = load_domain(a.target, DomainTag::Target).features;
    std::vector<std::size_t> partner = pair_positive(zt, zs);
    Tensor paired(zt.rows(), zs.cols());
    for (std::size_t i = 0; i < partner.size(); ++i)
      for (std::size_t c = 0; c < zs.cols(); ++c) paired(i, c) = zs(partner[i], c);
    Rng rng(a.seed);
    Scorer scorer = Scorer::make(zs.cols(), {zs.cols(), zs.cols(), zs.cols()}, rng);
    OptimState opt = OptimState::adam(1e-2);
    train_scorer(scorer, paired, zt, a.steps, opt);
    const auto est = cnce_estimate(scorer, paired, zt);
    out["cnce"] = {{"value", est.value}, {"standard_error", est.standard_error}, {"k", zt.rows()}};
    text_out << fmt::format("cnce {} se {} k {}\n", fixed9(est.value), fixed9(est.standard_error), zt.rows());
  }
  if (common.structured()) print_json(out);
  else std::cout << text_out.str();
  return kOk;
}

// ---- friedman

struct FriedmanArgs {
  std::string table;
  bool ranks = false;
  bool exact_means = false;
  std::string ties = "competition";
};

int cmd_friedman(const Common& common, const FriedmanArgs& a) {
  RankTable ranks;
  if (a.ranks) {
    ranks = read_rank_table(a.table);
  } else {
    if (a.ties != "competition" && a.ties != "average") throw ContractError("--ties must be competition or average");
    ranks = competition_ranks(read_accuracy_table(a.table), a.ties == "average" ? TieMode::Average : TieMode::Competition);
  }
  const FriedmanOptions opts{.round_averages = !a.exact_means};
  const double chi2 = friedman_chi2(ranks, opts);
  json out;
  std::string ff_text;
  try {
    const FriedmanResult res = friedman(ranks, opts);
    out["F_F"] = res.ff;
    ff_text = fmt::format("{:.4f}", res.ff);
  } catch (const DomainError&) {
    out["F_F"] = nullptr;
    ff_text = "undefined";
  }
  const std::size_t m = ranks.methods.size(), n = ranks.tasks.size();
  out["chi2_F"] = chi2;
  out["dof"] = {m - 1, (m - 1) * (n - 1)};
  out["methods"] = ranks.methods;
  out["tasks"] = ranks.tasks;
  out["averages"] = ranks.averages;
  json rows = json::array();
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<double> row(ranks.ranks.row_span(i).begin(), ranks.ranks.row_span(i).end());
    rows.push_back(row);
  }
  out["ranks"] = rows;
  if (common.structured()) {
    print_json(out);
  } else {
    write_rank_table(std::cout, ranks);
    std::cout << fmt::format("chi2_F {:.4f}\nF_F {}\ndof {} {}\n", chi2, ff_text, m - 1, (m - 1) * (n - 1));
  }
  return kOk;
}

// ---- bound

int cmd_bound(const Common& common, const std::string& input) {
  const BoundInputs in = read_bound_inputs(input);
  const BayesBounds b = bayes_bound(in);
  if (common.structured()) {
    print_json({{"individual", b.individual}, {"unified", b.unified}});
  } else {
    for (std::size_t k = 0; k < b.individual.size(); ++k) std::cout << fmt::format("bound_{} {}\n", k + 1, fixed9(b.individual[k]));
    std::cout << "unified " << fixed9(b.unified) << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RLGLC domain adaptation lab"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--format", common.format, "Output format")
      ->check(CLI::IsMember({"text", "structured"}))
      ->capture_default_str();
  app.fallthrough();

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Run one training experiment (exit 2 bad config, 3 numeric failure)");
  train_cmd->add_option("--config", train.config, "Key-value config file")->required();
  train_cmd->add_option("--set", train.overrides, "Override key=value (repeatable)");
  train_cmd->add_option("--report", train.report, "Report path (overrides report_path)");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Train once per beta value in parallel (exit 2, 3)");
  sweep_cmd->add_option("--config", sweep.train.config, "Base config file")->required();
  sweep_cmd->add_option("--set", sweep.train.overrides, "Override key=value (repeatable)");
  sweep_cmd->add_option("--betas", sweep.betas, "Comma-separated beta grid")->capture_default_str();
  sweep_cmd->add_option("--out", sweep.out, "Directory for reports and sweep_index.json")->capture_default_str();
  sweep_cmd->add_option("--threads", sweep.threads, "Worker threads")->capture_default_str();

  OtArgs ot;
  auto* ot_cmd = app.add_subcommand("ot", "Transport distance between two measure files (exit 2, 4 infeasible)");
  ot_cmd->add_option("source", ot.source, "Source measure (weight,coords...)")->required();
  ot_cmd->add_option("target", ot.target, "Target measure")->required();
  ot_cmd->add_option("--beta", ot.beta, "Relaxation; 0 gives plain W1")->capture_default_str();
  ot_cmd->add_flag("--nested", ot.nested, "Atoms are feature vectors compared by their dimension measures");
  ot_cmd->add_option("--measure", ot.measure, "Feature-to-measure transform for --nested")->capture_default_str();
  ot_cmd->add_option("--plan", ot.plan, "Write the coupling as CSV");

  CmiArgs cmi;
  auto* cmi_cmd = app.add_subcommand("cmi", "Exact CMI of a joint and CNCE estimates (exit 2 for K < 1)");
  cmi_cmd->add_option("--joint", cmi.joint, "Joint table x_s,x_t,z,probability");
  cmi_cmd->add_option("--source", cmi.source, "Source feature batch (domain CSV)");
  cmi_cmd->add_option("--target", cmi.target, "Target feature batch (domain CSV)");
  cmi_cmd->add_option("--k", cmi.k, "Candidates per contrast, positive included");
  cmi_cmd->add_option("--samples", cmi.samples, "Monte-Carlo draws")->capture_default_str();
  cmi_cmd->add_option("--seed", cmi.seed, "Sampling seed")->capture_default_str();
  cmi_cmd->add_option("--steps", cmi.steps, "Scorer training steps for batches")->capture_default_str();

  FriedmanArgs fr;
  auto* fr_cmd = app.add_subcommand("friedman", "Ranks, R_j and the Friedman statistics of a table (exit 2)");
  fr_cmd->add_option("table", fr.table, "Accuracy table (or rank table with --ranks)")->required();
  fr_cmd->add_flag("--ranks", fr.ranks, "Input already holds ranks");
  fr_cmd->add_flag("--exact-means", fr.exact_means, "Do not round R_j to one decimal");
  fr_cmd->add_option("--ties", fr.ties, "competition or average")->capture_default_str();

  std::string bound_input;
  auto* bound_cmd = app.add_subcommand("bound", "Bayes-error bounds from a key-value file (exit 2)");
  bound_cmd->add_option("--input", bound_input, "Key-value bound inputs")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalid;
  }

  try {
    if (*train_cmd) return cmd_train(common, train);
    if (*sweep_cmd) return cmd_sweep(common, sweep);
    if (*ot_cmd) return cmd_ot(common, ot);
    if (*cmi_cmd) return cmd_cmi(common, cmi);
    if (*fr_cmd) return cmd_friedman(common, fr);
    if (*bound_cmd) return cmd_bound(common, bound_input);
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const DomainError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  }
  return kInvalid;
}
