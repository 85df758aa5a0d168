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
#include <string>
#include <utility>
#include <vector>

#include "rlglc/autodiff.hpp"
#include "rlglc/cmi.hpp"
#include "rlglc/config.hpp"
#include "rlglc/data.hpp"
#include "rlglc/dualcritic.hpp"
#include "rlglc/evalstats.hpp"
#include "rlglc/model.hpp"
#include "rlglc/optim.hpp"
#include "rlglc/rng.hpp"

namespace rlglc {

// Rows of one domain. Target labels travel along for stratified sampling
// and evaluation; no loss reads them.
struct Batch {
  Tensor x;
  std::vector<int> labels;
};

// Per-domain class fractions for a batch. Empty means no stratification:
// rows are drawn uniformly.
struct ImbalanceSpec {
  std::vector<double> source_fractions;
  std::vector<double> target_fractions;
};

// Parses "3:7" (or "0.3:0.7") into normalised fractions; "uniform" or ""
// gives an empty vector.
std::vector<double> parse_class_ratio(const std::string& text);

// Draws batches without replacement until a pool runs dry, then reshuffles
// that pool. Stratified domains keep one pool per class.
class MinibatchSampler {
 public:
  // Throws ContractError when a requested class count is not a whole number
  // for this batch size, a class has fewer rows than one batch needs, or
  // batch_size exceeds a domain.
  MinibatchSampler(const DomainPair& data, std::size_t batch_size, ImbalanceSpec spec, Rng rng);

  std::pair<Batch, Batch> next();
  std::size_t batches_per_epoch() const;

 private:
  struct Pool {
    std::vector<std::size_t> rows;
    std::size_t cursor = 0;
    std::size_t take = 0;
  };
  Batch draw(const LabeledDomain& d, std::vector<Pool>& pools);

  const DomainPair* data_;
  std::size_t batch_size_;
  Rng rng_;
  std::vector<Pool> source_pools_;
  std::vector<Pool> target_pools_;
};

// One pair of batches from fresh pools.
std::pair<Batch, Batch> sample_minibatch(const DomainPair& data, Rng& rng, const ImbalanceSpec& spec,
                                         std::size_t batch_size);

struct TrainState {
  FeatureExtractor phi;
  Classifier psi;
  Critic critic;
  Scorer scorer;
  OptimState model_opt;
  OptimState critic_opt;
  OptimState scorer_opt;
  std::size_t epoch = 0;
  std::vector<EpochMetrics> history;

  static TrainState init(const TrainConfig& config, std::size_t input_width, std::size_t classes);
};

// Weighted contributions; disabled terms are exactly 0 and
// total == ((classification + global) + local) + regularization.
struct ObjectiveBreakdown {
  double total = 0.0;
  double classification = 0.0;
  double global = 0.0;
  double local = 0.0;
  double regularization = 0.0;
};

struct ObjectiveGraph {
  ad::Var total;
  ObjectiveBreakdown breakdown;
};

// The training objective on `tape`, differentiable in the extractor and
// classifier parameters; critic and scorer enter as constants.
ObjectiveGraph build_objective(ad::Tape& tape, std::span<const ad::Var> phi_params,
                               std::span<const ad::Var> psi_params, const TrainState& state,
                               const Batch& source, const Batch& target, const TrainConfig& config);

ObjectiveBreakdown rlglc_objective(const TrainState& state, const Batch& source, const Batch& target,
                                   const TrainConfig& config);

// Gradients of the total with respect to extractor then classifier parameters.
std::vector<Tensor> objective_gradients(const TrainState& state, const Batch& source,
                                        const Batch& target, const TrainConfig& config);

// Ascent on the CNCE objective for `steps` updates.
void train_scorer(Scorer& scorer, const Tensor& zs_paired, const Tensor& zt, std::size_t steps,
                  OptimState& optim);

// critic_steps critic updates, scorer_steps scorer updates, then one
// extractor/classifier update. Returns the breakdown before that update.
// Throws NumericError naming the term that went non-finite.
ObjectiveBreakdown adversarial_step(TrainState& state, const Batch& source, const Batch& target,
                                    const TrainConfig& config);

EpochMetrics evaluate(const TrainState& state, const DomainPair& data, const TrainConfig& config);

// Dataset described by the config, seeded by config.seed.
DomainPair make_dataset(const TrainConfig& config);

// Full run; the report is written to config.report_path when `persist`.
ExperimentReport run_experiment(const TrainConfig& config, bool persist = true);

struct SweepEntry {
  std::size_t run_id = 0;
  std::string config_hash;
  double beta = 0.0;
  std::string report_path;
  double final_target_acc = 0.0;
  std::string error;  // empty on success
};

// One run per beta on `threads` workers; each writes its own report under
// out_dir, and an index (sweep_index.json) is merged afterwards in run order.
std::vector<SweepEntry> run_sweep(const TrainConfig& base, const std::vector<double>& betas,
                                  const std::string& out_dir, std::size_t threads);

}  // namespace rlglc
