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

#include "rlglc/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numeric>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "rlglc/error.hpp"
#include "rlglc/ot.hpp"
#include "rlglc/text_io.hpp"

namespace rlglc {

std::vector<double> parse_class_ratio(const std::string& raw) {
  const auto trimmed = text::trim(raw);
  if (trimmed.empty() || trimmed == "uniform") return {};
  std::vector<double> parts;
  double total = 0.0;
  for (const auto piece : text::split(trimmed, ':')) {
    const double v = text::parse_double(piece, 0);
    if (v < 0.0) throw ContractError(fmt::format("class ratio '{}' has a negative part", raw));
    parts.push_back(v);
    total += v;
  }
  if (parts.size() < 2 || !(total > 0.0)) throw ContractError(fmt::format("class ratio '{}' is degenerate", raw));
  for (auto& p : parts) p /= total;
  return parts;
}

namespace {

std::vector<std::size_t> stratum_counts(const std::vector<double>& fractions, std::size_t batch_size,
                                        const char* domain) {
  std::vector<std::size_t> counts;
  std::size_t total = 0;
  for (const double f : fractions) {
    const double want = f * static_cast<double>(batch_size);
    const double rounded = std::round(want);
    if (std::abs(want - rounded) > 1e-9) {
      throw ContractError(fmt::format("sample_minibatch: {} ratio needs {} rows of a class in a batch of {}",
                                      domain, want, batch_size));
    }
    counts.push_back(static_cast<std::size_t>(rounded));
    total += counts.back();
  }
  if (total != batch_size) throw ContractError("sample_minibatch: class counts do not fill the batch");
  return counts;
}

}  // namespace

MinibatchSampler::MinibatchSampler(const DomainPair& data, std::size_t batch_size, ImbalanceSpec spec,
                                   Rng rng)
    : data_(&data), batch_size_(batch_size), rng_(rng) {
  if (batch_size == 0) throw ContractError("sample_minibatch: batch size 0");
  const auto setup = [&](const LabeledDomain& d, const std::vector<double>& fractions, std::vector<Pool>& pools,
                         const char* name) {
    d.validate();
    if (batch_size > d.size()) {
      throw ContractError(fmt::format("sample_minibatch: batch size {} exceeds {} domain of {} rows", batch_size,
                                      name, d.size()));
    }
    if (fractions.empty()) {
      Pool p;
      p.rows.resize(d.size());
      std::iota(p.rows.begin(), p.rows.end(), 0);
      p.take = batch_size;
      pools.push_back(std::move(p));
      return;
    }
    if (fractions.size() != d.classes) {
      throw ContractError(fmt::format("sample_minibatch: {} ratio has {} parts for {} classes", name,
                                      fractions.size(), d.classes));
    }
    const auto counts = stratum_counts(fractions, batch_size, name);
    pools.resize(d.classes);
    for (std::size_t i = 0; i < d.size(); ++i) pools[static_cast<std::size_t>(d.labels[i])].rows.push_back(i);
    for (std::size_t c = 0; c < d.classes; ++c) {
      pools[c].take = counts[c];
      if (counts[c] > pools[c].rows.size()) {
        throw ContractError(fmt::format("sample_minibatch: {} class {} has {} rows, a batch needs {}", name, c,
                                        pools[c].rows.size(), counts[c]));
      }
    }
  };
  setup(data.source, spec.source_fractions, source_pools_, "source");
  setup(data.target, spec.target_fractions, target_pools_, "target");
  for (auto* pools : {&source_pools_, &target_pools_}) {
    for (auto& p : *pools) rng_.shuffle(std::span<std::size_t>(p.rows));
  }
}

Batch MinibatchSampler::draw(const LabeledDomain& d, std::vector<Pool>& pools) {
  std::vector<std::size_t> picked;
  picked.reserve(batch_size_);
  for (auto& p : pools) {
    if (p.cursor + p.take > p.rows.size()) {
      rng_.shuffle(std::span<std::size_t>(p.rows));
      p.cursor = 0;
    }
    picked.insert(picked.end(), p.rows.begin() + static_cast<std::ptrdiff_t>(p.cursor),
                  p.rows.begin() + static_cast<std::ptrdiff_t>(p.cursor + p.take));
    p.cursor += p.take;
  }
  Batch b;
  b.x = Tensor(picked.size(), d.features.cols());
  for (std::size_t i = 0; i < picked.size(); ++i) {
    const auto row = d.features.row_span(picked[i]);
    std::copy(row.begin(), row.end(), b.x.row_span(i).begin());
    b.labels.push_back(d.labels[picked[i]]);
  }
  return b;
}

std::pair<Batch, Batch> MinibatchSampler::next() {
  Batch s = draw(data_->source, source_pools_);
  Batch t = draw(data_->target, target_pools_);
  return {std::move(s), std::move(t)};
}

std::size_t MinibatchSampler::batches_per_epoch() const {
  return std::max<std::size_t>(1, std::min(data_->source.size(), data_->target.size()) / batch_size_);
}

std::pair<Batch, Batch> sample_minibatch(const DomainPair& data, Rng& rng, const ImbalanceSpec& spec,
                                         std::size_t batch_size) {
  MinibatchSampler sampler(data, batch_size, spec, rng.fork(rng.next_u64()));
  return sampler.next();
}

TrainState TrainState::init(const TrainConfig& config, std::size_t input_width, std::size_t classes) {
  config.validate();
  Rng root(config.seed);
  const std::size_t m = config.feature_dim;
  const std::size_t h = config.hidden_width;
  const std::size_t cw = config.critic_width;
  const std::size_t sw = config.scorer_width == 0 ? m : config.scorer_width;
  Rng phi_rng = root.fork(10), psi_rng = root.fork(11), critic_rng = root.fork(12), scorer_rng = root.fork(13);
  TrainState s{
      FeatureExtractor::make(input_width, m, {h, h}, phi_rng),
      Classifier::make(m, classes, {h, h}, psi_rng),
      Critic::make(m, {cw, cw, cw}, config.lambda, config.beta, critic_rng),
      Scorer::make(m, {sw, sw, sw}, scorer_rng),
      OptimState::adam(config.lr),
      OptimState::adam(config.critic_lr),
      OptimState::adam(config.scorer_lr),
      0,
      {},
  };
  return s;
}

namespace {

std::vector<Tensor*> model_parameters(TrainState& s) {
  auto p = s.phi.net.parameters();
  for (auto* t : s.psi.net.parameters()) p.push_back(t);
  return p;
}

std::vector<std::string> model_parameter_names(const TrainState& s) {
  auto n = s.phi.net.parameter_names("phi.");
  for (auto& x : s.psi.net.parameter_names("psi.")) n.push_back(std::move(x));
  return n;
}

Tensor gather(const Tensor& z, const std::vector<std::size_t>& rows) {
  Tensor out(rows.size(), z.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = z.row_span(rows[i]);
    std::copy(r.begin(), r.end(), out.row_span(i).begin());
  }
  return out;
}

}  // namespace

ObjectiveGraph build_objective(ad::Tape& tape, std::span<const ad::Var> phi_params,
                               std::span<const ad::Var> psi_params, const TrainState& state,
                               const Batch& source, const Batch& target, const TrainConfig& config) {
  const MeasureTransform mode = parse_measure_transform(config.measure);
  ad::Var xs = tape.constant(source.x);
  ad::Var xt = tape.constant(target.x);
  ad::Var zs = state.phi.net.apply(phi_params, xs);
  ad::Var zt = state.phi.net.apply(phi_params, xt);

  ObjectiveGraph g;
  g.total = tape.constant(Tensor::scalar(0.0));
  auto& b = g.breakdown;
  if (config.use_cls) {
    ad::Var cls = cross_entropy_loss(state.psi.net.apply(psi_params, zs), source.labels);
    b.classification = cls.value().item();
    g.total = g.total + cls;
  }
  if (config.use_global) {
    const auto critic_params = state.critic.net.bind(tape, false);
    ad::Var dual = config.global_weight * dual_objective(state.critic, critic_params, measure_features(zs, mode),
                                                         measure_features(zt, mode));
    b.global = dual.value().item();
    g.total = g.total + dual;
  }
  if (config.use_local) {
    const auto scorer_params = state.scorer.projection.bind(tape, false);
    const auto partner = pair_positive(zt.value(), zs.value());
    ad::Var zs_paired = ad::gather_rows(zs, ad::make_index(partner));
    ad::Var local = config.local_weight * cnce_objective(state.scorer, scorer_params, zs_paired, zt);
    b.local = local.value().item();
    g.total = g.total + local;
  }
  if (config.use_reg) {
    auto weights = weight_vars(state.phi.net, phi_params);
    for (auto& w : weight_vars(state.psi.net, psi_params)) weights.push_back(w);
    ad::Var reg = regularizer(weights, config.alpha);
    b.regularization = reg.value().item();
    g.total = g.total + reg;
  }
  b.total = g.total.value().item();
  return g;
}

ObjectiveBreakdown rlglc_objective(const TrainState& state, const Batch& source, const Batch& target,
                                   const TrainConfig& config) {
  ad::Tape tape;
  const auto phi_params = state.phi.net.bind(tape, false);
  const auto psi_params = state.psi.net.bind(tape, false);
  return build_objective(tape, phi_params, psi_params, state, source, target, config).breakdown;
}

std::vector<Tensor> objective_gradients(const TrainState& state, const Batch& source, const Batch& target,
                                        const TrainConfig& config) {
  ad::Tape tape;
  auto params = state.phi.net.bind(tape, true);
  const std::size_t split = params.size();
  const auto psi_params = state.psi.net.bind(tape, true);
  params.insert(params.end(), psi_params.begin(), psi_params.end());
  const auto graph = build_objective(tape, std::span(params).first(split), std::span(params).subspan(split), state,
                                     source, target, config);
  return tape.gradients(graph.total, params);
}

void train_scorer(Scorer& scorer, const Tensor& zs_paired, const Tensor& zt, std::size_t steps,
                  OptimState& optim) {
  const auto names = scorer.projection.parameter_names("scorer.");
  for (std::size_t s = 0; s < steps; ++s) {
    ad::Tape tape;
    const auto params = scorer.projection.bind(tape, true);
    ad::Var objective = cnce_objective(scorer, params, tape.constant(zs_paired), tape.constant(zt));
    if (!std::isfinite(objective.value().item())) {
      throw NumericError(fmt::format("train_scorer: objective not finite at step {}", s));
    }
    const auto grads = tape.gradients(-objective, params);
    step(scorer.projection.parameters(), grads, names, optim);
  }
}

ObjectiveBreakdown adversarial_step(TrainState& state, const Batch& source, const Batch& target,
                                    const TrainConfig& config) {
  const MeasureTransform mode = parse_measure_transform(config.measure);
  if (config.critic_steps > 0 || config.scorer_steps > 0) {
    const Tensor zs = extract(state.phi, source.x);
    const Tensor zt = extract(state.phi, target.x);
    if (!zs.all_finite() || !zt.all_finite()) throw NumericError("adversarial_step: features are not finite");
    if (config.use_global && config.critic_steps > 0) {
      train_critic(state.critic, measure_weights(zs, mode), measure_weights(zt, mode), config.critic_steps,
                   state.critic_opt);
    }
    if (config.use_local && config.scorer_steps > 0) {
      train_scorer(state.scorer, gather(zs, pair_positive(zt, zs)), zt, config.scorer_steps, state.scorer_opt);
    }
  }

  ad::Tape tape;
  auto params = state.phi.net.bind(tape, true);
  const std::size_t split = params.size();
  const auto psi_params = state.psi.net.bind(tape, true);
  params.insert(params.end(), psi_params.begin(), psi_params.end());
  const auto graph = build_objective(tape, std::span(params).first(split), std::span(params).subspan(split), state,
                                     source, target, config);
  const auto& b = graph.breakdown;
  const std::pair<const char*, double> terms[] = {
      {"classification", b.classification}, {"global", b.global}, {"local", b.local},
      {"regularization", b.regularization}};
  for (const auto& [name, value] : terms) {
    if (!std::isfinite(value)) throw NumericError(fmt::format("adversarial_step: {} term is not finite", name));
  }
  const auto grads = tape.gradients(graph.total, params);
  step(model_parameters(state), grads, model_parameter_names(state), state.model_opt);
  return b;
}

EpochMetrics evaluate(const TrainState& state, const DomainPair& data, const TrainConfig& config) {
  const MeasureTransform mode = parse_measure_transform(config.measure);
  EpochMetrics m;
  m.epoch = state.epoch;
  const Tensor zs = extract(state.phi, data.source.features);
  const Tensor zt = extract(state.phi, data.target.features);
  m.source_acc = accuracy(predict_logits(state.psi.net.evaluate(zs)).labels, data.source.labels);
  m.target_acc = accuracy(predict_logits(state.psi.net.evaluate(zt)).labels, data.target.labels);
  m.cls_loss = cross_entropy_loss(state.psi, zs, data.source.labels);
  m.gcm_value = dual_objective(state.critic, measure_weights(zs, mode), measure_weights(zt, mode));
  m.cnce_value = cnce_estimate(state.scorer, gather(zs, pair_positive(zt, zs)), zt).value;
  return m;
}

DomainPair make_dataset(const TrainConfig& config) {
  if (config.dataset == "two_moons") {
    TwoMoonsSpec spec;
    spec.n = config.data_n;
    spec.rotation_deg = config.rotation_deg;
    spec.noise_sigma = config.noise_sigma;
    spec.source_ratio = config.source_ratio;
    spec.target_ratio = config.target_ratio;
    spec.seed = config.seed;
    return gen_two_moons_shift(spec);
  }
  if (config.dataset == "gaussian") {
    GaussianShiftSpec spec;
    spec.means = {{-1.5, 0.0}, {1.5, 0.0}};
    spec.covariances = {{{1.0, 0.0}, {0.0, 1.0}}, {{1.0, 0.0}, {0.0, 1.0}}};
    for (const auto part : text::split(config.shift, ',')) spec.shift.push_back(text::parse_double(part, 0));
    spec.n = config.data_n;
    spec.seed = config.seed;
    return gen_gaussian_shift(spec);
  }
  if (config.dataset == "file") return load_domain_pair(config.data_path);
  throw ContractError(fmt::format("unknown dataset '{}'", config.dataset));
}

namespace {

double label_entropy(const LabeledDomain& d) {
  double h = 0.0;
  for (const std::size_t c : d.class_counts()) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(d.size());
    h -= p * std::log(p);
  }
  return h;
}

}  // namespace

ExperimentReport run_experiment(const TrainConfig& config, bool persist) {
  config.validate();
  const DomainPair data = make_dataset(config);
  const std::size_t classes = std::max(data.source.classes, data.target.classes);
  TrainState state = TrainState::init(config, data.source.features.cols(), classes);
  MinibatchSampler sampler(data, config.batch_size, {}, Rng(config.seed).fork(14));

  state.history.push_back(evaluate(state, data, config));
  for (std::size_t e = 1; e <= config.epochs; ++e) {
    for (std::size_t b = 0; b < sampler.batches_per_epoch(); ++b) {
      const auto [bs, bt] = sampler.next();
      adversarial_step(state, bs, bt, config);
    }
    state.epoch = e;
    state.history.push_back(evaluate(state, data, config));
  }

  ExperimentReport r;
  r.config_hash = config.hash();
  r.seed = config.seed;
  for (const auto& [k, v] : config.entries()) r.config[k] = v;
  r.per_epoch = state.history;
  r.final_target_acc = state.history.back().target_acc;
  r.bound_inputs.label_entropy = label_entropy(data.source);
  r.bound_inputs.cross_given_target = state.history.back().cnce_value;
  const Network* nets[] = {&state.phi.net, &state.psi.net};
  r.bound_inputs.delta = regularizer(nets, 1.0);
  r.bound_inputs.classes = classes;
  if (persist) emit_report(r, config.report_path);
  return r;
}

std::vector<SweepEntry> run_sweep(const TrainConfig& base, const std::vector<double>& betas,
                                  const std::string& out_dir, std::size_t threads) {
  std::filesystem::create_directories(out_dir);
  std::vector<SweepEntry> entries(betas.size());
  std::vector<TrainConfig> configs(betas.size(), base);
  for (std::size_t i = 0; i < betas.size(); ++i) {
    configs[i].beta = betas[i];
    configs[i].validate();
    entries[i].run_id = i;
    entries[i].beta = betas[i];
    entries[i].config_hash = configs[i].hash();
    configs[i].report_path =
        (std::filesystem::path(out_dir) / fmt::format("run_{:03}_{}.json", i, entries[i].config_hash)).string();
    entries[i].report_path = configs[i].report_path;
  }
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        entries[i].final_target_acc = run_experiment(configs[i], true).final_target_acc;
      } catch (const std::exception& e) {
        entries[i].error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::max<std::size_t>(1, std::min(threads, configs.size())); ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  nlohmann::json index = nlohmann::json::array();
  for (const auto& e : entries) {
    nlohmann::json row = {{"run_id", e.run_id},
                          {"config_hash", e.config_hash},
                          {"beta", e.beta},
                          {"report_path", e.report_path}};
    if (e.error.empty()) row["final_target_acc"] = e.final_target_acc;
    else row["error"] = e.error;
    index.push_back(std::move(row));
  }
  const auto index_path = (std::filesystem::path(out_dir) / "sweep_index.json").string();
  std::ofstream out(index_path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write sweep index '{}'", index_path));
  out << index.dump(2) << '\n';
  return entries;
}

}  // namespace rlglc
