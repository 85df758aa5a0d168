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

#include "rlglc/model.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "rlglc/error.hpp"
#include "rlglc/text_io.hpp"

namespace rlglc {

namespace {

std::vector<std::size_t> widths_of(std::size_t in, const std::vector<std::size_t>& hidden,
                                   std::size_t out) {
  std::vector<std::size_t> w{in};
  w.insert(w.end(), hidden.begin(), hidden.end());
  w.push_back(out);
  return w;
}

const char* head_name(OutputHead h) {
  switch (h) {
    case OutputHead::Linear: return "linear";
    case OutputHead::Sigmoid: return "sigmoid";
    case OutputHead::Clamp: return "clamp";
  }
  return "linear";
}

OutputHead parse_head(const std::string& s) {
  if (s == "linear") return OutputHead::Linear;
  if (s == "sigmoid") return OutputHead::Sigmoid;
  if (s == "clamp") return OutputHead::Clamp;
  throw ParseError(fmt::format("checkpoint: unknown head '{}'", s), 0);
}

}  // namespace

FeatureExtractor FeatureExtractor::make(std::size_t input_width, std::size_t feature_width,
                                        const std::vector<std::size_t>& hidden, Rng& rng) {
  return FeatureExtractor{Network(widths_of(input_width, hidden, feature_width), OutputHead::Linear, rng)};
}

Classifier Classifier::make(std::size_t feature_width, std::size_t classes,
                            const std::vector<std::size_t>& hidden, Rng& rng) {
  if (classes < 2) throw ContractError("Classifier: need at least two classes");
  return Classifier{Network(widths_of(feature_width, hidden, classes), OutputHead::Linear, rng)};
}

Tensor extract(const FeatureExtractor& phi, const Tensor& x) { return phi.net.evaluate(x); }

ad::Var cross_entropy_loss(ad::Var logits, std::span<const int> labels) {
  const std::size_t n = logits.rows(), c = logits.cols();
  if (labels.size() != n) {
    throw DimensionError(fmt::format("cross_entropy_loss: {} labels for {} rows", labels.size(), n));
  }
  if (n == 0) throw ContractError("cross_entropy_loss: empty batch");
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= c) {
      throw ContractError(fmt::format("cross_entropy_loss: label {} outside [0,{})", labels[i], c));
    }
    idx[i] = static_cast<std::size_t>(labels[i]);
  }
  return ad::mean(ad::logsumexp_rows(logits) - ad::pick(logits, ad::make_index(std::move(idx))));
}

double cross_entropy_loss(const Classifier& psi, const Tensor& features, std::span<const int> labels) {
  ad::Tape tape;
  auto params = psi.net.bind(tape, false);
  return cross_entropy_loss(psi.net.apply(params, tape.constant(features)), labels).value().item();
}

ad::Var regularizer(std::span<const ad::Var> weights, double alpha) {
  if (!(alpha >= 0.0)) throw ContractError(fmt::format("regularizer: alpha {} < 0", alpha));
  if (weights.empty()) throw ContractError("regularizer: no weights");
  ad::Var total = ad::sum(ad::square(weights[0]));
  for (std::size_t k = 1; k < weights.size(); ++k) total = total + ad::sum(ad::square(weights[k]));
  return (0.5 * alpha) * total;
}

double regularizer(std::span<const Network* const> nets, double alpha) {
  if (!(alpha >= 0.0)) throw ContractError(fmt::format("regularizer: alpha {} < 0", alpha));
  double total = 0.0;
  for (const Network* net : nets) {
    for (const auto& layer : net->layers()) {
      for (double w : layer.weight.values()) total += w * w;
    }
  }
  return 0.5 * alpha * total;
}

std::vector<ad::Var> weight_vars(const Network& net, std::span<const ad::Var> bound) {
  const auto mask = net.weight_mask();
  if (mask.size() != bound.size()) throw DimensionError("weight_vars: parameter count mismatch");
  std::vector<ad::Var> out;
  for (std::size_t k = 0; k < mask.size(); ++k) {
    if (mask[k]) out.push_back(bound[k]);
  }
  return out;
}

Prediction predict_logits(const Tensor& logits) {
  Prediction p;
  p.probabilities = Tensor(logits.rows(), logits.cols());
  p.labels.resize(logits.rows());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < logits.cols(); ++j) {
      if (logits(i, j) > logits(i, best)) best = j;
    }
    p.labels[i] = static_cast<int>(best);
    const double m = logits(i, best);
    double s = 0.0;
    for (std::size_t j = 0; j < logits.cols(); ++j) s += p.probabilities(i, j) = std::exp(logits(i, j) - m);
    for (std::size_t j = 0; j < logits.cols(); ++j) p.probabilities(i, j) /= s;
  }
  return p;
}

Prediction predict(const Classifier& psi, const FeatureExtractor& phi, const Tensor& x) {
  return predict_logits(psi.net.evaluate(extract(phi, x)));
}

void save_checkpoint(std::ostream& out, const std::map<std::string, const Network*>& nets) {
  out << "rlglc-checkpoint " << kCheckpointVersion << '\n';
  for (const auto& [name, net] : nets) {
    if (name.empty() || name.find_first_of(" \t\n") != std::string::npos) {
      throw ContractError(fmt::format("checkpoint: invalid network name '{}'", name));
    }
    out << "network " << name << ' ' << head_name(net->head()) << ' ' << net->layer_count() << '\n';
    for (const auto& layer : net->layers()) {
      out << "layer " << layer.weight.rows() << ' ' << layer.weight.cols() << '\n';
      for (const Tensor* t : {&layer.weight, &layer.bias}) {
        std::string line;
        for (std::size_t k = 0; k < t->size(); ++k) {
          if (k) line += ' ';
          line += text::format_double(t->values()[k]);
        }
        out << line << '\n';
      }
    }
  }
}

std::map<std::string, Network> load_checkpoint(std::istream& in) {
  std::size_t lineno = 0;
  auto next_line = [&](std::string& line) {
    while (std::getline(in, line)) {
      ++lineno;
      if (!text::skippable(line)) return true;
    }
    return false;
  };
  auto read_values = [&](std::size_t count) {
    std::string line;
    if (!next_line(line)) throw ParseError("checkpoint: truncated tensor", lineno);
    std::vector<double> v;
    for (auto field : text::split(text::trim(line), ' ')) {
      if (field.empty()) continue;
      v.push_back(text::parse_double(field, lineno));
    }
    if (v.size() != count) {
      throw ParseError(fmt::format("checkpoint: expected {} values, got {}", count, v.size()), lineno);
    }
    return v;
  };
  std::string line;
  if (!next_line(line)) throw ParseError("checkpoint: empty file", lineno);
  {
    std::istringstream hdr(line);
    std::string magic;
    int version = 0;
    if (!(hdr >> magic >> version) || magic != "rlglc-checkpoint") {
      throw ParseError("checkpoint: missing 'rlglc-checkpoint <version>' header", lineno);
    }
    if (version != kCheckpointVersion) {
      throw ParseError(fmt::format("checkpoint: unsupported version {}", version), lineno);
    }
  }
  std::map<std::string, Network> nets;
  while (next_line(line)) {
    std::istringstream hdr(line);
    std::string tag, name, head;
    std::size_t count = 0;
    if (!(hdr >> tag >> name >> head >> count) || tag != "network" || count == 0) {
      throw ParseError("checkpoint: expected 'network <name> <head> <layers>'", lineno);
    }
    std::vector<DenseLayer> layers;
    for (std::size_t l = 0; l < count; ++l) {
      if (!next_line(line)) throw ParseError("checkpoint: truncated network", lineno);
      std::istringstream lh(line);
      std::size_t rows = 0, cols = 0;
      if (!(lh >> tag >> rows >> cols) || tag != "layer" || rows == 0 || cols == 0) {
        throw ParseError("checkpoint: expected 'layer <in> <out>'", lineno);
      }
      Tensor w(rows, cols, read_values(rows * cols));
      Tensor b(1, cols, read_values(cols));
      layers.push_back(DenseLayer{std::move(w), std::move(b)});
    }
    OutputHead h;
    try {
      h = parse_head(head);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), lineno);
    }
    nets.emplace(name, Network(std::move(layers), h));
  }
  return nets;
}

void save_checkpoint(const std::string& path, const std::map<std::string, const Network*>& nets) {
  std::ofstream out(path);
  if (!out) throw IoError(fmt::format("cannot write checkpoint '{}'", path));
  save_checkpoint(out, nets);
  if (!out) throw IoError(fmt::format("write failed for checkpoint '{}'", path));
}

std::map<std::string, Network> load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open checkpoint '{}'", path));
  return load_checkpoint(in);
}

}  // namespace rlglc
