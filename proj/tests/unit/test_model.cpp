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

#include <cmath>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "rlglc/error.hpp"
#include "rlglc/model.hpp"

namespace rlglc {
namespace {

// Scalar reference: -log(exp(l_y) / sum exp(l_k)), averaged.
double reference_cross_entropy(const std::vector<std::vector<double>>& logits,
                               const std::vector<int>& labels) {
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    double s = 0.0;
    for (double l : logits[i]) s += std::exp(l);
    total += -std::log(std::exp(logits[i][labels[i]]) / s);
  }
  return total / static_cast<double>(logits.size());
}

double ce(const Tensor& logits, const std::vector<int>& labels) {
  ad::Tape tape;
  return cross_entropy_loss(tape.constant(logits), labels).value().item();
}

TEST(Extract, IdentityAndZeroWeight) {
  FeatureExtractor id{Network({DenseLayer{Tensor::identity(2), Tensor(1, 2)}}, OutputHead::Linear)};
  const Tensor x = Tensor::from_rows({{1.5, -2.0}, {0.0, 3.0}});
  EXPECT_EQ(extract(id, x), x);
  FeatureExtractor zero{Network({DenseLayer{Tensor(2, 3), Tensor::from_rows({{1, 2, 3}})}}, OutputHead::Linear)};
  const Tensor z = extract(zero, x);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(z(i, j), j + 1.0);
  EXPECT_THROW(extract(id, Tensor(1, 3)), DimensionError);
}

TEST(Extract, SeededGoldenAndPredictions) {
  Rng rng(42);
  const auto phi = FeatureExtractor::make(2, 3, {3}, rng);
  const auto psi = Classifier::make(3, 2, {}, rng);
  const Tensor x = Tensor::from_rows({{0.0, 1.0}, {1.5, -0.5}, {-2.0, 0.25}});
  // Independent reimplementation of the seeded init and forward pass.
  const double feat[3][3] = {{-0.5711599433682154, 0.08547756906541937, 0.5261585326366128},
                             {-0.43502715931924535, 0.14680071674403283, 0.5321008934847782},
                             {-0.6335991829894669, 0.00770777961941882, 0.7587908445354288}};
  const Tensor z = extract(phi, x);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(z(i, j), feat[i][j], 1e-12);
  const auto p = predict(psi, phi, x);
  EXPECT_EQ(p.labels, (std::vector<int>{1, 1, 1}));
  EXPECT_NEAR(p.probabilities(0, 1), 0.5153743096702234, 1e-12);
  EXPECT_NEAR(p.probabilities(1, 1), 0.5271902608879012, 1e-12);
  EXPECT_NEAR(p.probabilities(2, 1), 0.5491628817484555, 1e-12);
}

TEST(CrossEntropy, UniformLogitsGiveLn2) {
  EXPECT_NEAR(ce(Tensor::from_rows({{0.3, 0.3}, {-1, -1}}), {0, 1}), std::log(2.0), 1e-15);
}

TEST(CrossEntropy, LargeMarginIsNearZero) {
  EXPECT_LT(ce(Tensor::from_rows({{40, -40}, {-40, 40}}), {0, 1}), 1e-30);
}

TEST(CrossEntropy, MatchesScalarReference) {
  const std::vector<std::vector<double>> l = {{1.2, -0.3, 0.5}, {0.0, 2.0, -1.0}, {-0.7, -0.7, 0.1}};
  const std::vector<int> y = {2, 1, 0};
  EXPECT_NEAR(ce(Tensor(3, 3, {1.2, -0.3, 0.5, 0.0, 2.0, -1.0, -0.7, -0.7, 0.1}), y), reference_cross_entropy(l, y), 1e-14);
}

TEST(CrossEntropy, OutOfRangeLabelIsContractError) {
  EXPECT_THROW(ce(Tensor::from_rows({{0, 0}}), {2}), ContractError);
  EXPECT_THROW(ce(Tensor::from_rows({{0, 0}}), {-1}), ContractError);
}

TEST(CrossEntropy, NonnegativeAndGradientMatchesFiniteDifferences) {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor logits(5, 3);
    for (double& v : logits.values()) v = rng.normal(0.0, 2.0);
    std::vector<int> y(5);
    for (int& v : y) v = static_cast<int>(rng.below(3));
    EXPECT_GE(ce(logits, y), 0.0);
    LossBuilder loss = [&](ad::Tape&, std::span<const ad::Var> p) { return cross_entropy_loss(p[0], y); };
    EXPECT_LT(finite_diff_check(loss, std::vector<Tensor>{logits}, 1e-5), 1e-4);
  }
}

TEST(Regularizer, Examples) {
  Network single({DenseLayer{Tensor::scalar(3.0), Tensor::scalar(7.0)}}, OutputHead::Linear);
  const std::vector<const Network*> nets{&single};
  EXPECT_DOUBLE_EQ(regularizer(nets, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(regularizer(nets, 1.0), 4.5);
  EXPECT_THROW(regularizer(nets, -1.0), ContractError);
}

TEST(Regularizer, GradientIsAlphaTimesWeight) {
  Rng rng(2);
  Network net({3, 4, 2}, OutputHead::Linear, rng);
  ad::Tape tape;
  auto bound = net.bind(tape, true);
  auto w = weight_vars(net, bound);
  ASSERT_EQ(w.size(), 2u);
  const auto g = tape.gradients(regularizer(w, 0.7), bound);
  const auto params = net.parameters();
  for (std::size_t k = 0; k < bound.size(); ++k) {
    const bool is_weight = k % 2 == 0;
    for (std::size_t i = 0; i < g[k].size(); ++i) {
      EXPECT_NEAR(g[k].values()[i], is_weight ? 0.7 * params[k]->values()[i] : 0.0, 1e-15);
    }
  }
  std::vector<Tensor> values;
  for (const Tensor* p : params) values.push_back(*p);
  LossBuilder loss = [&](ad::Tape&, std::span<const ad::Var> p) { return regularizer(weight_vars(net, p), 0.7); };
  EXPECT_LT(finite_diff_check(loss, values, 1e-5), 1e-4);
}

TEST(Regularizer, StrictlyConvexAlongRandomDirections) {
  Rng rng(3);
  Network net({2, 3, 2}, OutputHead::Linear, rng);
  for (int trial = 0; trial < 20; ++trial) {
    Network plus = net, minus = net;
    auto pp = plus.parameters(), pm = minus.parameters();
    auto base = net.parameters();
    for (std::size_t k = 0; k < base.size(); k += 2) {
      for (std::size_t i = 0; i < base[k]->size(); ++i) {
        const double d = 0.1 * rng.normal();
        pp[k]->values()[i] += d;
        pm[k]->values()[i] -= d;
      }
    }
    const std::vector<const Network*> a{&plus}, b{&minus}, c{&net};
    EXPECT_GT(regularizer(a, 1.0) + regularizer(b, 1.0) - 2.0 * regularizer(c, 1.0), 0.0);
  }
}

TEST(Predict, ExamplesAndTies) {
  auto p = predict_logits(Tensor::from_rows({{10, -10}, {0.5, 0.5}}));
  EXPECT_EQ(p.labels, (std::vector<int>{0, 0}));
  EXPECT_NEAR(p.probabilities(0, 0), 1.0, 1e-8);
  EXPECT_DOUBLE_EQ(p.probabilities(1, 0), 0.5);
}

TEST(Predict, RowsSumToOneAndShiftInvariant) {
  Rng rng(4);
  Tensor logits(20, 4);
  for (double& v : logits.values()) v = rng.normal(0.0, 5.0);
  const auto p = predict_logits(logits);
  for (std::size_t i = 0; i < 20; ++i) {
    double s = 0;
    for (std::size_t j = 0; j < 4; ++j) s += p.probabilities(i, j);
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
  Tensor shifted = logits;
  for (std::size_t i = 0; i < 20; ++i)
    for (std::size_t j = 0; j < 4; ++j) shifted(i, j) += 17.0 * static_cast<double>(i) - 3.0;
  EXPECT_EQ(predict_logits(shifted).labels, p.labels);
}

TEST(Checkpoint, RoundTripIsExact) {
  Rng rng(5);
  Network a({3, 5, 2}, OutputHead::Linear, rng);
  Network b({2, 4, 1}, OutputHead::Sigmoid, rng);
  std::stringstream buf;
  save_checkpoint(buf, {{"extractor", &a}, {"critic", &b}});
  const auto back = load_checkpoint(buf);
  ASSERT_EQ(back.size(), 2u);
  const Network& a2 = back.at("extractor");
  EXPECT_EQ(a2.head(), OutputHead::Linear);
  EXPECT_EQ(back.at("critic").head(), OutputHead::Sigmoid);
  for (std::size_t k = 0; k < a.layers().size(); ++k) {
    EXPECT_EQ(a2.layers()[k].weight, a.layers()[k].weight);
    EXPECT_EQ(a2.layers()[k].bias, a.layers()[k].bias);
  }
}

TEST(Checkpoint, RejectsBadHeaderAndTruncation) {
  std::istringstream bad("rlglc-checkpoint 9\n");
  EXPECT_THROW(load_checkpoint(bad), ParseError);
  std::istringstream trunc("rlglc-checkpoint 1\nnetwork x linear 1\nlayer 2 1\n1 2\n");
  EXPECT_THROW(load_checkpoint(trunc), ParseError);
  std::istringstream count("rlglc-checkpoint 1\nnetwork x linear 1\nlayer 2 1\n1\n0\n");
  try {
    load_checkpoint(count);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
}

}  // namespace
}  // namespace rlglc
