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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "rlglc/error.hpp"
#include "rlglc/evalstats.hpp"
#include "rlglc/rng.hpp"

namespace rlglc {
namespace {

std::string fixture(const std::string& name) { return std::string(RLGLC_FIXTURES) + "/" + name; }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Rank-sum form of the statistic, written out independently of friedman().
double chi2_from_rank_sums(const std::vector<double>& means, double n) {
  const double m = static_cast<double>(means.size());
  double s = 0.0;
  for (double r : means) s += (r * n) * (r * n);
  return 12.0 / (n * m * (m + 1.0)) * s - 3.0 * n * (m + 1.0);
}

AccuracyTable toy_table(std::size_t tasks) {
  AccuracyTable t;
  t.methods = {"A", "B"};
  t.values = Tensor(2, tasks);
  for (std::size_t j = 0; j < tasks; ++j) {
    t.tasks.push_back("t" + std::to_string(j));
    t.values(0, j) = 90.0;
    t.values(1, j) = 80.0 - static_cast<double>(j);
  }
  return t;
}

TEST(Accuracy, CountsMatches) {
  const std::vector<int> labels = {0, 1, 1, 0, 1, 0, 0, 1, 1, 0};
  std::vector<int> pred = labels;
  EXPECT_DOUBLE_EQ(accuracy(pred, labels), 100.0);
  for (auto& p : pred) p = 1 - p;
  EXPECT_DOUBLE_EQ(accuracy(pred, labels), 0.0);
  pred = labels;
  pred[0] = 1, pred[3] = 1, pred[9] = 1;
  EXPECT_DOUBLE_EQ(accuracy(pred, labels), 70.0);
}

TEST(Accuracy, RejectsEmptyAndMismatched) {
  EXPECT_THROW(accuracy({}, {}), ContractError);
  const std::vector<int> a = {1, 0}, b = {1};
  EXPECT_THROW(accuracy(a, b), ContractError);
}

TEST(ThresholdTh, Clamps) {
  EXPECT_DOUBLE_EQ(threshold_th(-0.3, 2), 0.0);
  EXPECT_DOUBLE_EQ(threshold_th(0.9, 2), 0.5);
  EXPECT_DOUBLE_EQ(threshold_th(0.4, 3), 0.4);
  EXPECT_THROW(threshold_th(0.4, 1), ContractError);
}

TEST(BayesBound, WorkedExamples) {
  BoundInputs in;
  in.label_entropy = std::log(2.0);
  const auto zero = bayes_bound(in);
  for (double b : zero.individual) EXPECT_NEAR(b, 0.5, 1e-9);
  EXPECT_NEAR(zero.unified, 0.5, 1e-9);

  in.label_entropy = 0.7;
  in.source_given_target = 0.7;
  in.target_given_source = 0.9;
  in.cross_given_source = 1.0;
  in.cross_given_target = 0.8;
  EXPECT_NEAR(bayes_bound(in).unified, 0.0, 1e-9);

  in = BoundInputs{};
  in.label_entropy = std::log(3.0);
  in.classes = 3;
  in.source_given_target = 0.2;
  in.target_given_source = 0.5;
  in.cross_given_source = 0.6;
  in.cross_given_target = 0.3;
  const double expected = 1.0 - std::exp(0.2) / 3.0;
  EXPECT_NEAR(expected, 0.5929, 1e-4);
  EXPECT_NEAR(bayes_bound(in).unified, expected, 1e-9);
  EXPECT_NEAR(bayes_bound(in).individual[0], expected, 1e-9);
}

TEST(BayesBound, DeltaJoinsLastTerm) {
  BoundInputs in;
  in.label_entropy = 2.0;
  in.classes = 10;
  in.source_given_target = in.target_given_source = in.cross_given_source = 1.5;
  in.cross_given_target = 0.2;
  in.delta = 0.3;
  const auto b = bayes_bound(in);
  EXPECT_NEAR(b.individual[3], 1.0 - std::exp(-2.0 + 0.5), 1e-12);
  EXPECT_NEAR(b.unified, b.individual[3], 1e-15);
}

TEST(BayesBound, RejectsInvalidInputs) {
  BoundInputs in;
  in.label_entropy = -0.1;
  EXPECT_THROW(bayes_bound(in), ContractError);
  in = BoundInputs{};
  in.cross_given_source = -1e-3;
  EXPECT_THROW(bayes_bound(in), ContractError);
  in = BoundInputs{};
  in.classes = 1;
  EXPECT_THROW(bayes_bound(in), ContractError);
  in = BoundInputs{};
  in.delta = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(bayes_bound(in), ContractError);
}

BoundInputs random_inputs(Rng& rng) {
  BoundInputs in;
  in.classes = 2 + rng.below(9);
  in.label_entropy = rng.uniform(0.0, std::log(static_cast<double>(in.classes)));
  in.source_given_target = rng.uniform(0.0, 2.0);
  in.target_given_source = rng.uniform(0.0, 2.0);
  in.cross_given_source = rng.uniform(0.0, 2.0);
  in.cross_given_target = rng.uniform(0.0, 2.0);
  in.delta = rng.uniform(0.0, 0.5);
  return in;
}

TEST(BayesBound, OutputsStayInClampRange) {
  Rng rng(31);
  for (int t = 0; t < 1000; ++t) {
    const auto in = random_inputs(rng);
    const double cap = 1.0 - 1.0 / static_cast<double>(in.classes);
    const auto b = bayes_bound(in);
    for (double v : b.individual) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, cap);
    }
    EXPECT_GE(b.unified, 0.0);
    EXPECT_LE(b.unified, cap);
  }
}

// 1 - exp(-H + t) falls as t grows, so the smallest term yields the
// largest bound.
TEST(BayesBound, UnifiedEqualsLargestIndividual) {
  Rng rng(32);
  for (int t = 0; t < 1000; ++t) {
    const auto b = bayes_bound(random_inputs(rng));
    double largest = 0.0;
    for (double v : b.individual) {
      EXPECT_GE(b.unified, v);
      largest = std::max(largest, v);
    }
    EXPECT_EQ(b.unified, largest);
  }
}

TEST(BayesBound, ShrinkingATermNeverLowersABound) {
  Rng rng(33);
  for (int t = 0; t < 500; ++t) {
    const auto in = random_inputs(rng);
    const auto before = bayes_bound(in);
    auto smaller = in;
    smaller.cross_given_source *= rng.uniform();
    smaller.delta *= rng.uniform();
    const auto after = bayes_bound(smaller);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_GE(after.individual[k], before.individual[k]);
    EXPECT_GE(after.unified, before.unified);
  }
}

TEST(BayesBound, ParsesKeyValueFile) {
  const auto in = read_bound_inputs(fixture("bound_inputs.txt"));
  EXPECT_EQ(in.classes, 3u);
  EXPECT_DOUBLE_EQ(in.delta, 0.1);
  const auto b = bayes_bound(in);
  EXPECT_NEAR(b.unified, 1.0 - std::exp(0.2) / 3.0, 1e-9);
  std::istringstream bad("label_entropy = 1\nbogus = 2\n");
  EXPECT_THROW(parse_bound_inputs(bad), ParseError);
}

TEST(CompetitionRanks, TiesShareSmallestPosition) {
  AccuracyTable t;
  t.methods = {"a", "b", "c"};
  t.tasks = {"x"};
  t.values = Tensor(3, 1, {100.0, 100.0, 99.8});
  const auto r = competition_ranks(t);
  EXPECT_EQ(r.ranks(0, 0), 1.0);
  EXPECT_EQ(r.ranks(1, 0), 1.0);
  EXPECT_EQ(r.ranks(2, 0), 3.0);
  const auto avg = competition_ranks(t, TieMode::Average);
  EXPECT_EQ(avg.ranks(0, 0), 1.5);
  EXPECT_EQ(avg.ranks(2, 0), 3.0);
}

TEST(CompetitionRanks, StrictlyDecreasingColumn) {
  AccuracyTable t;
  t.tasks = {"x"};
  t.values = Tensor(6, 1);
  for (std::size_t i = 0; i < 6; ++i) {
    t.methods.push_back("m" + std::to_string(i));
    t.values(i, 0) = 90.0 - 3.0 * static_cast<double>(i);
  }
  const auto r = competition_ranks(t);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(r.ranks(i, 0), static_cast<double>(i + 1));
}

TEST(CompetitionRanks, ReproducesOffice31RankTable) {
  const auto acc = read_accuracy_table(fixture("office31_accuracy.csv"));
  const auto published = read_rank_table(fixture("office31_ranks.csv"));
  const auto ours = competition_ranks(acc);
  ASSERT_EQ(ours.methods, published.methods);
  ASSERT_EQ(ours.tasks, published.tasks);
  std::size_t off_by_one = 0;
  for (std::size_t i = 0; i < ours.methods.size(); ++i) {
    for (std::size_t j = 0; j < ours.tasks.size(); ++j) {
      const double d = std::abs(ours.ranks(i, j) - published.ranks(i, j));
      EXPECT_LE(d, 1.0) << ours.methods[i] << " on " << ours.tasks[j];
      off_by_one += d > 0.0;
    }
    EXPECT_NEAR(ours.averages[i], (*published.published_averages)[i], 0.05) << ours.methods[i];
  }
  EXPECT_LE(off_by_one, 6u);
  // RLGLC is the last row and ranks first on average.
  EXPECT_NEAR(ours.averages.back(), 1.1, 0.05);
}

TEST(CompetitionRanks, BestAccuracyRanksFirstAndRanksFollowDeficit) {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    AccuracyTable t;
    const std::size_t m = 2 + rng.below(10), n = 1 + rng.below(5);
    t.values = Tensor(m, n);
    for (std::size_t i = 0; i < m; ++i) t.methods.push_back("m" + std::to_string(i));
    for (std::size_t j = 0; j < n; ++j) t.tasks.push_back("t" + std::to_string(j));
    for (auto& v : t.values.values()) v = 60.0 + static_cast<double>(rng.below(8));
    const auto r = competition_ranks(t);
    for (std::size_t j = 0; j < n; ++j) {
      double best = 0.0;
      for (std::size_t i = 0; i < m; ++i) best = std::max(best, t.values(i, j));
      for (std::size_t i = 0; i < m; ++i) {
        if (t.values(i, j) == best) EXPECT_EQ(r.ranks(i, j), 1.0);
        for (std::size_t k = 0; k < m; ++k) {
          if (t.values(i, j) > t.values(k, j)) EXPECT_LT(r.ranks(i, j), r.ranks(k, j));
          if (t.values(i, j) == t.values(k, j)) EXPECT_EQ(r.ranks(i, j), r.ranks(k, j));
        }
      }
    }
  }
}

TEST(Friedman, TwoMethodToyGivesTaskCount) {
  for (std::size_t n : {2u, 5u, 9u}) {
    const auto r = competition_ranks(toy_table(n));
    EXPECT_NEAR(friedman_chi2(r), static_cast<double>(n), 1e-12);
    EXPECT_NEAR(chi2_from_rank_sums(r.averages, static_cast<double>(n)), static_cast<double>(n), 1e-12);
    // chi2 = n(m-1) leaves F without a denominator.
    EXPECT_THROW(friedman(r), DomainError);
  }
}

struct Published {
  const char* file;
  double chi2, ff;
  std::size_t dof1, dof2;
};

class FriedmanPublished : public ::testing::TestWithParam<Published> {};

TEST_P(FriedmanPublished, MatchesReportedStatistics) {
  const auto p = GetParam();
  const auto ranks = read_rank_table(fixture(p.file));
  const auto res = friedman(ranks);
  EXPECT_EQ(res.dof_methods, p.dof1);
  EXPECT_EQ(res.dof_error, p.dof2);
  EXPECT_NEAR(res.chi2, p.chi2, 0.006);
  EXPECT_NEAR(res.ff, p.ff, 0.006);
  EXPECT_NEAR(res.chi2, chi2_from_rank_sums(res.averages_used, static_cast<double>(ranks.tasks.size())), 1e-9);
  ASSERT_TRUE(ranks.published_averages.has_value());
  for (std::size_t i = 0; i < ranks.methods.size(); ++i) {
    EXPECT_DOUBLE_EQ(res.averages_used[i], (*ranks.published_averages)[i]) << ranks.methods[i];
  }
}

INSTANTIATE_TEST_SUITE_P(Tables, FriedmanPublished,
                         ::testing::Values(Published{"office31_ranks.csv", 83.58, 3.97, 30, 180},
                                           Published{"officehome_ranks.csv", 254.62, 31.70, 27, 324},
                                           Published{"visda_ranks.csv", 244.69, 36.56, 25, 300},
                                           Published{"domainnet_ranks.csv", 249.94, 83.17, 22, 264},
                                           Published{"digits_ranks.csv", 69.77, 11.48, 22, 66}));

TEST(Friedman, ExactMeansStayNearPublished) {
  const auto res = friedman(read_rank_table(fixture("office31_ranks.csv")), {.round_averages = false});
  EXPECT_NEAR(res.chi2, 83.55, 0.01);
  EXPECT_NEAR(res.ff, 3.96, 0.01);
}

TEST(Friedman, InvariantUnderRowPermutation) {
  const auto ranks = read_rank_table(fixture("officehome_ranks.csv"));
  const auto base = friedman(ranks, {.round_averages = false});
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const auto perm = rng.permutation(ranks.methods.size());
    RankTable shuffled = ranks;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      shuffled.methods[i] = ranks.methods[perm[i]];
      shuffled.averages[i] = ranks.averages[perm[i]];
      for (std::size_t j = 0; j < ranks.tasks.size(); ++j) shuffled.ranks(i, j) = ranks.ranks(perm[i], j);
    }
    const auto res = friedman(shuffled, {.round_averages = false});
    EXPECT_NEAR(res.chi2, base.chi2, 1e-9);
    EXPECT_NEAR(res.ff, base.ff, 1e-9);
  }
}

TEST(Friedman, RejectsTooFewMethodsOrTasks) {
  auto r = competition_ranks(toy_table(1));
  EXPECT_THROW(friedman(r), ContractError);
}

TEST(Tables, MalformedInputsFail) {
  std::istringstream ragged("Method,a,b\nX,1,2\nY,3\n");
  EXPECT_THROW(parse_accuracy_table(ragged), ParseError);
  std::istringstream out_of_range("Method,a\nX,101\nY,3\n");
  EXPECT_THROW(parse_accuracy_table(out_of_range), ContractError);
  std::istringstream one_method("Method,a\nX,50\n");
  EXPECT_THROW(parse_accuracy_table(one_method), ContractError);
  EXPECT_THROW(read_accuracy_table(fixture("missing.csv")), IoError);
}

TEST(Tables, RankTableWriteReadRoundTrip) {
  const auto r = competition_ranks(read_accuracy_table(fixture("office31_accuracy.csv")));
  std::stringstream ss;
  write_rank_table(ss, r);
  const auto back = parse_rank_table(ss);
  EXPECT_EQ(back.methods, r.methods);
  EXPECT_EQ(back.ranks, r.ranks);
}

ExperimentReport golden_report() {
  ExperimentReport r;
  r.config_hash = "00000000deadbeef";
  r.seed = 7;
  r.config = {{"beta", "0.4"}, {"epochs", "2"}};
  r.per_epoch = {{0, 50.0, 30.0, 0.4, 0.0, std::log(2.0)}, {1, 95.0, 87.5, -0.03125, 0.1, 0.25}};
  r.final_target_acc = 87.5;
  r.bound_inputs = {std::log(2.0), 0.125, 0.75, 2};
  return r;
}

TEST(Report, MatchesGoldenBytes) {
  EXPECT_EQ(report_to_string(golden_report()), slurp(fixture("report_golden.json")));
}

TEST(Report, EmitIsByteStableAndRoundTrips) {
  const auto dir = std::filesystem::temp_directory_path();
  const auto a = (dir / "rlglc_report_a.json").string();
  const auto b = (dir / "rlglc_report_b.json").string();
  emit_report(golden_report(), a);
  emit_report(read_report(a), b);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_EQ(read_report(b), golden_report());
  std::filesystem::remove(a);
  std::filesystem::remove(b);
}

TEST(Report, EmptyHistoryRoundTrips) {
  ExperimentReport r;
  r.config_hash = "0";
  EXPECT_EQ(parse_report(report_to_string(r)), r);
}

TEST(Report, NanMetricIsRejected) {
  auto r = golden_report();
  r.per_epoch[1].cnce_value = std::nan("");
  EXPECT_THROW(report_to_string(r), ContractError);
  r = golden_report();
  r.final_target_acc = INFINITY;
  EXPECT_THROW(report_to_string(r), ContractError);
}

TEST(Report, UnwritablePathSurfaces) {
  EXPECT_THROW(emit_report(golden_report(), "/nonexistent-dir/r.json"), IoError);
}

}  // namespace
}  // namespace rlglc
