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

#include "rlglc/cmi.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "rlglc/error.hpp"
#include "rlglc/text_io.hpp"

namespace rlglc {

namespace {

double xlogy_ratio(double p, double num, double den) {
  // p * log(num / den) with 0 log 0 = 0.
  if (p <= 0.0) return 0.0;
  return p * std::log(num / den);
}

}  // namespace

DiscreteJoint DiscreteJoint::make(std::size_t a, std::size_t b, std::size_t c, std::vector<double> p) {
  if (a == 0 || b == 0 || c == 0) throw ContractError("DiscreteJoint: empty alphabet");
  if (p.size() != a * b * c) {
    throw DimensionError(fmt::format("DiscreteJoint: {} cells for shape {}x{}x{}", p.size(), a, b, c));
  }
  double total = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw ContractError(fmt::format("DiscreteJoint: negative cell {}", v));
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ContractError(fmt::format("DiscreteJoint: total probability {} != 1", total));
  }
  return DiscreteJoint{a, b, c, std::move(p)};
}

double exact_cmi(const DiscreteJoint& j) {
  double total = 0.0;
  for (std::size_t z = 0; z < j.c; ++z) {
    double pz = 0.0;
    std::vector<double> ps(j.a, 0.0), pt(j.b, 0.0);
    for (std::size_t s = 0; s < j.a; ++s) {
      for (std::size_t t = 0; t < j.b; ++t) {
        const double v = j(s, t, z);
        pz += v;
        ps[s] += v;
        pt[t] += v;
      }
    }
    if (pz <= 0.0) continue;
    for (std::size_t s = 0; s < j.a; ++s) {
      for (std::size_t t = 0; t < j.b; ++t) {
        // P(s,t,z) log[P(s,t,z) P(z) / (P(s,z) P(t,z))]
        total += xlogy_ratio(j(s, t, z), j(s, t, z) * pz, ps[s] * pt[t]);
      }
    }
  }
  return std::max(total, 0.0);
}

double mutual_information(const DiscreteJoint& j) {
  std::vector<double> pst(j.a * j.b, 0.0), ps(j.a, 0.0), pt(j.b, 0.0);
  for (std::size_t s = 0; s < j.a; ++s) {
    for (std::size_t t = 0; t < j.b; ++t) {
      for (std::size_t z = 0; z < j.c; ++z) pst[s * j.b + t] += j(s, t, z);
      ps[s] += pst[s * j.b + t];
      pt[t] += pst[s * j.b + t];
    }
  }
  double total = 0.0;
  for (std::size_t s = 0; s < j.a; ++s) {
    for (std::size_t t = 0; t < j.b; ++t) {
      total += xlogy_ratio(pst[s * j.b + t], pst[s * j.b + t], ps[s] * pt[t]);
    }
  }
  return std::max(total, 0.0);
}

double interaction_information(const DiscreteJoint& j) { return mutual_information(j) - exact_cmi(j); }

Assumption1Report verify_assumption1(const DiscreteJoint& j, double tol) {
  // Reorder to (input, label, dummy) joints and reuse mutual_information.
  std::vector<double> sy(j.a * j.c, 0.0), ty(j.b * j.c, 0.0), py(j.c, 0.0);
  for (std::size_t s = 0; s < j.a; ++s) {
    for (std::size_t t = 0; t < j.b; ++t) {
      for (std::size_t y = 0; y < j.c; ++y) {
        sy[s * j.c + y] += j(s, t, y);
        ty[t * j.c + y] += j(s, t, y);
        py[y] += j(s, t, y);
      }
    }
  }
  Assumption1Report r;
  r.source_information = mutual_information(DiscreteJoint{j.a, j.c, 1, sy});
  r.target_information = mutual_information(DiscreteJoint{j.b, j.c, 1, ty});
  for (double v : py) {
    if (v > 0.0) r.label_entropy -= v * std::log(v);
  }
  r.pass = std::abs(r.source_information - r.label_entropy) <= tol &&
           std::abs(r.target_information - r.label_entropy) <= tol;
  return r;
}

TabularScorer optimal_scorer(const DiscreteJoint& j) {
  TabularScorer sc{j.a, j.b, j.c, std::vector<double>(j.p.size(), 0.0)};
  for (std::size_t z = 0; z < j.c; ++z) {
    std::vector<double> pt(j.b, 0.0);
    double pz = 0.0;
    for (std::size_t s = 0; s < j.a; ++s) {
      for (std::size_t t = 0; t < j.b; ++t) {
        pt[t] += j(s, t, z);
        pz += j(s, t, z);
      }
    }
    for (std::size_t s = 0; s < j.a; ++s) {
      double psz = 0.0;
      for (std::size_t t = 0; t < j.b; ++t) psz += j(s, t, z);
      if (psz <= 0.0) continue;
      for (std::size_t t = 0; t < j.b; ++t) {
        const double num = j(s, t, z) / psz;
        const double den = pt[t] / pz;
        double v = kScoreFloor;
        if (num > 0.0) v = std::max(std::log(num / den), kScoreFloor);
        sc.table[(s * j.b + t) * j.c + z] = v;
      }
    }
  }
  return sc;
}

std::vector<DiscreteContrast> sample_contrasts(const DiscreteJoint& j, std::size_t k,
                                               std::size_t count, Rng& rng) {
  if (k == 0) throw ContractError("sample_contrasts: K must be >= 1");
  // Cumulative tables for the joint and for P(x_t | z).
  std::vector<double> cum(j.p.size());
  std::partial_sum(j.p.begin(), j.p.end(), cum.begin());
  std::vector<std::vector<double>> cond(j.c, std::vector<double>(j.b, 0.0));
  for (std::size_t z = 0; z < j.c; ++z) {
    for (std::size_t t = 0; t < j.b; ++t) {
      for (std::size_t s = 0; s < j.a; ++s) cond[z][t] += j(s, t, z);
      if (t > 0) cond[z][t] += cond[z][t - 1];
    }
  }
  auto draw = [&rng](const std::vector<double>& c) {
    const double u = rng.uniform() * c.back();
    auto it = std::upper_bound(c.begin(), c.end(), u);
    std::size_t idx = static_cast<std::size_t>(it - c.begin());
    if (idx >= c.size()) idx = c.size() - 1;
    // Skip zero-mass cells that upper_bound can land on at the top edge.
    while (idx > 0 && c[idx] == c[idx - 1]) --idx;
    return idx;
  };
  std::vector<DiscreteContrast> out(count);
  for (auto& d : out) {
    const std::size_t cell = draw(cum);
    d.z = cell % j.c;
    d.xs = cell / (j.b * j.c);
    d.candidates.resize(k);
    d.candidates[0] = (cell / j.c) % j.b;
    for (std::size_t i = 1; i < k; ++i) d.candidates[i] = draw(cond[d.z]);
  }
  return out;
}

double cnce_term(std::span<const double> scores) {
  if (scores.empty()) throw ContractError("cnce_term: no candidates");
  const double m = *std::max_element(scores.begin(), scores.end());
  double s = 0.0;
  for (double v : scores) s += std::exp(v - m);
  // m - s_0 >= 0 and s >= 1, so the subtracted quantity is never negative.
  return std::log(static_cast<double>(scores.size())) - ((m - scores[0]) + std::log(s));
}

namespace {

CnceEstimate summarize(std::vector<double> terms) {
  CnceEstimate e;
  const double n = static_cast<double>(terms.size());
  if (terms.empty()) return e;
  e.value = std::accumulate(terms.begin(), terms.end(), 0.0) / n;
  if (terms.size() > 1) {
    double ss = 0.0;
    for (double t : terms) ss += (t - e.value) * (t - e.value);
    e.standard_error = std::sqrt(ss / (n - 1.0) / n);
  }
  e.terms = std::move(terms);
  return e;
}

}  // namespace

CnceEstimate cnce_estimate(const TabularScorer& scorer, std::span<const DiscreteContrast> draws) {
  std::vector<double> terms;
  terms.reserve(draws.size());
  std::vector<double> scores;
  for (const auto& d : draws) {
    scores.clear();
    for (std::size_t t : d.candidates) scores.push_back(scorer(d.xs, t, d.z));
    terms.push_back(cnce_term(scores));
  }
  return summarize(std::move(terms));
}

std::vector<std::size_t> pair_positive(const Tensor& zt, const Tensor& zs) {
  if (zt.rows() == 0 || zs.rows() == 0) throw ContractError("pair_positive: empty batch");
  if (zt.cols() != zs.cols()) throw DimensionError("pair_positive: feature widths differ");
  std::vector<std::size_t> out(zt.rows());
  for (std::size_t i = 0; i < zt.rows(); ++i) {
    std::size_t best = 0;
    double best_d = squared_distance(zt.row_span(i), zs.row_span(0));
    for (std::size_t j = 1; j < zs.rows(); ++j) {
      const double d = squared_distance(zt.row_span(i), zs.row_span(j));
      if (d < best_d) {
        best = j;
        best_d = d;
      }
    }
    out[i] = best;
  }
  return out;
}

std::vector<std::size_t> build_negatives(std::size_t i, std::size_t n) {
  if (n < 2) throw ContractError("build_negatives: batch of size < 2 has no negatives");
  if (i >= n) throw ContractError(fmt::format("build_negatives: index {} outside batch {}", i, n));
  std::vector<std::size_t> out;
  out.reserve(n - 1);
  for (std::size_t k = 0; k < n; ++k) {
    if (k != i) out.push_back(k);
  }
  return out;
}

Scorer Scorer::make(std::size_t width, const std::vector<std::size_t>& hidden, Rng& rng) {
  std::vector<std::size_t> widths{width};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(width);
  return Scorer{Network(widths, OutputHead::Linear, rng)};
}

ad::Var scorer_matrix(const Scorer& scorer, std::span<const ad::Var> params, ad::Var zs_paired,
                      ad::Var zt) {
  if (zs_paired.rows() != zt.rows() || zs_paired.cols() != zt.cols()) {
    throw DimensionError("scorer_matrix: paired source and target batches differ in shape");
  }
  const std::size_t n = zt.rows();
  ad::Var source_term = ad::sum_cols(scorer.projection.apply(params, zs_paired) * zt);  // N x 1
  ad::Var cand = ad::matmul(zt, ad::transpose(scorer.projection.apply(params, zt)));   // N x N
  return 0.5 * (ad::expand_cols(source_term, n) + cand);
}

ad::Var cnce_objective(const Scorer& scorer, std::span<const ad::Var> params, ad::Var zs_paired,
                       ad::Var zt) {
  const std::size_t n = zt.rows();
  if (n < 2) throw ContractError("cnce_objective: batch of size < 2 has no negatives");
  ad::Var s = scorer_matrix(scorer, params, zs_paired, zt);
  std::vector<std::size_t> diag(n);
  std::iota(diag.begin(), diag.end(), 0);
  ad::Var gap = ad::logsumexp_rows(s) - ad::pick(s, ad::make_index(std::move(diag)));
  return ad::add_scalar(-ad::mean(gap), std::log(static_cast<double>(n)));
}

CnceEstimate cnce_estimate(const Scorer& scorer, const Tensor& zs_paired, const Tensor& zt) {
  ad::Tape tape;
  auto params = scorer.projection.bind(tape, false);
  const Tensor s = scorer_matrix(scorer, params, tape.constant(zs_paired), tape.constant(zt)).value();
  std::vector<double> terms;
  std::vector<double> row(s.cols());
  for (std::size_t i = 0; i < s.rows(); ++i) {
    // Positive first, then the negatives in index order.
    row[0] = s(i, i);
    std::size_t k = 1;
    for (std::size_t j = 0; j < s.cols(); ++j) {
      if (j != i) row[k++] = s(i, j);
    }
    terms.push_back(cnce_term(row));
  }
  return summarize(std::move(terms));
}

DiscreteJoint parse_joint(std::istream& in) {
  struct Cell {
    std::size_t s, t, z;
    double p;
  };
  std::vector<Cell> cells;
  std::string line;
  std::size_t lineno = 0, a = 0, b = 0, c = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::skippable(line)) continue;
    auto parts = text::split(line, ',');
    if (parts.size() != 4) {
      throw ParseError(fmt::format("joint: expected x_s,x_t,z,probability, got {} fields", parts.size()),
                       lineno);
    }
    auto idx = [&](std::string_view f) {
      const long long v = text::parse_int(f, lineno);
      if (v < 0) throw ParseError("joint: negative index", lineno);
      return static_cast<std::size_t>(v);
    };
    Cell cell{idx(parts[0]), idx(parts[1]), idx(parts[2]), text::parse_double(parts[3], lineno)};
    a = std::max(a, cell.s + 1);
    b = std::max(b, cell.t + 1);
    c = std::max(c, cell.z + 1);
    cells.push_back(cell);
  }
  if (cells.empty()) throw ContractError("joint: no cells");
  std::vector<double> p(a * b * c, 0.0);
  for (const auto& cell : cells) p[(cell.s * b + cell.t) * c + cell.z] += cell.p;
  return DiscreteJoint::make(a, b, c, std::move(p));
}

DiscreteJoint read_joint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open joint file '{}'", path));
  return parse_joint(in);
}

}  // namespace rlglc
