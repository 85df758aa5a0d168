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

#include "rlglc/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "rlglc/error.hpp"
#include "rlglc/rng.hpp"
#include "rlglc/text_io.hpp"

namespace rlglc {

namespace {

// Centre of the two-moons layout; rotations pivot here.
constexpr double kCentreX = 0.5;
constexpr double kCentreY = 0.25;

// Squared distance from (x, y) to the upper moon curve (cos t, sin t) or the
// lower one (1 - cos t, 0.5 - sin t), t in [0, pi], by dense sampling and
// a local refinement.
double curve_distance(int moon, double x, double y) {
  auto point = [moon](double t, double& px, double& py) {
    if (moon == 0) {
      px = std::cos(t);
      py = std::sin(t);
    } else {
      px = 1.0 - std::cos(t);
      py = 0.5 - std::sin(t);
    }
  };
  auto d2 = [&](double t) {
    double px, py;
    point(t, px, py);
    return (px - x) * (px - x) + (py - y) * (py - y);
  };
  constexpr int kGrid = 256;
  int best = 0;
  double best_d = d2(0.0);
  for (int k = 1; k <= kGrid; ++k) {
    const double d = d2(std::numbers::pi * k / kGrid);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  // Golden-section search on the bracketing interval.
  double lo = std::numbers::pi * std::max(best - 1, 0) / kGrid;
  double hi = std::numbers::pi * std::min(best + 1, kGrid) / kGrid;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 40; ++it) {
    const double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
    if (d2(a) < d2(b)) {
      hi = b;
    } else {
      lo = a;
    }
  }
  return std::min(best_d, d2(0.5 * (lo + hi)));
}

void rotate(double deg, double& x, double& y) {
  const double r = deg * std::numbers::pi / 180.0;
  const double dx = x - kCentreX, dy = y - kCentreY;
  x = kCentreX + std::cos(r) * dx - std::sin(r) * dy;
  y = kCentreY + std::sin(r) * dx + std::cos(r) * dy;
}

std::size_t class_zero_count(double ratio, std::size_t n, const char* which) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw ContractError(fmt::format("two moons: {} class ratio {} must lie in (0,1)", which, ratio));
  }
  const auto c0 = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
  if (c0 == 0 || c0 >= n) {
    throw ContractError(fmt::format("two moons: {} ratio {} leaves a class empty at n={}", which, ratio, n));
  }
  return c0;
}

LabeledDomain draw_moons(Rng& rng, std::size_t n, double ratio, double sigma, double rotation,
                         DomainTag tag) {
  const std::size_t c0 = class_zero_count(ratio, n, to_string(tag).c_str());
  LabeledDomain d;
  d.domain = tag;
  d.classes = 2;
  d.features = Tensor(n, 2);
  d.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int cls = i < c0 ? 0 : 1;
    double x, y;
    do {
      const double t = std::numbers::pi * rng.uniform();
      x = cls == 0 ? std::cos(t) : 1.0 - std::cos(t);
      y = cls == 0 ? std::sin(t) : 0.5 - std::sin(t);
      x += sigma * rng.normal();
      y += sigma * rng.normal();
    } while (two_moons_label(x, y) != cls);
    if (rotation != 0.0) rotate(rotation, x, y);
    d.features(i, 0) = x;
    d.features(i, 1) = y;
    d.labels[i] = cls;
  }
  // Interleave the classes so file order carries no label information.
  auto perm = rng.permutation(n);
  LabeledDomain out = d;
  for (std::size_t i = 0; i < n; ++i) {
    out.features(i, 0) = d.features(perm[i], 0);
    out.features(i, 1) = d.features(perm[i], 1);
    out.labels[i] = d.labels[perm[i]];
  }
  return out;
}

std::vector<std::vector<double>> cholesky(const std::vector<std::vector<double>>& a, std::size_t cls) {
  const std::size_t d = a.size();
  std::vector<std::vector<double>> l(d, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < d; ++i) {
    if (a[i].size() != d) throw ContractError(fmt::format("gaussian shift: class {} covariance not square", cls));
    for (std::size_t j = 0; j < d; ++j) {
      if (std::abs(a[i][j] - a[j][i]) > 1e-12 * (1.0 + std::abs(a[i][j]))) {
        throw ContractError(fmt::format("gaussian shift: class {} covariance not symmetric", cls));
      }
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    double s = a[j][j];
    for (std::size_t k = 0; k < j; ++k) s -= l[j][k] * l[j][k];
    if (!(s > 0.0)) throw ContractError(fmt::format("gaussian shift: class {} covariance not positive definite", cls));
    l[j][j] = std::sqrt(s);
    for (std::size_t i = j + 1; i < d; ++i) {
      double t = a[i][j];
      for (std::size_t k = 0; k < j; ++k) t -= l[i][k] * l[j][k];
      l[i][j] = t / l[j][j];
    }
  }
  return l;
}

}  // namespace

std::string to_string(DomainTag t) { return t == DomainTag::Source ? "source" : "target"; }

DomainTag parse_domain_tag(const std::string& s) {
  if (s == "source") return DomainTag::Source;
  if (s == "target") return DomainTag::Target;
  throw ContractError(fmt::format("unknown domain '{}' (expected source or target)", s));
}

void LabeledDomain::validate() const {
  if (labels.size() != features.rows()) {
    throw ContractError(fmt::format("domain: {} labels for {} rows", labels.size(), features.rows()));
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= classes) {
      throw ContractError(fmt::format("domain: label {} outside [0,{})", y, classes));
    }
  }
}

std::vector<std::size_t> LabeledDomain::class_counts() const {
  std::vector<std::size_t> c(classes, 0);
  for (int y : labels) ++c.at(static_cast<std::size_t>(y));
  return c;
}

int two_moons_label(double x, double y) { return curve_distance(0, x, y) <= curve_distance(1, x, y) ? 0 : 1; }

void unrotate_point(double rotation_deg, double& x, double& y) { rotate(-rotation_deg, x, y); }

DomainPair gen_two_moons_shift(const TwoMoonsSpec& spec) {
  if (spec.n < 4) throw ContractError(fmt::format("two moons: n={} < 4", spec.n));
  if (!(spec.rotation_deg >= 0.0 && spec.rotation_deg < 90.0)) {
    throw ContractError(fmt::format("two moons: rotation {} outside [0,90)", spec.rotation_deg));
  }
  if (!(spec.noise_sigma >= 0.0)) throw ContractError("two moons: negative noise");
  Rng root(spec.seed);
  Rng src_rng = root.fork(1), tgt_rng = root.fork(2);
  DomainPair p;
  p.source = draw_moons(src_rng, spec.n, spec.source_ratio, spec.noise_sigma, 0.0, DomainTag::Source);
  p.target = draw_moons(tgt_rng, spec.n, spec.target_ratio, spec.noise_sigma, spec.rotation_deg,
                        DomainTag::Target);
  return p;
}

DomainPair gen_gaussian_shift(const GaussianShiftSpec& spec) {
  const std::size_t classes = spec.means.size();
  if (classes < 2) throw ContractError("gaussian shift: need at least two classes");
  if (spec.covariances.size() != classes) throw ContractError("gaussian shift: one covariance per class");
  const std::size_t d = spec.means[0].size();
  if (d == 0) throw ContractError("gaussian shift: zero-dimensional means");
  if (spec.shift.size() != d) throw ContractError("gaussian shift: shift dimension mismatch");
  if (spec.n < classes) throw ContractError("gaussian shift: fewer points than classes");
  std::vector<std::vector<std::vector<double>>> chol;
  for (std::size_t c = 0; c < classes; ++c) {
    if (spec.means[c].size() != d || spec.covariances[c].size() != d) {
      throw ContractError(fmt::format("gaussian shift: class {} dimension mismatch", c));
    }
    chol.push_back(cholesky(spec.covariances[c], c));
  }
  Rng root(spec.seed);
  auto draw = [&](Rng rng, DomainTag tag, bool shifted) {
    LabeledDomain dom;
    dom.domain = tag;
    dom.classes = classes;
    dom.features = Tensor(spec.n, d);
    dom.labels.resize(spec.n);
    std::vector<double> e(d);
    for (std::size_t i = 0; i < spec.n; ++i) {
      const std::size_t c = i % classes;
      for (double& v : e) v = rng.normal();
      for (std::size_t r = 0; r < d; ++r) {
        double v = spec.means[c][r] + (shifted ? spec.shift[r] : 0.0);
        for (std::size_t k = 0; k <= r; ++k) v += chol[c][r][k] * e[k];
        dom.features(i, r) = v;
      }
      dom.labels[i] = static_cast<int>(c);
    }
    return dom;
  };
  return DomainPair{draw(root.fork(1), DomainTag::Source, false), draw(root.fork(2), DomainTag::Target, true)};
}

LabeledDomain parse_domain(std::istream& in, DomainTag domain, std::size_t classes) {
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  bool have_header = false;
  std::vector<double> values;
  LabeledDomain d;
  d.domain = domain;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::skippable(line)) continue;
    auto fields = text::split(text::trim(line), ',');
    if (!have_header) {
      if (fields.size() < 3 || text::trim(fields[fields.size() - 2]) != "label" ||
          text::trim(fields.back()) != "domain") {
        throw ParseError("domain file: header must be f1,...,fd,label,domain", lineno);
      }
      width = fields.size() - 2;
      for (std::size_t k = 0; k < width; ++k) {
        if (text::trim(fields[k]) != fmt::format("f{}", k + 1)) {
          throw ParseError(fmt::format("domain file: header column {} should be f{}", k + 1, k + 1), lineno);
        }
      }
      have_header = true;
      continue;
    }
    if (fields.size() != width + 2) {
      throw ParseError(fmt::format("domain file: expected {} fields, got {}", width + 2, fields.size()), lineno);
    }
    DomainTag tag;
    try {
      tag = parse_domain_tag(std::string(text::trim(fields.back())));
    } catch (const ContractError& e) {
      throw ParseError(e.what(), lineno);
    }
    if (tag != domain) continue;
    for (std::size_t k = 0; k < width; ++k) values.push_back(text::parse_double(fields[k], lineno));
    const long long y = text::parse_int(fields[width], lineno);
    if (y < 0 || (classes > 0 && static_cast<std::size_t>(y) >= classes)) {
      throw ContractError(fmt::format("domain file line {}: label {} out of range", lineno, y));
    }
    d.labels.push_back(static_cast<int>(y));
    ++rows;
  }
  if (!have_header) throw ContractError("domain file: empty");
  if (rows == 0) throw ContractError(fmt::format("domain file: no {} rows", to_string(domain)));
  d.features = Tensor(rows, width, std::move(values));
  if (classes == 0) {
    classes = static_cast<std::size_t>(*std::max_element(d.labels.begin(), d.labels.end())) + 1;
    classes = std::max<std::size_t>(classes, 2);
  }
  d.classes = classes;
  d.validate();
  return d;
}

LabeledDomain load_domain(const std::string& path, DomainTag domain, std::size_t classes,
                          const std::string& format) {
  if (format != "csv") throw ContractError(fmt::format("unknown domain file format '{}'", format));
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open domain file '{}'", path));
  return parse_domain(in, domain, classes);
}

DomainPair load_domain_pair(const std::string& path, std::size_t classes) {
  DomainPair p{load_domain(path, DomainTag::Source, classes), load_domain(path, DomainTag::Target, classes)};
  const std::size_t c = std::max(p.source.classes, p.target.classes);
  p.source.classes = p.target.classes = c;
  return p;
}

namespace {

void write_rows(std::ostream& out, const LabeledDomain& d) {
  for (std::size_t i = 0; i < d.size(); ++i) {
    std::string line;
    for (std::size_t k = 0; k < d.features.cols(); ++k) {
      line += text::format_double(d.features(i, k));
      line += ',';
    }
    out << line << d.labels[i] << ',' << to_string(d.domain) << '\n';
  }
}

void write_header(std::ostream& out, std::size_t width) {
  for (std::size_t k = 0; k < width; ++k) out << 'f' << k + 1 << ',';
  out << "label,domain\n";
}

}  // namespace

void write_domain(std::ostream& out, const LabeledDomain& d) {
  d.validate();
  write_header(out, d.features.cols());
  write_rows(out, d);
}

void write_domain_pair(std::ostream& out, const DomainPair& p) {
  p.source.validate();
  p.target.validate();
  if (p.source.features.cols() != p.target.features.cols()) {
    throw DimensionError("write_domain_pair: domains differ in width");
  }
  write_header(out, p.source.features.cols());
  write_rows(out, p.source);
  write_rows(out, p.target);
}

void write_domain_pair(const std::string& path, const DomainPair& p) {
  std::ofstream out(path);
  if (!out) throw IoError(fmt::format("cannot write domain file '{}'", path));
  write_domain_pair(out, p);
}

}  // namespace rlglc
