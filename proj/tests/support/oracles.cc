/*
 * Copyright 2026 The cxrlabel Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "oracles.h"

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/binomial.hpp>

#include <algorithm>
#include <string>

namespace cxrlabel::testing {

Interval BetaOracle(std::uint64_t x, std::uint64_t n, double alpha) {
  Interval iv;
  if (x > 0) {
    boost::math::beta_distribution<> lo(static_cast<double>(x), static_cast<double>(n - x + 1));
    iv.lower = boost::math::quantile(lo, alpha / 2);
  }
  if (x < n) {
    boost::math::beta_distribution<> hi(static_cast<double>(x + 1), static_cast<double>(n - x));
    iv.upper = boost::math::quantile(hi, 1 - alpha / 2);
  }
  return iv;
}

double McNemarOracle(std::uint64_t b, std::uint64_t c) {
  const std::uint64_t n = b + c;
  if (n == 0) return 1.0;
  boost::math::binomial_distribution<> d(static_cast<double>(n), 0.5);
  const double observed = boost::math::pdf(d, static_cast<double>(b));
  double p = 0;
  for (std::uint64_t k = 0; k <= n; ++k) {
    const double pk = boost::math::pdf(d, static_cast<double>(k));
    if (pk <= observed * (1 + 1e-12)) p += pk;
  }
  return std::min(1.0, p);
}

PredRefPair RandomPredRefPair(std::mt19937_64& rng, std::size_t n) {
  PredRefPair p;
  std::uniform_real_distribution<double> unit(0, 1);
  std::array<double, kNumLabels> prevalence{};
  for (auto& v : prevalence) v = unit(rng) * unit(rng);  // skewed toward rare
  const double unresolved = unit(rng) * 0.1;
  const double error = unit(rng) * 0.3;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string id = "r" + std::to_string(i);
    LabelValues values{};
    ReferenceRow row{};
    for (LabelId l = 0; l < kNumLabels; ++l) {
      const bool truth = unit(rng) < prevalence[l];
      row[l] = unit(rng) < unresolved ? CellState::kUnresolved
                                      : (truth ? CellState::kPositive : CellState::kNegative);
      values[l] = (unit(rng) < error) ? !truth : truth;
    }
    p.pred.Add(id, values);
    p.ref.Add(id, row);
  }
  return p;
}

namespace {
double Div(double a, double b) { return b == 0 ? 0.0 : a / b; }
}  // namespace

MetricOracle BruteForceMetrics(const LabelMatrix& pred, const ReferenceStandard& ref) {
  MetricOracle o;
  double tp = 0, fp = 0, fn = 0, tn = 0;
  int included = 0;
  for (LabelId l = 0; l < kNumLabels; ++l) {
    OracleLabel& ol = o.labels[l];
    for (std::size_t i = 0; i < ref.size(); ++i) {
      const CellState s = ref.row(i)[l];
      if (s == CellState::kUnresolved) continue;
      const bool truth = s == CellState::kPositive;
      const bool guess = (*pred.Find(ref.report_ids()[i]))[l] == 1;
      if (truth && guess) ++ol.tp;
      if (!truth && guess) ++ol.fp;
      if (truth && !guess) ++ol.fn;
      if (!truth && !guess) ++ol.tn;
    }
    ol.acc = Div(ol.tp + ol.tn, ol.tp + ol.fp + ol.fn + ol.tn);
    ol.prec = Div(ol.tp, ol.tp + ol.fp);
    ol.rec = Div(ol.tp, ol.tp + ol.fn);
    ol.f1 = Div(2.0 * ol.tp, 2.0 * ol.tp + ol.fp + ol.fn);
    ol.included = ol.tp + ol.fn + ol.fp > 0;
    if (ol.included) {
      ++included;
      o.macro_acc += ol.acc;
      o.macro_prec += ol.prec;
      o.macro_rec += ol.rec;
      o.macro_f1 += ol.f1;
    }
    tp += ol.tp;
    fp += ol.fp;
    fn += ol.fn;
    tn += ol.tn;
  }
  o.macro_acc = Div(o.macro_acc, included);
  o.macro_prec = Div(o.macro_prec, included);
  o.macro_rec = Div(o.macro_rec, included);
  o.macro_f1 = Div(o.macro_f1, included);
  o.micro_acc = Div(tp + tn, tp + fp + fn + tn);
  o.micro_prec = Div(tp, tp + fp);
  o.micro_rec = Div(tp, tp + fn);
  o.micro_f1 = Div(2 * tp, 2 * tp + fp + fn);
  return o;
}

std::array<int, 6> VotePattern(int code) {
  constexpr int kValues[3] = {-1, 0, 1};
  std::array<int, 6> votes{};
  for (int k = 0; k < 6; ++k) {
    votes[k] = kValues[code % 3];
    code /= 3;
  }
  return votes;
}

CellState EnumeratedState(const std::array<int, 6>& votes) {
  int ones = 0, zeros = 0;
  for (int v : votes) {
    ones += v == 1;
    zeros += v == 0;
  }
  if (ones >= 4) return CellState::kPositive;
  if (zeros >= 4) return CellState::kNegative;
  return CellState::kUnresolved;
}

double KappaOracle(const std::vector<int>& a, const std::vector<int>& b) {
  double n11 = 0, n10 = 0, n01 = 0, n00 = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < 0 || b[i] < 0) continue;
    (a[i] ? (b[i] ? n11 : n10) : (b[i] ? n01 : n00)) += 1;
  }
  const double n = n11 + n10 + n01 + n00;
  const double po = (n11 + n00) / n;
  const double pa = (n11 + n10) / n, pb = (n11 + n01) / n;
  const double pe = pa * pb + (1 - pa) * (1 - pb);
  if (pe == 1) return po == 1 ? 1 : 0;
  return (po - pe) / (1 - pe);
}

}  // namespace cxrlabel::testing
