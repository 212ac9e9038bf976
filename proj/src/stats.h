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

#ifndef CXRLABEL_STATS_H_
#define CXRLABEL_STATS_H_

#include <cstdint>

namespace cxrlabel {

// Exact binomial distribution helpers. Terms are summed in log space so
// that n in the tens of thousands stays accurate.
double BinomialPmf(std::uint64_t k, std::uint64_t n, double p);
// P[X <= k].
double BinomialCdf(std::uint64_t k, std::uint64_t n, double p);
// P[X >= k], summed directly rather than as 1 - cdf.
double BinomialUpperTail(std::uint64_t k, std::uint64_t n, double p);

struct Interval {
  double lower = 0;
  double upper = 1;
};

inline constexpr double kClopperPearsonTolerance = 1e-9;

// Exact two-sided Clopper-Pearson interval for x successes out of n.
//   lower = 0 if x == 0, else the p with P[Bin(n, p) >= x] = alpha / 2
//   upper = 1 if x == n, else the p with P[Bin(n, p) <= x] = alpha / 2
// Both endpoints are found by bisection on the binomial CDF to an absolute
// tolerance of 1e-9. Throws kDomainError unless 0 <= x <= n, n >= 1 and
// 0 < alpha < 1.
Interval ClopperPearson(std::uint64_t x, std::uint64_t n, double alpha = 0.05);

struct McNemarResult {
  double p_value = 1.0;
  // b: first rater correct only; c: second rater correct only.
  std::uint64_t b = 0;
  std::uint64_t c = 0;
  bool no_discordance = false;
};

// Exact (binomial) McNemar test: two-sided p over b + c trials at 0.5,
// min(1, 2 P[X <= min(b, c)]).
McNemarResult McNemarExact(std::uint64_t b, std::uint64_t c);

}  // namespace cxrlabel

#endif  // CXRLABEL_STATS_H_
