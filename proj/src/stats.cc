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

#include "stats.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "error.h"

namespace cxrlabel {
namespace {

double LogChoose(std::uint64_t n, std::uint64_t k) {
  const auto dn = static_cast<double>(n);
  const auto dk = static_cast<double>(k);
  return std::lgamma(dn + 1) - std::lgamma(dk + 1) - std::lgamma(dn - dk + 1);
}

double LogPmf(std::uint64_t k, std::uint64_t n, double log_p, double log_q) {
  return LogChoose(n, k) + static_cast<double>(k) * log_p + static_cast<double>(n - k) * log_q;
}

// Sum of pmf over [first, last], inclusive, with 0 < p < 1.
double SumPmf(std::uint64_t first, std::uint64_t last, std::uint64_t n, double p) {
  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(last - first + 1));
  double max_term = -INFINITY;
  for (std::uint64_t k = first; k <= last; ++k) {
    terms.push_back(LogPmf(k, n, log_p, log_q));
    max_term = std::max(max_term, terms.back());
  }
  double sum = 0;
  for (double t : terms) sum += std::exp(t - max_term);
  return std::min(1.0, std::exp(max_term) * sum);
}

}  // namespace

double BinomialPmf(std::uint64_t k, std::uint64_t n, double p) {
  if (k > n) return 0;
  if (p <= 0) return k == 0 ? 1 : 0;
  if (p >= 1) return k == n ? 1 : 0;
  return std::exp(LogPmf(k, n, std::log(p), std::log1p(-p)));
}

double BinomialCdf(std::uint64_t k, std::uint64_t n, double p) {
  if (k >= n) return 1;
  if (p <= 0) return 1;
  if (p >= 1) return 0;
  return SumPmf(0, k, n, p);
}

double BinomialUpperTail(std::uint64_t k, std::uint64_t n, double p) {
  if (k == 0) return 1;
  if (k > n) return 0;
  if (p <= 0) return 0;
  if (p >= 1) return 1;
  return SumPmf(k, n, n, p);
}

Interval ClopperPearson(std::uint64_t x, std::uint64_t n, double alpha) {
  if (n < 1 || x > n || !(alpha > 0 && alpha < 1)) {
    Fail(ErrorCode::kDomainError, "clopper_pearson: need 0 <= x <= n, n >= 1, 0 < alpha < 1 (x=" +
                                      std::to_string(x) + ", n=" + std::to_string(n) +
                                      ", alpha=" + std::to_string(alpha) + ")");
  }
  const double target = alpha / 2;
  Interval ci;

  if (x > 0) {
    // P[X >= x] increases with p.
    double lo = 0, hi = 1;
    while (hi - lo > kClopperPearsonTolerance) {
      const double mid = 0.5 * (lo + hi);
      (BinomialUpperTail(x, n, mid) < target ? lo : hi) = mid;
    }
    ci.lower = 0.5 * (lo + hi);
  }
  if (x < n) {
    // P[X <= x] decreases with p.
    double lo = 0, hi = 1;
    while (hi - lo > kClopperPearsonTolerance) {
      const double mid = 0.5 * (lo + hi);
      (BinomialCdf(x, n, mid) > target ? lo : hi) = mid;
    }
    ci.upper = 0.5 * (lo + hi);
  }
  return ci;
}

McNemarResult McNemarExact(std::uint64_t b, std::uint64_t c) {
  McNemarResult result;
  result.b = b;
  result.c = c;
  const std::uint64_t n = b + c;
  if (n == 0) {
    result.no_discordance = true;
    result.p_value = 1.0;
    return result;
  }
  result.p_value = std::min(1.0, 2.0 * BinomialCdf(std::min(b, c), n, 0.5));
  return result;
}

}  // namespace cxrlabel
