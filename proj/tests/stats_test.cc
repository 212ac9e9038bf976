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

#include <boost/math/distributions/binomial.hpp>
#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <random>

#include "error.h"
#include "oracles.h"
#include "stats.h"

namespace cxrlabel {
namespace {

using testing::BetaOracle;
using testing::McNemarOracle;


TEST(ClopperPearsonTest, MatchesPublishedIntervals) {
  for (const auto& g : testing::kGoldenIntervals) {
    const Interval iv = ClopperPearson(g.x, testing::kGoldenN);
    EXPECT_NEAR(iv.lower, g.lower, 5e-4 + 1e-9) << "x=" << g.x;
    EXPECT_NEAR(iv.upper, g.upper, 5e-4 + 1e-9) << "x=" << g.x;
  }
}

TEST(ClopperPearsonTest, MatchesBetaQuantileOracle) {
  for (std::uint64_t n : {1u, 2u, 5u, 17u, 100u, 300u, 1000u}) {
    for (std::uint64_t x = 0; x <= n; x += (n > 100 ? 7 : 1)) {
      for (double alpha : {0.01, 0.05, 0.1}) {
        const Interval got = ClopperPearson(x, n, alpha);
        const Interval want = BetaOracle(x, n, alpha);
        EXPECT_NEAR(got.lower, want.lower, 1e-8) << x << "/" << n << " alpha " << alpha;
        EXPECT_NEAR(got.upper, want.upper, 1e-8) << x << "/" << n << " alpha " << alpha;
      }
    }
  }
}

TEST(ClopperPearsonTest, BoundaryCases) {
  EXPECT_EQ(ClopperPearson(0, 10).lower, 0.0);
  EXPECT_EQ(ClopperPearson(10, 10).upper, 1.0);
  const Interval full = ClopperPearson(300, 300);
  EXPECT_NEAR(full.lower, std::pow(0.025, 1.0 / 300), 1e-8);
  const Interval none = ClopperPearson(0, 300);
  EXPECT_NEAR(none.upper, 1 - std::pow(0.025, 1.0 / 300), 1e-8);
}

TEST(ClopperPearsonTest, CoversPointAndNarrowsWithN) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    const std::uint64_t n = 1 + rng() % 2000;
    const std::uint64_t x = rng() % (n + 1);
    const Interval iv = ClopperPearson(x, n);
    const double p = static_cast<double>(x) / static_cast<double>(n);
    EXPECT_LE(iv.lower, p + 1e-12);
    EXPECT_GE(iv.upper, p - 1e-12);
    EXPECT_LE(0.0, iv.lower);
    EXPECT_LE(iv.upper, 1.0);
    const Interval wider = ClopperPearson(x, n, 0.01);
    EXPECT_LE(wider.lower, iv.lower + 1e-12);
    EXPECT_GE(wider.upper, iv.upper - 1e-12);
  }
  EXPECT_LT(ClopperPearson(950, 1000).upper - ClopperPearson(950, 1000).lower,
            ClopperPearson(95, 100).upper - ClopperPearson(95, 100).lower);
}

TEST(ClopperPearsonTest, RejectsBadArguments) {
  for (auto call : {+[] { ClopperPearson(1, 0); }, +[] { ClopperPearson(5, 4); },
                    +[] { ClopperPearson(1, 4, 0.0); }, +[] { ClopperPearson(1, 4, 1.0); }}) {
    try {
      call();
      ADD_FAILURE() << "expected DomainError";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kDomainError);
    }
  }
}

TEST(ClopperPearsonTest, LargeNIsFast) {
  const auto start = std::chrono::steady_clock::now();
  const Interval iv = ClopperPearson(49000, 50000);
  const auto elapsed = std::chrono::steady_clock::now() - start;
  const Interval want = BetaOracle(49000, 50000, 0.05);
  EXPECT_NEAR(iv.lower, want.lower, 1e-8);
  EXPECT_NEAR(iv.upper, want.upper, 1e-8);
  EXPECT_LT(std::chrono::duration<double>(elapsed).count(), 1.0);
}

TEST(BinomialTest, MatchesBoost) {
  for (std::uint64_t n : {1u, 10u, 300u, 5000u}) {
    for (double p : {0.001, 0.3, 0.5, 0.97}) {
      boost::math::binomial_distribution<> d(static_cast<double>(n), p);
      for (std::uint64_t k = 0; k <= n; k += 1 + n / 40) {
        const double kd = static_cast<double>(k);
        EXPECT_NEAR(BinomialPmf(k, n, p), boost::math::pdf(d, kd), 1e-12);
        EXPECT_NEAR(BinomialCdf(k, n, p), boost::math::cdf(d, kd), 1e-11);
        const double upper = k == 0 ? 1.0 : boost::math::cdf(boost::math::complement(d, kd - 1));
        EXPECT_NEAR(BinomialUpperTail(k, n, p), upper, 1e-11);
      }
    }
  }
}

TEST(McNemarTest, KnownValues) {
  EXPECT_DOUBLE_EQ(McNemarExact(10, 0).p_value, 2 * std::pow(0.5, 10));
  EXPECT_DOUBLE_EQ(McNemarExact(0, 10).p_value, 2 * std::pow(0.5, 10));
  for (std::uint64_t k : {1u, 3u, 8u, 25u}) EXPECT_DOUBLE_EQ(McNemarExact(k, k).p_value, 1.0);
  const McNemarResult none = McNemarExact(0, 0);
  EXPECT_TRUE(none.no_discordance);
  EXPECT_DOUBLE_EQ(none.p_value, 1.0);
}

TEST(McNemarTest, MatchesEnumeration) {
  for (std::uint64_t b = 0; b <= 30; ++b) {
    for (std::uint64_t c = 0; c <= 30; ++c) {
      const McNemarResult r = McNemarExact(b, c);
      EXPECT_EQ(r.b, b);
      EXPECT_EQ(r.c, c);
      EXPECT_NEAR(r.p_value, McNemarOracle(b, c), 1e-12) << b << "," << c;
      EXPECT_DOUBLE_EQ(r.p_value, McNemarExact(c, b).p_value);
    }
  }
}

}  // namespace
}  // namespace cxrlabel
