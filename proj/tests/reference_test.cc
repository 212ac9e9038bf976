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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "error.h"
#include "fixtures.h"
#include "label_matrix.h"
#include "oracles.h"
#include "reference.h"

namespace cxrlabel {
namespace {

using testing::MakeFixture;
using testing::EnumeratedState;
using testing::KappaOracle;
using testing::TempDir;
using testing::VotePattern;

TEST(AggregateTest, AllVotePatternsMatchEnumerator) {
  int positives = 0, negatives = 0;
  for (int code = 0; code < 729; ++code) {
    const auto votes = VotePattern(code);
    const CellState got = Aggregate(votes, 4);
    EXPECT_EQ(got, EnumeratedState(votes)) << "pattern " << code;
    positives += got == CellState::kPositive;
    negatives += got == CellState::kNegative;
  }
  // Patterns with >= 4 ones among six ternary votes: sum_k C(6,k) 2^(6-k).
  EXPECT_EQ(positives, 15 * 4 + 6 * 2 + 1);
  EXPECT_EQ(negatives, positives);
}

TEST(AggregateTest, InvariantUnderReaderOrder) {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 10000; ++i) {
    auto votes = VotePattern(static_cast<int>(rng() % 729));
    const CellState before = Aggregate(votes, 4);
    std::shuffle(votes.begin(), votes.end(), rng);
    ASSERT_EQ(Aggregate(votes, 4), before);
  }
}

TEST(AggregateTest, QuorumStaysAbsolute) {
  const std::array<int, 6> three_yes = {1, 1, 1, -1, -1, -1};
  EXPECT_EQ(Aggregate(three_yes, 4), CellState::kUnresolved);
  EXPECT_EQ(Aggregate(three_yes, 3), CellState::kPositive);
}

TEST(AggregateTest, RejectsBadInput) {
  const std::array<int, 6> bad = {1, 1, 1, 1, 2, 0};
  EXPECT_THROW(Aggregate(bad, 4), Error);
  try {
    Aggregate(bad, 4);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBadVote);
  }
  const std::array<int, 3> few = {1, 1, 1};
  try {
    Aggregate(few, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
}

TEST(KappaTest, Properties) {
  const std::vector<int> a = {1, 0, 1, 1, 0, 0, 1, 0};
  EXPECT_DOUBLE_EQ(CohenKappa(a, a).kappa, 1.0);
  std::vector<int> flipped;
  for (int v : a) flipped.push_back(1 - v);
  EXPECT_DOUBLE_EQ(CohenKappa(a, flipped).kappa, -1.0);
  // Independent marginals at 1/2: p_o = p_e = 1/2.
  const std::vector<int> x = {1, 1, 0, 0}, y = {1, 0, 1, 0};
  EXPECT_DOUBLE_EQ(CohenKappa(x, y).kappa, 0.0);
  const std::vector<int> constant = {1, 1, 1};
  EXPECT_DOUBLE_EQ(CohenKappa(constant, constant).kappa, 1.0);
}

TEST(KappaTest, SymmetricAndMatchesOracle) {
  std::mt19937_64 rng(1234);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 2 + rng() % 60;
    std::vector<int> a(n), b(n);
    for (std::size_t k = 0; k < n; ++k) {
      a[k] = rng() % 6 == 0 ? -1 : static_cast<int>(rng() % 2);
      b[k] = rng() % 6 == 0 ? -1 : (rng() % 4 == 0 ? 1 - std::max(a[k], 0) : std::max(a[k], 0));
    }
    bool overlap = false;
    for (std::size_t k = 0; k < n; ++k) overlap = overlap || (a[k] >= 0 && b[k] >= 0);
    if (!overlap) continue;
    const KappaResult ab = CohenKappa(a, b);
    const KappaResult ba = CohenKappa(b, a);
    ASSERT_NEAR(ab.kappa, ba.kappa, 1e-12);
    ASSERT_NEAR(ab.kappa, KappaOracle(a, b), 1e-12);
    ASSERT_LE(ab.kappa, 1.0 + 1e-12);
    ASSERT_GE(ab.kappa, -1.0 - 1e-12);
  }
}

TEST(KappaTest, ErrorPaths) {
  const std::vector<int> a = {-1, -1}, b = {1, 0}, c = {1};
  try {
    CohenKappa(a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoOverlap);
  }
  try {
    CohenKappa(b, c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
}

TEST(ReferenceTest, BuildFromPanelMatchesPerCellAggregation) {
  const auto fx = MakeFixture({.reports = 40, .seed = 3, .reader_noise = 0.2});
  const ReferenceStandard ref = BuildReference(fx.annotations);
  ASSERT_EQ(ref.size(), 40u);
  EXPECT_TRUE(std::is_sorted(ref.report_ids().begin(), ref.report_ids().end()));
  std::size_t unresolved = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    for (LabelId l = 0; l < kNumLabels; ++l) {
      std::array<int, 6> votes{};
      std::size_t k = 0;
      for (const auto& a : fx.annotations) {
        if (a.report_id == ref.report_ids()[i]) votes[k++] = a.values[l];
      }
      ASSERT_EQ(k, 6u);
      EXPECT_EQ(ref.row(i)[l], EnumeratedState(votes));
      unresolved += ref.row(i)[l] == CellState::kUnresolved;
    }
  }
  EXPECT_GT(unresolved, 0u);
}

TEST(ReferenceTest, PanelErrors) {
  auto fx = MakeFixture({.reports = 3});
  auto missing = fx.annotations;
  missing.pop_back();
  try {
    BuildReference(missing);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingReader);
  }
  auto dup = fx.annotations;
  dup.push_back(dup.front());
  try {
    BuildReference(dup);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDuplicateReader);
  }
}

TEST(ReferenceTest, CsvRoundTrips) {
  TempDir dir;
  const auto fx = MakeFixture({.reports = 25, .reader_noise = 0.2});
  WriteAnnotationsCsv(dir / "ann.csv", fx.annotations);
  const auto back = ReadAnnotationsCsv(dir / "ann.csv");
  ASSERT_EQ(back.size(), fx.annotations.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].reader_id, fx.annotations[i].reader_id);
    EXPECT_EQ(back[i].values, fx.annotations[i].values);
  }
  const ReferenceStandard ref = BuildReference(back);
  ref.WriteCsv(dir / "ref.csv");
  EXPECT_TRUE(ReferenceStandard::ReadCsv(dir / "ref.csv") == ref);
}

TEST(ReferenceTest, FromLabelMatrixResolvesEverything) {
  const auto fx = MakeFixture({.reports = 10});
  const ReferenceStandard ref = ReferenceStandard::FromLabelMatrix(fx.truth);
  for (LabelId l = 0; l < kNumLabels; ++l) EXPECT_EQ(ref.ResolvedCount(l), 10u);
}

TEST(InterraterTest, MeanOverReaderPairs) {
  const auto fx = MakeFixture({.reports = 60, .seed = 5, .reader_noise = 0.1});
  const InterraterSummary s = SummarizeInterrater(fx.annotations, 0);
  EXPECT_EQ(s.pairs.size(), 15u);
  EXPECT_EQ(s.computed_pairs, 15u);
  double sum = 0;
  for (const auto& p : s.pairs) {
    ASSERT_TRUE(p.result.has_value());
    std::vector<int> a, b;
    for (const auto& x : fx.annotations) {
      if (x.reader_id != p.reader_a) continue;
      for (const auto& y : fx.annotations) {
        if (y.reader_id == p.reader_b && y.report_id == x.report_id) {
          a.push_back(x.values[0]);
          b.push_back(y.values[0]);
        }
      }
    }
    EXPECT_NEAR(p.result->kappa, KappaOracle(a, b), 1e-12);
    sum += p.result->kappa;
  }
  EXPECT_NEAR(s.mean_kappa, sum / 15, 1e-12);
  EXPECT_GT(s.mean_kappa, 0.5);
}

}  // namespace
}  // namespace cxrlabel
