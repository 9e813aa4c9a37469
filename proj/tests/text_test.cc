// Copyright 2026 The Dialret Authors.
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

#include "dialret/text.h"

#include <atomic>
#include <stdexcept>
#include <vector>

#include "dialret/parallel.h"
#include "dialret/random.h"
#include "gtest/gtest.h"
#include "oracles.h"

namespace dialret {
namespace {

TEST(TrimTest, StripsSurroundingWhitespace) {
  EXPECT_EQ(Trim("  hi there \t\n"), "hi there");
  EXPECT_EQ(Trim(""), "");
  EXPECT_EQ(Trim(" \n "), "");
}

TEST(TokenizeTest, LowercasesAndSplitsOnPunctuation) {
  EXPECT_EQ(Tokenize("Which cuisine, do you PREFER?"),
            (std::vector<std::string>{"which", "cuisine", "do", "you", "prefer"}));
  EXPECT_TRUE(Tokenize("").empty());
  EXPECT_TRUE(Tokenize("?!  ..").empty());
  EXPECT_EQ(Tokenize("a1-b2_c3"), (std::vector<std::string>{"a1", "b2", "c3"}));
}

TEST(TokenizeTest, KeepsNonAsciiLettersInsideTokens) {
  EXPECT_EQ(Tokenize("café au lait"),
            (std::vector<std::string>{"café", "au", "lait"}));
}

TEST(TokenizeTest, AgreesWithReferenceSplitter) {
  const std::vector<std::string> samples = {
      "Show cooking videos | which cuisine do you prefer? | mediterranean",
      "  MiXeD   case\tand\nnewlines ", "x", "über-straße 42"};
  for (const auto& s : samples) EXPECT_EQ(Tokenize(s), oracle::Words(s)) << s;
}

TEST(Fnv1aTest, MatchesPublishedVectors) {
  EXPECT_EQ(Fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(Fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(Fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(HexTest, SixteenLowercaseDigits) {
  EXPECT_EQ(HexU64(0), "0000000000000000");
  EXPECT_EQ(HexU64(0xDEADBEEFULL), "00000000deadbeef");
}

TEST(RngTest, SameSeedSameStream) {
  Rng a(7), b(7), c(8);
  std::vector<std::size_t> xs, ys, zs;
  for (int i = 0; i < 50; ++i) {
    xs.push_back(a.UniformIndex(13));
    ys.push_back(b.UniformIndex(13));
    zs.push_back(c.UniformIndex(13));
  }
  EXPECT_EQ(xs, ys);
  EXPECT_NE(xs, zs);
  for (auto x : xs) EXPECT_LT(x, 13u);
}

TEST(RngTest, ShuffleIsAPermutation) {
  std::vector<int> v(100);
  for (int i = 0; i < 100; ++i) v[i] = i;
  Rng rng(3);
  rng.Shuffle(std::span<int>(v));
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sorted[i], i);
}

TEST(RngTest, UnitInterval) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.UniformUnit();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(MixSeedTest, SensitiveToBothInputs) {
  EXPECT_NE(MixSeed(1, 2), MixSeed(2, 1));
  EXPECT_NE(MixSeed(1, 2), MixSeed(1, 3));
  EXPECT_EQ(MixSeed(5, 9), MixSeed(5, 9));
}

TEST(ParallelForTest, VisitsEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(257);
  ParallelFor(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(ParallelForTest, RethrowsLowestFailingIndex) {
  try {
    ParallelFor(100, 4, [](std::size_t i) {
      if (i == 30 || i == 70) throw std::runtime_error(std::to_string(i));
    });
    FAIL() << "expected an exception";
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "30");
  }
}

}  // namespace
}  // namespace dialret
