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

#include "dialret/retrieval.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "dialret/error.h"
#include "dialret/random.h"
#include "gtest/gtest.h"
#include "json.hpp"
#include "oracles.h"

namespace dialret {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

EncoderSpec Spec(const std::string& text) { return EncoderSpec::FromJson(json::parse(text)); }

TEST(BuildIndexTest, RowsMatchPerRecordEncoding) {
  const Corpus c = GenerateSynthetic({.n_videos = 3, .vocab_size = 40});
  const Encoder enc = FitEncoder(c, EncoderSpec{});
  const Index idx = BuildIndex(c, enc);
  ASSERT_EQ(idx.size(), 3u);
  EXPECT_EQ(idx.dim(), enc.dim());
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(idx.ids()[i], c.records[i].id);
    const Vector row(idx.row(i).begin(), idx.row(i).end());
    EXPECT_EQ(row, enc.EncodeItem(c.records[i]));
  }
  EXPECT_EQ(BuildIndex(c, enc), idx);
}

TEST(BuildIndexTest, SingleRecord) {
  const Corpus c = GenerateSynthetic({.n_videos = 1, .vocab_size = 40});
  const Encoder enc = FitEncoder(c, EncoderSpec{});
  const Index idx = BuildIndex(c, enc);
  EXPECT_EQ(idx.size(), 1u);
  EXPECT_EQ(idx.matrix().size(), enc.dim());
}

TEST(IndexIoTest, RoundTrip) {
  const Corpus c = GenerateSynthetic({});
  const Encoder enc = FitEncoder(c, EncoderSpec{});
  const Index idx = BuildIndex(c, enc);
  const fs::path path = fs::path(testing::TempDir()) / "index.bin";
  SaveIndex(idx, path);
  EXPECT_EQ(LoadIndex(path), idx);
}

TEST(IndexIoTest, RejectsForeignAndTruncatedFiles) {
  const fs::path path = fs::path(testing::TempDir()) / "not_index.bin";
  {
    std::ofstream out(path, std::ios::binary);
    out << "hello world, this is not an index";
  }
  EXPECT_THROW(LoadIndex(path), DataError);
  const Corpus c = GenerateSynthetic({.n_videos = 5, .vocab_size = 60});
  const Index idx = BuildIndex(c, FitEncoder(c, EncoderSpec{}));
  SaveIndex(idx, path);
  fs::resize_file(path, fs::file_size(path) - 3);
  EXPECT_THROW(LoadIndex(path), DataError);
}

TEST(QueryContextTest, EmptyHistoryIsTheQuery) {
  EXPECT_EQ(BuildQueryContext("show cooking videos", {}), "show cooking videos");
}

TEST(QueryContextTest, OneTurn) {
  EXPECT_EQ(BuildQueryContext("show cooking videos",
                              {{"which cuisine do you prefer?", "mediterranean", 0}}),
            "show cooking videos | which cuisine do you prefer? | mediterranean");
}

TEST(QueryContextTest, TurnsInOrder) {
  const std::string s = BuildQueryContext("t", {{"q1", "a1", 0}, {"q2", "a2", 1}});
  EXPECT_EQ(s, "t | q1 | a1 | q2 | a2");
  EXPECT_LT(s.find("a1"), s.find("q2"));
}

TEST(SoftmaxTest, ClosedForm) {
  const std::vector<double> logits = {std::log(2.0), 0.0, 0.0};
  const auto p = Softmax(logits);
  EXPECT_NEAR(p[0], 0.5, 1e-15);
  EXPECT_NEAR(p[1], 0.25, 1e-15);
  EXPECT_NEAR(p[2], 0.25, 1e-15);
}

TEST(SoftmaxTest, StableForLargeLogits) {
  const std::vector<double> logits = {1000.0, 999.0, -1000.0};
  const auto p = Softmax(logits);
  for (double x : p) EXPECT_TRUE(std::isfinite(x));
  EXPECT_NEAR(p[0] + p[1] + p[2], 1.0, 1e-12);
}

TEST(MakeResultTest, IdenticalScoresAreUniformAndTiedByPosition) {
  const std::vector<double> scores(7, 0.3);
  const RetrievalResult r = MakeResult(scores, 1.0);
  for (std::size_t i = 0; i < 7; ++i) {
    EXPECT_NEAR(r.probabilities[i], 1.0 / 7, 1e-15);
    EXPECT_EQ(r.ranking[i], i);
    EXPECT_EQ(r.rank[i], i + 1);
  }
  EXPECT_EQ(r.TopK(3), (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(r.TopK(99).size(), 7u);
}

TEST(VrmTest, AllRowsIdenticalGivesUniform) {
  Corpus c = GenerateSynthetic({.n_videos = 5, .vocab_size = 60});
  for (auto& r : c.records) r.summary = "same summary";
  const Encoder enc = FitEncoder(c, EncoderSpec{});
  const Index idx = BuildIndex(c, enc);
  const auto r = Vrm(c.records[3].initial_query, {}, enc, idx);
  for (double p : r.probabilities) EXPECT_NEAR(p, 0.2, 1e-15);
}

TEST(VrmTest, RejectsIndexFromAnotherEncoder) {
  const Corpus c = GenerateSynthetic({});
  const Encoder a = FitEncoder(c, EncoderSpec{});
  const Encoder b = FitEncoder(c, Spec(R"({"kind":"tfidf","tau":0.5})"));
  EXPECT_THROW(Vrm("x", {}, b, BuildIndex(c, a)), DataError);
}

// Brute-force check against independent scoring, over several corpora,
// encoders and query contexts.
TEST(VrmTest, RankingMatchesBruteForce) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    for (std::size_t n : {3u, 17u, 50u}) {
      const Corpus c = GenerateSynthetic({.n_videos = n, .seed = seed});
      for (const char* spec : {R"({"kind":"tfidf"})", R"({"kind":"hashed_ngram","dim":24})",
                               R"({"kind":"tfidf","normalize":false,"tau":3})"}) {
        const Encoder enc = FitEncoder(c, Spec(spec));
        const Index idx = BuildIndex(c, enc);
        for (std::size_t t = 0; t < n; t += 4) {
          DialogHistory h(c.records[t].qa_pool.begin(), c.records[t].qa_pool.begin() + t % 3);
          const RetrievalResult r = Vrm(c.records[t].initial_query, h, enc, idx);
          const auto scores =
              oracle::ScoreCorpus(c, enc, oracle::Context(c.records[t].initial_query, h));
          for (std::size_t i = 0; i < n; ++i) {
            ASSERT_EQ(r.rank[i], oracle::BruteRank(scores, i)) << spec;
            ASSERT_EQ(r.ranking[r.rank[i] - 1], i);
          }
          const double sum = std::accumulate(r.probabilities.begin(), r.probabilities.end(), 0.0);
          EXPECT_NEAR(sum, 1.0, 1e-9);
          for (double p : r.probabilities) EXPECT_GT(p, 0.0);
        }
      }
    }
  }
}

TEST(VrmTest, TemperaturePreservesRanking) {
  const Corpus c = GenerateSynthetic({.n_videos = 50});
  const Encoder base = FitEncoder(c, EncoderSpec{});
  const Index idx = BuildIndex(c, base);
  for (double tau : {0.01, 0.1, 0.7, 5.0, 1000.0}) {
    EncoderSpec spec;
    spec.tau = tau;
    const Encoder enc = FitEncoder(c, spec);
    const Index idx2 = BuildIndex(c, enc);
    for (const auto& rec : c.records) {
      const auto a = Vrm(rec.initial_query, {}, base, idx);
      const auto b = Vrm(rec.initial_query, {}, enc, idx2);
      ASSERT_EQ(a.ranking, b.ranking) << "tau " << tau;
      const double sum = std::accumulate(b.probabilities.begin(), b.probabilities.end(), 0.0);
      EXPECT_NEAR(sum, 1.0, 1e-9);
    }
  }
}

TEST(VrmTest, DiscriminativeQueryFindsTarget) {
  const Corpus c = GenerateSynthetic({});
  const Encoder enc = FitEncoder(c, EncoderSpec{});
  const Index idx = BuildIndex(c, enc);
  const auto& v3 = c.records[3];
  const auto r = Vrm(v3.initial_query, {}, enc, idx);
  const auto scores = oracle::ScoreCorpus(c, enc, v3.initial_query);
  EXPECT_EQ(r.rank[3], oracle::BruteRank(scores, 3));
}

TEST(VrmTest, RandomScoresAgainstBruteForce) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.UniformIndex(50);
    std::vector<double> scores(n);
    // Coarse values force frequent exact ties.
    for (double& s : scores) s = static_cast<double>(rng.UniformIndex(5)) / 4.0;
    const auto r = MakeResult(scores, 0.5);
    for (std::size_t i = 0; i < n; ++i) ASSERT_EQ(r.rank[i], oracle::BruteRank(scores, i));
    std::vector<double> scaled;
    for (double s : scores) scaled.push_back(s / 0.5);
    const auto p = oracle::NaiveSoftmax(scaled);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(r.probabilities[i], p[i], 1e-15);
  }
}

}  // namespace
}  // namespace dialret
