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

#include "dialret/encoder.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "dialret/error.h"
#include "gtest/gtest.h"
#include "json.hpp"
#include "oracles.h"

namespace dialret {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

Corpus TwoDocCorpus() {
  Corpus c;
  c.records.push_back({"d0", "a b", "", {}, std::nullopt});
  c.records.push_back({"d1", "a c", "", {}, std::nullopt});
  return c;
}

double Norm(const Vector& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

EncoderSpec Spec(const std::string& text) { return EncoderSpec::FromJson(json::parse(text)); }

TEST(TfidfTest, HandComputedIdf) {
  const std::vector<std::string> docs = {"a b", "a c"};
  const TfidfTable t = FitTfidf(docs);
  ASSERT_EQ(t.vocab, (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(t.df, (std::vector<std::size_t>{2, 1, 1}));
  EXPECT_DOUBLE_EQ(t.idf[0], std::log(2.0 / 3.0) + 1.0);
  EXPECT_DOUBLE_EQ(t.idf[1], 1.0);
  EXPECT_DOUBLE_EQ(t.idf[2], 1.0);
  const auto ref = oracle::Idf(docs);
  EXPECT_DOUBLE_EQ(ref.at("a"), t.idf[0]);
}

TEST(TfidfTest, EncodeTextWeightsCountsByIdf) {
  const Encoder enc = FitEncoder(TwoDocCorpus(), EncoderSpec{});
  const Vector v = enc.EncodeText("a a b");
  const double ia = std::log(2.0 / 3.0) + 1.0;
  const double n = std::sqrt(4 * ia * ia + 1.0);
  ASSERT_EQ(v.size(), 3u);
  EXPECT_NEAR(v[0], 2 * ia / n, 1e-15);
  EXPECT_NEAR(v[1], 1.0 / n, 1e-15);
  EXPECT_EQ(v[2], 0.0);
}

TEST(TfidfTest, EncodeItemUsesSummary) {
  const Corpus c = TwoDocCorpus();
  const Encoder enc = FitEncoder(c, EncoderSpec{});
  const auto idf = oracle::Idf({"a b", "a c"});
  const auto expected = oracle::TfidfVector(idf, "a b", true);
  const Vector v = enc.EncodeItem(c.records[0]);
  ASSERT_EQ(v.size(), expected.size());
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(v[i], expected[i], 1e-15);
}

TEST(TfidfTest, OutOfVocabularyTokensIgnored) {
  const Encoder enc = FitEncoder(TwoDocCorpus(), EncoderSpec{});
  EXPECT_EQ(enc.EncodeText("zzz yyy"), Vector(3, 0.0));
  EXPECT_EQ(enc.EncodeText("b zzz"), enc.EncodeText("b"));
}

TEST(TfidfTest, DocumentsIncludeQueryAndDialog) {
  Corpus c = TwoDocCorpus();
  c.records[0].initial_query = "find d";
  c.records[0].qa_pool.push_back({"what e?", "f", 0});
  const Encoder enc = FitEncoder(c, EncoderSpec{});
  const TfidfTable* t = enc.tfidf();
  ASSERT_NE(t, nullptr);
  EXPECT_EQ(t->vocab, (std::vector<std::string>{"a", "b", "c", "d", "e", "f", "find", "what"}));
}

TEST(EncoderTest, EmptyTextIsZeroVector) {
  const Corpus c = GenerateSynthetic({});
  for (const char* spec : {R"({"kind":"tfidf"})", R"({"kind":"hashed_ngram","dim":64})"}) {
    const Encoder enc = FitEncoder(c, Spec(spec));
    EXPECT_EQ(enc.EncodeText(""), Vector(enc.dim(), 0.0)) << spec;
  }
}

TEST(EncoderTest, NormalizedOutputsHaveUnitNorm) {
  const Corpus c = GenerateSynthetic({});
  for (const char* spec :
       {R"({"kind":"tfidf"})", R"({"kind":"hashed_ngram","dim":128,"n":3})",
        R"({"kind":"linear_projection","dim":40,"base":{"kind":"tfidf"}})"}) {
    const Encoder enc = FitEncoder(c, Spec(spec));
    for (const auto& r : c.records) {
      const Vector v = enc.EncodeItem(r);
      EXPECT_NEAR(Norm(v), 1.0, 1e-9) << spec;
      for (const auto& qa : r.qa_pool) {
        const Vector g = enc.EncodeText(r.initial_query + " | " + qa.answer);
        EXPECT_NEAR(Norm(g), 1.0, 1e-9) << spec;
      }
    }
  }
}

TEST(EncoderTest, PureFunctionOfText) {
  const Corpus c = GenerateSynthetic({});
  const Encoder enc = FitEncoder(c, EncoderSpec{});
  EXPECT_EQ(enc.EncodeText("w1 w2 w3"), enc.EncodeText("w1 w2 w3"));
  VideoRecord copy = c.records[1];
  copy.id = "other";
  copy.summary = c.records[0].summary;
  EXPECT_EQ(enc.EncodeItem(copy), enc.EncodeItem(c.records[0]));
}

TEST(HashedNgramTest, SeedChangesVectorsButNotNorms) {
  const Corpus c = GenerateSynthetic({});
  const Encoder a = FitEncoder(c, Spec(R"({"kind":"hashed_ngram","dim":32,"normalize":false})"));
  const Encoder b = FitEncoder(
      c, Spec(R"({"kind":"hashed_ngram","dim":32,"normalize":false,"hash_seed":9})"));
  const Encoder a2 = FitEncoder(
      GenerateSynthetic({.n_videos = 10}),
      Spec(R"({"kind":"hashed_ngram","dim":32,"normalize":false})"));
  const std::string text = "a scene with a dog running in the park";
  EXPECT_NE(a.EncodeText(text), b.EncodeText(text));
  EXPECT_EQ(a.EncodeText(text), a2.EncodeText(text));
  // Unnormalized norms differ only by collisions, so compare normalized ones.
  const Encoder an = FitEncoder(c, Spec(R"({"kind":"hashed_ngram","dim":32})"));
  const Encoder bn = FitEncoder(c, Spec(R"({"kind":"hashed_ngram","dim":32,"hash_seed":9})"));
  EXPECT_NEAR(Norm(an.EncodeText(text)), Norm(bn.EncodeText(text)), 1e-12);
}

TEST(HashedNgramTest, CountsEveryGramOnce) {
  const Corpus c = GenerateSynthetic({.n_videos = 10});
  const Encoder enc =
      FitEncoder(c, Spec(R"({"kind":"hashed_ngram","dim":1000003,"n":2,"normalize":false})"));
  const Vector v = enc.EncodeText("x y z");
  double l1 = 0.0;
  for (double x : v) l1 += std::abs(x);
  EXPECT_EQ(l1, 5.0);  // 3 unigrams + 2 bigrams, no collisions at this size
}

class PrecomputedTest : public testing::Test {
 protected:
  void SetUp() override {
    path_ = fs::path(testing::TempDir()) / "vectors.jsonl";
    std::ofstream out(path_);
    out << R"({"dim":3})" << "\n"
        << R"({"id":"d0","vector":[3,0,4]})" << "\n"
        << R"({"id":"d1","vector":[0,1,0]})" << "\n";
  }
  fs::path path_;
};

TEST_F(PrecomputedTest, EchoesStoredVectors) {
  EncoderSpec spec = Spec(R"({"kind":"precomputed","normalize":false})");
  spec.vectors_path = path_.string();
  const Corpus c = TwoDocCorpus();
  const Encoder enc = FitEncoder(c, spec);
  EXPECT_EQ(enc.dim(), 3u);
  EXPECT_EQ(enc.EncodeItem(c.records[0]), (Vector{3, 0, 4}));
  EXPECT_EQ(enc.EncodeItem(c.records[1]), (Vector{0, 1, 0}));
  spec.normalize = true;
  const Vector unit = FitEncoder(c, spec).EncodeItem(c.records[0]);
  EXPECT_NEAR(unit[0], 0.6, 1e-15);
  EXPECT_EQ(unit[1], 0.0);
  EXPECT_NEAR(unit[2], 0.8, 1e-15);
}

TEST_F(PrecomputedTest, MissingIdNamesIt) {
  EncoderSpec spec = Spec(R"({"kind":"precomputed"})");
  spec.vectors_path = path_.string();
  Corpus c = TwoDocCorpus();
  c.records.push_back({"v7", "x", "", {}, std::nullopt});
  try {
    FitEncoder(c, spec);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("v7"), std::string::npos);
  }
}

TEST_F(PrecomputedTest, RejectsMalformedFiles) {
  const fs::path bad = fs::path(testing::TempDir()) / "bad_vectors.jsonl";
  {
    std::ofstream out(bad);
    out << R"({"dim":2})" << "\n" << R"({"id":"d0","vector":[1,2,3]})" << "\n";
  }
  EXPECT_THROW(LoadPrecomputedVectors(bad), DataError);
}

TEST(LinearProjectionTest, IdentityInitReproducesBase) {
  const Corpus c = GenerateSynthetic({});
  const Encoder base = FitEncoder(c, EncoderSpec{});
  const Encoder proj =
      FitEncoder(c, Spec(R"({"kind":"linear_projection","base":{"kind":"tfidf"}})"));
  ASSERT_TRUE(proj.is_projection());
  EXPECT_EQ(proj.dim(), base.dim());
  for (const auto& r : c.records) {
    const Vector a = base.EncodeItem(r);
    const Vector b = proj.EncodeItem(r);
    for (std::size_t i = 0; i < a.size(); ++i) ASSERT_NEAR(a[i], b[i], 1e-15);
  }
}

TEST(EncoderSpecTest, RejectsInvalidSpecs) {
  EXPECT_THROW(Spec(R"({"kind":"tfidf","tau":0})"), DataError);
  EXPECT_THROW(Spec(R"({"kind":"tfidf","tau":-1})"), DataError);
  EXPECT_THROW(Spec(R"({"kind":"hashed_ngram","dim":0})"), DataError);
  EXPECT_THROW(Spec(R"({"kind":"linear_projection"})"), DataError);
  EXPECT_THROW(Spec(R"({"kind":"linear_projection","base":{"kind":"linear_projection","base":{"kind":"tfidf"}}})"),
               DataError);
  EXPECT_THROW(Spec(R"({"kind":"bert"})"), DataError);
  EXPECT_THROW(Spec(R"([1])"), DataError);
}

TEST(EncoderSpecTest, JsonRoundTrip) {
  const EncoderSpec s =
      Spec(R"({"kind":"linear_projection","dim":7,"tau":0.5,"base":{"kind":"hashed_ngram","dim":9,"n":3,"hash_seed":4}})");
  const EncoderSpec back = EncoderSpec::FromJson(s.ToJson());
  EXPECT_EQ(back.ToJson(), s.ToJson());
  EXPECT_EQ(back.base->ngram, 3u);
}

TEST(EncoderIoTest, SaveLoadPreservesBehaviorAndFingerprint) {
  const Corpus c = GenerateSynthetic({});
  for (const char* spec :
       {R"({"kind":"tfidf","tau":0.3})", R"({"kind":"hashed_ngram","dim":50})",
        R"({"kind":"linear_projection","dim":20,"base":{"kind":"tfidf"}})"}) {
    const Encoder enc = FitEncoder(c, Spec(spec));
    const fs::path path = fs::path(testing::TempDir()) / "enc.json";
    SaveEncoder(enc, path);
    const Encoder back = LoadEncoder(path);
    EXPECT_EQ(back.fingerprint(), enc.fingerprint()) << spec;
    EXPECT_EQ(back.dim(), enc.dim());
    for (const auto& r : c.records) ASSERT_EQ(back.EncodeItem(r), enc.EncodeItem(r));
  }
}

TEST(EncoderIoTest, FingerprintTracksFittedState) {
  const Corpus c = GenerateSynthetic({});
  const Encoder a = FitEncoder(c, EncoderSpec{});
  const Encoder b = FitEncoder(GenerateSynthetic({.seed = 1}), EncoderSpec{});
  EXPECT_EQ(a.fingerprint(), FitEncoder(c, EncoderSpec{}).fingerprint());
  EXPECT_NE(a.fingerprint(), b.fingerprint());
  Encoder p = FitEncoder(c, Spec(R"({"kind":"linear_projection","base":{"kind":"tfidf"}})"));
  const auto before = p.fingerprint();
  p.mutable_weights()[1] = 0.25;
  p.Refresh();
  EXPECT_NE(p.fingerprint(), before);
}

}  // namespace
}  // namespace dialret
