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

#include "dialret/corpus.h"

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>

#include "dialret/error.h"
#include "dialret/text.h"
#include "gtest/gtest.h"

namespace dialret {
namespace {

namespace fs = std::filesystem;

std::string Line(const std::string& id, int pairs = 1) {
  std::string pool;
  for (int j = 0; j < pairs; ++j) {
    if (j) pool += ",";
    pool += R"({"question":"q)" + std::to_string(j) + R"(?","answer":"a)" +
            std::to_string(j) + R"("})";
  }
  return R"({"id":")" + id + R"(","summary":"summary of )" + id +
         R"(","initial_query":"find )" + id + R"(","qa_pool":[)" + pool + "]}";
}

fs::path TempPath(const std::string& name) {
  return fs::path(testing::TempDir()) / name;
}

TEST(ParseCorpusTest, KeepsFileOrder) {
  const Corpus c = ParseCorpus(Line("b") + "\n" + Line("a") + "\n" + Line("c") + "\n");
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c.records[0].id, "b");
  EXPECT_EQ(c.records[1].id, "a");
  EXPECT_EQ(c.records[2].id, "c");
  EXPECT_EQ(*c.Find("a"), 1u);
  EXPECT_FALSE(c.Find("zz").has_value());
  EXPECT_THROW(c.Get("zz"), NotFoundError);
}

TEST(ParseCorpusTest, DuplicateIdNamesBothLines) {
  const std::string text = Line("v0") + "\n" + Line("v1") + "\n" + Line("v2") +
                           "\n" + Line("v3") + "\n" + Line("v1") + "\n";
  try {
    ParseCorpus(text);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("'v1'"), std::string::npos) << msg;
    EXPECT_NE(msg.find("lines 2 and 5"), std::string::npos) << msg;
  }
}

TEST(ParseCorpusTest, TenPairPoolGetsSourceIndices) {
  const Corpus c = ParseCorpus(Line("v", 10));
  ASSERT_EQ(c.records[0].qa_pool.size(), 10u);
  for (std::size_t j = 0; j < 10; ++j) {
    EXPECT_EQ(c.records[0].qa_pool[j].source_index, j);
  }
}

TEST(ParseCorpusTest, EmptyPoolIsAllowed) {
  const Corpus c = ParseCorpus(Line("v", 0));
  EXPECT_TRUE(c.records[0].qa_pool.empty());
}

TEST(ParseCorpusTest, SkipsBlankLines) {
  const Corpus c = ParseCorpus("\n" + Line("a") + "\n\n  \n" + Line("b"));
  EXPECT_EQ(c.size(), 2u);
}

TEST(ParseCorpusTest, RejectsBadRecordsWithLineNumbers) {
  const std::map<std::string, std::string> cases = {
      {"not json", "malformed JSON"},
      {R"({"id":"x","summary":"s","initial_query":"q"})", "qa_pool"},
      {R"({"id":"x","summary":"  ","initial_query":"q","qa_pool":[]})", "empty summary"},
      {R"({"id":"","summary":"s","initial_query":"q","qa_pool":[]})", "empty id"},
      {R"({"id":"x","summary":"s","initial_query":"q","qa_pool":[{"question":" ","answer":"a"}]})",
       "empty question"},
      {R"({"id":3,"summary":"s","initial_query":"q","qa_pool":[]})", "must be a string"},
      {"[1,2]", "JSON object"},
  };
  for (const auto& [body, needle] : cases) {
    try {
      ParseCorpus(Line("ok") + "\n" + body + "\n");
      ADD_FAILURE() << "accepted: " << body;
    } catch (const DataError& e) {
      const std::string msg = e.what();
      EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
      EXPECT_NE(msg.find(needle), std::string::npos) << msg;
    }
  }
}

TEST(ParseCorpusTest, EmptyInputIsAnError) {
  EXPECT_THROW(ParseCorpus(""), DataError);
  EXPECT_THROW(ParseCorpus("\n\n"), DataError);
}

TEST(CorpusIoTest, RoundTripIncludingUnicodeAndImages) {
  Corpus c = ParseCorpus(Line("v0", 3) + "\n" + Line("v1", 0));
  c.records[0].summary = "Ein Mädchen spielt Geige 🎻 in 東京";
  c.records[1].image_url = "https://example.org/v1.png";
  const fs::path path = TempPath("roundtrip.jsonl");
  SaveCorpus(c, path);
  const Corpus back = LoadCorpus(path);
  EXPECT_EQ(back, c);
  EXPECT_EQ(SerializeCorpus(back), SerializeCorpus(c));
}

TEST(CorpusIoTest, CanonicalKeyOrder) {
  const std::string line = SerializeRecord(ParseCorpus(Line("v", 1)).records[0]);
  const auto id = line.find("\"id\"");
  const auto summary = line.find("\"summary\"");
  const auto query = line.find("\"initial_query\"");
  const auto pool = line.find("\"qa_pool\"");
  EXPECT_LT(id, summary);
  EXPECT_LT(summary, query);
  EXPECT_LT(query, pool);
}

TEST(CorpusIoTest, SplitTagComesFromCaller) {
  const fs::path path = TempPath("tagged.jsonl");
  SaveCorpus(ParseCorpus(Line("a")), path);
  EXPECT_EQ(LoadCorpus(path, "test").split_tag, "test");
}

TEST(CorpusIoTest, EmptyCorpusIsRejectedBeforeWriting) {
  const fs::path path = TempPath("never_written.jsonl");
  fs::remove(path);
  EXPECT_THROW(SaveCorpus(Corpus{}, path), DataError);
  EXPECT_FALSE(fs::exists(path));
}

TEST(CorpusIoTest, MissingFileIsDataError) {
  EXPECT_THROW(LoadCorpus(TempPath("does_not_exist.jsonl")), DataError);
}

TEST(ValidateCorpusTest, RejectsOutOfOrderSourceIndices) {
  Corpus c = ParseCorpus(Line("v", 2));
  std::swap(c.records[0].qa_pool[0], c.records[0].qa_pool[1]);
  EXPECT_THROW(ValidateCorpus(c), DataError);
}

TEST(ValidateCorpusTest, RejectsDuplicateIds) {
  Corpus c = ParseCorpus(Line("a") + "\n" + Line("b"));
  c.records[1].id = "a";
  EXPECT_THROW(ValidateCorpus(c), DataError);
}

TEST(SyntheticTest, DefaultConfigShape) {
  const Corpus c = GenerateSynthetic({});
  ASSERT_EQ(c.size(), 100u);
  for (const auto& r : c.records) EXPECT_EQ(r.qa_pool.size(), 10u);
  EXPECT_NO_THROW(ValidateCorpus(c));
}

TEST(SyntheticTest, DeterministicAndSeedSensitive) {
  SyntheticConfig cfg;
  EXPECT_EQ(SerializeCorpus(GenerateSynthetic(cfg)),
            SerializeCorpus(GenerateSynthetic(cfg)));
  SyntheticConfig other = cfg;
  other.seed = 43;
  EXPECT_NE(SerializeCorpus(GenerateSynthetic(cfg)),
            SerializeCorpus(GenerateSynthetic(other)));
}

TEST(SyntheticTest, SummarySharesVocabularyWithQuery) {
  for (const auto& r : GenerateSynthetic({}).records) {
    const auto s = Tokenize(r.summary);
    const std::set<std::string> summary(s.begin(), s.end());
    bool shared = false;
    for (const auto& t : Tokenize(r.initial_query)) shared |= summary.count(t) > 0;
    EXPECT_TRUE(shared) << r.id;
  }
}

// Tokens that occur in exactly one record's text.
std::map<std::string, std::string> UniqueOwners(const Corpus& c) {
  std::map<std::string, std::set<std::string>> owners;
  for (const auto& r : c.records) {
    std::string all = r.summary + " " + r.initial_query;
    for (const auto& qa : r.qa_pool) all += " " + qa.question + " " + qa.answer;
    for (const auto& t : Tokenize(all)) owners[t].insert(r.id);
  }
  std::map<std::string, std::string> unique;
  for (const auto& [t, ids] : owners) {
    if (ids.size() == 1) unique[t] = *ids.begin();
  }
  return unique;
}

TEST(SyntheticTest, AnswersEmbedRecordUniqueTokens) {
  for (std::size_t d : {1u, 2u}) {
    SyntheticConfig cfg;
    cfg.discriminative_tokens_per_answer = d;
    cfg.n_videos = 40;
    const Corpus c = GenerateSynthetic(cfg);
    const auto unique = UniqueOwners(c);
    for (const auto& r : c.records) {
      for (const auto& qa : r.qa_pool) {
        std::set<std::string> own;
        for (const auto& t : Tokenize(qa.answer)) {
          auto it = unique.find(t);
          if (it != unique.end() && it->second == r.id) own.insert(t);
        }
        EXPECT_GE(own.size(), d) << r.id << ": " << qa.answer;
      }
    }
  }
}

TEST(SyntheticTest, ZeroDiscriminativeTokens) {
  SyntheticConfig with, without;
  without.discriminative_tokens_per_answer = 0;
  const Corpus a = GenerateSynthetic(with);
  const Corpus b = GenerateSynthetic(without);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a.records[i].qa_pool.size(); ++j) {
      EXPECT_EQ(Tokenize(b.records[i].qa_pool[j].answer).size() + 1,
                Tokenize(a.records[i].qa_pool[j].answer).size());
    }
  }
}

TEST(SyntheticTest, VocabularyTooSmall) {
  SyntheticConfig cfg;
  cfg.vocab_size = 150;
  EXPECT_THROW(GenerateSynthetic(cfg), DataError);
  cfg.vocab_size = 0;
  EXPECT_THROW(GenerateSynthetic(cfg), DataError);
}

}  // namespace
}  // namespace dialret
