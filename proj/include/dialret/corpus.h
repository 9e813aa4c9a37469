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

#ifndef DIALRET_CORPUS_H_
#define DIALRET_CORPUS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dialret {

// One annotated question/answer pair. source_index is the pair's position
// in its record's annotation pool.
struct QAPair {
  std::string question;
  std::string answer;
  std::size_t source_index = 0;

  bool operator==(const QAPair&) const = default;
};

// A retrievable item: its text summary stands in for the visual content.
struct VideoRecord {
  std::string id;
  std::string summary;
  std::string initial_query;
  std::vector<QAPair> qa_pool;
  // Optional thumbnail for the browser UI; serialized after qa_pool.
  std::optional<std::string> image_url;

  bool operator==(const VideoRecord&) const = default;
};

struct Corpus {
  std::vector<VideoRecord> records;
  std::string split_tag;

  std::size_t size() const { return records.size(); }
  // Position of the record with the given id, if any.
  std::optional<std::size_t> Find(std::string_view id) const;
  const VideoRecord& Get(std::string_view id) const;  // throws NotFoundError

  bool operator==(const Corpus&) const = default;
};

// Ordered question/answer turns; empty before the first round.
using DialogHistory = std::vector<QAPair>;

// Throws DataError describing the first violated invariant.
void ValidateCorpus(const Corpus& corpus);

// Parses one JSONL corpus line. line_number is used in error messages.
VideoRecord ParseRecordLine(std::string_view line, std::size_t line_number);
std::string SerializeRecord(const VideoRecord& record);

// Reads a JSONL corpus. Blank lines are skipped; everything else must be a
// well-formed record. The split tag is not stored in the file.
Corpus LoadCorpus(const std::filesystem::path& path,
                  std::string split_tag = "");
Corpus ParseCorpus(std::string_view contents, std::string split_tag = "");

void SaveCorpus(const Corpus& corpus, const std::filesystem::path& path);
std::string SerializeCorpus(const Corpus& corpus);

struct SyntheticConfig {
  std::size_t n_videos = 100;
  std::size_t m_qa = 10;
  std::size_t vocab_size = 500;
  std::size_t discriminative_tokens_per_answer = 1;
  std::uint64_t seed = 42;
};

// Deterministic synthetic corpus. Records are grouped into topics; initial
// queries only carry topic words, so they are ambiguous within a topic.
// Each record owns 2 * discriminative_tokens_per_answer tokens that appear
// in its summary and in no other record; every answer carries
// discriminative_tokens_per_answer of them. Throws DataError when the
// vocabulary cannot hold the owned tokens, four words per topic and a
// 16-word generic pool.
Corpus GenerateSynthetic(const SyntheticConfig& config);

}  // namespace dialret

#endif  // DIALRET_CORPUS_H_
