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

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "dialret/error.h"
#include "dialret/random.h"
#include "dialret/text.h"
#include "json.hpp"

namespace dialret {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string Where(std::size_t line_number) {
  return "line " + std::to_string(line_number) + ": ";
}

const nlohmann::json& RequireField(const nlohmann::json& obj,
                                   const char* field,
                                   std::size_t line_number) {
  auto it = obj.find(field);
  if (it == obj.end()) {
    throw DataError(Where(line_number) + "missing required field '" + field +
                    "'");
  }
  return *it;
}

std::string RequireString(const nlohmann::json& obj, const char* field,
                          std::size_t line_number) {
  const auto& value = RequireField(obj, field, line_number);
  if (!value.is_string()) {
    throw DataError(Where(line_number) + "field '" + field +
                    "' must be a string");
  }
  return value.get<std::string>();
}

// Field-level invariants shared by file loading and in-memory validation.
void CheckRecord(const VideoRecord& r, const std::string& where) {
  if (Trim(r.id).empty()) throw DataError(where + "empty id");
  if (Trim(r.summary).empty()) {
    throw DataError(where + "record '" + r.id + "' has an empty summary");
  }
  for (std::size_t j = 0; j < r.qa_pool.size(); ++j) {
    const QAPair& qa = r.qa_pool[j];
    if (qa.source_index != j) {
      throw DataError(where + "record '" + r.id +
                      "' qa_pool source indices are not 0..m-1 in order");
    }
    if (Trim(qa.question).empty() || Trim(qa.answer).empty()) {
      throw DataError(where + "record '" + r.id + "' qa_pool[" +
                      std::to_string(j) + "] has an empty question or answer");
    }
  }
}

}  // namespace

std::optional<std::size_t> Corpus::Find(std::string_view id) const {
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].id == id) return i;
  }
  return std::nullopt;
}

const VideoRecord& Corpus::Get(std::string_view id) const {
  auto pos = Find(id);
  if (!pos) throw NotFoundError("unknown record id '" + std::string(id) + "'");
  return records[*pos];
}

void ValidateCorpus(const Corpus& corpus) {
  if (corpus.records.empty()) throw DataError("corpus has no records");
  std::map<std::string, std::size_t, std::less<>> seen;
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    const VideoRecord& r = corpus.records[i];
    CheckRecord(r, "record " + std::to_string(i) + ": ");
    auto [it, inserted] = seen.emplace(r.id, i);
    if (!inserted) {
      throw DataError("duplicate id '" + r.id + "' at records " +
                      std::to_string(it->second) + " and " +
                      std::to_string(i));
    }
  }
}

VideoRecord ParseRecordLine(std::string_view line, std::size_t line_number) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(Where(line_number) + "malformed JSON: " + e.what());
  }
  if (!obj.is_object()) {
    throw DataError(Where(line_number) + "expected a JSON object");
  }
  VideoRecord record;
  record.id = RequireString(obj, "id", line_number);
  record.summary = RequireString(obj, "summary", line_number);
  record.initial_query = RequireString(obj, "initial_query", line_number);
  const auto& pool = RequireField(obj, "qa_pool", line_number);
  if (!pool.is_array()) {
    throw DataError(Where(line_number) + "field 'qa_pool' must be an array");
  }
  for (const auto& entry : pool) {
    if (!entry.is_object()) {
      throw DataError(Where(line_number) + "qa_pool entries must be objects");
    }
    QAPair qa;
    qa.question = RequireString(entry, "question", line_number);
    qa.answer = RequireString(entry, "answer", line_number);
    qa.source_index = record.qa_pool.size();
    record.qa_pool.push_back(std::move(qa));
  }
  if (auto it = obj.find("image_url"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) {
      throw DataError(Where(line_number) + "field 'image_url' must be a string");
    }
    record.image_url = it->get<std::string>();
  }
  CheckRecord(record, Where(line_number));
  return record;
}

std::string SerializeRecord(const VideoRecord& record) {
  ordered_json obj;
  obj["id"] = record.id;
  obj["summary"] = record.summary;
  obj["initial_query"] = record.initial_query;
  ordered_json pool = ordered_json::array();
  for (const QAPair& qa : record.qa_pool) {
    ordered_json entry;
    entry["question"] = qa.question;
    entry["answer"] = qa.answer;
    pool.push_back(std::move(entry));
  }
  obj["qa_pool"] = std::move(pool);
  if (record.image_url) obj["image_url"] = *record.image_url;
  try {
    return obj.dump();
  } catch (const nlohmann::json::type_error& e) {
    throw DataError("record '" + record.id + "' is not valid UTF-8: " +
                    e.what());
  }
}

Corpus ParseCorpus(std::string_view contents, std::string split_tag) {
  Corpus corpus;
  corpus.split_tag = std::move(split_tag);
  std::map<std::string, std::size_t, std::less<>> first_line;
  std::size_t line_number = 0;
  std::size_t pos = 0;
  while (pos < contents.size()) {
    std::size_t end = contents.find('\n', pos);
    if (end == std::string_view::npos) end = contents.size();
    std::string_view line = contents.substr(pos, end - pos);
    pos = end + 1;
    ++line_number;
    if (Trim(line).empty()) continue;
    VideoRecord record = ParseRecordLine(line, line_number);
    auto [it, inserted] = first_line.emplace(record.id, line_number);
    if (!inserted) {
      throw DataError("duplicate id '" + record.id + "' on lines " +
                      std::to_string(it->second) + " and " +
                      std::to_string(line_number));
    }
    corpus.records.push_back(std::move(record));
  }
  if (corpus.records.empty()) throw DataError("corpus file has no records");
  return corpus;
}

Corpus LoadCorpus(const std::filesystem::path& path, std::string split_tag) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read corpus file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseCorpus(buf.str(), std::move(split_tag));
}

std::string SerializeCorpus(const Corpus& corpus) {
  ValidateCorpus(corpus);
  std::string out;
  for (const VideoRecord& r : corpus.records) {
    out += SerializeRecord(r);
    out += '\n';
  }
  return out;
}

void SaveCorpus(const Corpus& corpus, const std::filesystem::path& path) {
  const std::string contents = SerializeCorpus(corpus);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeFailure("cannot write corpus file " + path.string());
  out << contents;
  if (!out) throw RuntimeFailure("write failed for " + path.string());
}

Corpus GenerateSynthetic(const SyntheticConfig& config) {
  if (config.n_videos < 1 || config.m_qa < 1 || config.vocab_size < 1) {
    throw DataError("synthetic config counts must be >= 1");
  }
  constexpr std::size_t kTopicWords = 4;
  constexpr std::size_t kGenericMin = 16;
  const std::size_t owned_per_record =
      2 * config.discriminative_tokens_per_answer;
  const std::size_t n_topics = std::max<std::size_t>(1, config.n_videos / 10);
  const std::size_t owned_total = owned_per_record * config.n_videos;
  const std::size_t required =
      owned_total + kTopicWords * n_topics + kGenericMin;
  if (config.vocab_size < required) {
    throw DataError("vocab_size " + std::to_string(config.vocab_size) +
                    " too small to generate " +
                    std::to_string(config.n_videos) +
                    " records' distinct discriminative tokens (need >= " +
                    std::to_string(required) + ")");
  }

  Rng rng(config.seed);
  std::vector<std::string> vocab(config.vocab_size);
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    vocab[i] = "w" + std::to_string(i);
  }
  rng.Shuffle(std::span<std::string>(vocab));

  auto owned = [&](std::size_t record, std::size_t j) -> const std::string& {
    return vocab[record * owned_per_record + j];
  };
  auto topic_word = [&](std::size_t topic, std::size_t j) -> const std::string& {
    return vocab[owned_total + topic * kTopicWords + j];
  };
  const std::size_t generic_begin = owned_total + kTopicWords * n_topics;
  const std::size_t generic_count = config.vocab_size - generic_begin;
  auto generic = [&]() -> const std::string& {
    return vocab[generic_begin + rng.UniformIndex(generic_count)];
  };

  Corpus corpus;
  corpus.split_tag = "synthetic";
  corpus.records.reserve(config.n_videos);
  for (std::size_t i = 0; i < config.n_videos; ++i) {
    const std::size_t topic = i % n_topics;
    VideoRecord r;
    r.id = "v" + std::to_string(i);

    std::vector<std::size_t> order(kTopicWords);
    for (std::size_t j = 0; j < kTopicWords; ++j) order[j] = j;
    rng.Shuffle(std::span<std::size_t>(order));

    std::string summary = "a scene with";
    for (std::size_t j = 0; j < 3; ++j) summary += " " + topic_word(topic, order[j]);
    if (owned_per_record > 0) {
      summary += "; details";
      for (std::size_t j = 0; j < owned_per_record; ++j) {
        summary += " " + owned(i, j);
      }
    }
    summary += "; also";
    for (std::size_t j = 0; j < 3; ++j) summary += " " + generic();
    r.summary = std::move(summary);

    rng.Shuffle(std::span<std::size_t>(order));
    r.initial_query = "show videos about " + topic_word(topic, order[0]) +
                      " " + topic_word(topic, order[1]);

    std::vector<std::size_t> own_order(owned_per_record);
    for (std::size_t j = 0; j < owned_per_record; ++j) own_order[j] = j;
    for (std::size_t q = 0; q < config.m_qa; ++q) {
      QAPair qa;
      qa.source_index = q;
      qa.question = "what is shown in part " + std::to_string(q + 1) +
                    " with " + generic() + "?";
      rng.Shuffle(std::span<std::size_t>(own_order));
      std::string answer = "it shows";
      for (std::size_t j = 0; j < config.discriminative_tokens_per_answer; ++j) {
        answer += " " + owned(i, own_order[j]);
      }
      const std::string& noise_a = generic();
      const std::string& noise_b = generic();
      answer += " and " + noise_a + " " + noise_b;
      qa.answer = std::move(answer);
      r.qa_pool.push_back(std::move(qa));
    }
    corpus.records.push_back(std::move(r));
  }
  return corpus;
}

}  // namespace dialret
