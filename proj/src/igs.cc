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

#include "dialret/igs.h"

#include <fstream>
#include <map>
#include <sstream>

#include "dialret/error.h"
#include "dialret/parallel.h"
#include "dialret/text.h"
#include "json.hpp"

namespace dialret {
namespace {

using ordered_json = nlohmann::ordered_json;

struct RecordTrace {
  std::vector<IgsTarget> per_round;
  bool skipped = false;
};

RecordTrace SearchRecord(const VideoRecord& record, const Corpus& corpus,
                         const Encoder& encoder, const Index& index,
                         const IgsConfig& config) {
  RecordTrace trace;
  if (record.qa_pool.size() < config.rounds) {
    if (config.strict) {
      throw DataError("record '" + record.id + "' has " +
                      std::to_string(record.qa_pool.size()) +
                      " QA pairs, fewer than " +
                      std::to_string(config.rounds) + " rounds");
    }
    trace.skipped = true;
    return trace;
  }
  DialogHistory history;
  for (std::size_t t = 0; t < config.rounds; ++t) {
    IgsTarget target;
    target.video_id = record.id;
    target.round = t + 1;
    target.initial_query = record.initial_query;
    target.history = history;
    const RetrievalResult current =
        Vrm(record.initial_query, history, encoder, index);
    for (std::size_t pos : current.TopK(config.k)) {
      target.topk_summaries.push_back(corpus.records[pos].summary);
    }
    QaChoice best = SelectBestQa(record, history, encoder, index);
    target.chosen = best.pair;
    target.achieved_probability = best.probability;
    history.push_back(best.pair);
    trace.per_round.push_back(std::move(target));
  }
  return trace;
}

}  // namespace

std::size_t IndexPosition(const Index& index, const std::string& id) {
  const auto& ids = index.ids();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == id) return i;
  }
  throw NotFoundError("id '" + id + "' is not in the index");
}

bool IsUsed(const QAPair& pair, const DialogHistory& history) {
  for (const QAPair& turn : history) {
    if (turn.source_index == pair.source_index) return true;
  }
  return false;
}

std::vector<const QAPair*> UnusedPairs(const VideoRecord& record,
                                       const DialogHistory& history) {
  std::vector<const QAPair*> out;
  for (const QAPair& qa : record.qa_pool) {
    if (!IsUsed(qa, history)) out.push_back(&qa);
  }
  return out;
}

std::vector<QaChoice> ScoreUnusedPairs(const VideoRecord& record,
                                       const DialogHistory& history,
                                       const Encoder& encoder,
                                       const Index& index) {
  const std::size_t target = IndexPosition(index, record.id);
  std::vector<QaChoice> out;
  DialogHistory extended = history;
  extended.emplace_back();
  for (const QAPair* qa : UnusedPairs(record, history)) {
    extended.back() = *qa;
    const RetrievalResult r = Vrm(record.initial_query, extended, encoder, index);
    out.push_back({*qa, r.probabilities[target]});
  }
  return out;
}

QaChoice SelectBestQa(const VideoRecord& record, const DialogHistory& history,
                      const Encoder& encoder, const Index& index) {
  const auto scored = ScoreUnusedPairs(record, history, encoder, index);
  if (scored.empty()) {
    throw StateError("record '" + record.id + "' has no unused QA pairs");
  }
  const QaChoice* best = &scored.front();
  for (const QaChoice& c : scored) {
    if (c.probability > best->probability) best = &c;
  }
  return *best;
}

IgsDataset BuildIgsDataset(const Corpus& corpus, const Encoder& encoder,
                           const Index& index, const IgsConfig& config) {
  if (config.k < 1) throw DataError("IGS top-k must be >= 1");
  IgsDataset dataset;
  dataset.rounds = config.rounds;
  dataset.k = config.k;
  dataset.encoder_fingerprint = encoder.fingerprint();
  dataset.targets.resize(config.rounds);
  if (config.rounds == 0) return dataset;

  std::vector<RecordTrace> traces(corpus.size());
  ParallelFor(corpus.size(), config.jobs, [&](std::size_t i) {
    traces[i] = SearchRecord(corpus.records[i], corpus, encoder, index, config);
  });
  for (std::size_t i = 0; i < traces.size(); ++i) {
    if (traces[i].skipped) {
      dataset.skipped.push_back(corpus.records[i].id);
      continue;
    }
    for (std::size_t t = 0; t < config.rounds; ++t) {
      dataset.targets[t].push_back(std::move(traces[i].per_round[t]));
    }
  }
  return dataset;
}

std::string SerializeIgs(const IgsDataset& dataset) {
  std::ostringstream out;
  ordered_json header;
  header["rounds"] = dataset.rounds;
  header["k"] = dataset.k;
  header["encoder_fingerprint"] = HexU64(dataset.encoder_fingerprint);
  header["skipped"] = dataset.skipped;
  out << header.dump() << '\n';
  for (const auto& round : dataset.targets) {
    for (const IgsTarget& t : round) {
      ordered_json line;
      line["video_id"] = t.video_id;
      line["round"] = t.round;
      line["question"] = t.chosen.question;
      line["answer"] = t.chosen.answer;
      line["source_index"] = t.chosen.source_index;
      ordered_json context;
      context["initial_query"] = t.initial_query;
      context["topk_summaries"] = t.topk_summaries;
      ordered_json history = ordered_json::array();
      for (const QAPair& turn : t.history) {
        history.push_back(ordered_json::array({turn.question, turn.answer}));
      }
      context["history"] = std::move(history);
      line["context"] = std::move(context);
      line["achieved_probability"] = t.achieved_probability;
      out << line.dump() << '\n';
    }
  }
  return out.str();
}

IgsDataset ParseIgs(std::string_view contents) {
  IgsDataset dataset;
  std::istringstream in{std::string(contents)};
  std::string line;
  std::size_t line_number = 0;
  bool have_header = false;
  // Chosen pairs per video by round, used to restore history source indices.
  std::map<std::string, std::vector<QAPair>> chosen;
  try {
    while (std::getline(in, line)) {
      ++line_number;
      if (Trim(line).empty()) continue;
      const auto j = nlohmann::json::parse(line);
      if (!have_header) {
        dataset.rounds = j.at("rounds").get<std::size_t>();
        dataset.k = j.at("k").get<std::size_t>();
        dataset.encoder_fingerprint = std::stoull(
            j.at("encoder_fingerprint").get<std::string>(), nullptr, 16);
        dataset.skipped = j.at("skipped").get<std::vector<std::string>>();
        dataset.targets.resize(dataset.rounds);
        have_header = true;
        continue;
      }
      IgsTarget t;
      t.video_id = j.at("video_id").get<std::string>();
      t.round = j.at("round").get<std::size_t>();
      t.chosen.question = j.at("question").get<std::string>();
      t.chosen.answer = j.at("answer").get<std::string>();
      t.chosen.source_index = j.at("source_index").get<std::size_t>();
      const auto& ctx = j.at("context");
      t.initial_query = ctx.at("initial_query").get<std::string>();
      t.topk_summaries = ctx.at("topk_summaries").get<std::vector<std::string>>();
      const auto& prior = chosen[t.video_id];
      for (const auto& turn : ctx.at("history")) {
        QAPair qa;
        qa.question = turn.at(0).get<std::string>();
        qa.answer = turn.at(1).get<std::string>();
        const std::size_t h = t.history.size();
        if (h >= prior.size() || prior[h].question != qa.question) {
          throw DataError("line " + std::to_string(line_number) +
                          ": history does not match earlier rounds");
        }
        qa.source_index = prior[h].source_index;
        t.history.push_back(std::move(qa));
      }
      t.achieved_probability = j.at("achieved_probability").get<double>();
      if (t.round < 1 || t.round > dataset.rounds) {
        throw DataError("line " + std::to_string(line_number) +
                        ": round out of range");
      }
      chosen[t.video_id].push_back(t.chosen);
      dataset.targets[t.round - 1].push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("line " + std::to_string(line_number) +
                    ": bad IGS record: " + e.what());
  }
  if (!have_header) throw DataError("IGS file has no header line");
  return dataset;
}

void ExportIgs(const IgsDataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeFailure("cannot write IGS file " + path.string());
  out << SerializeIgs(dataset);
  if (!out) throw RuntimeFailure("write failed for " + path.string());
}

IgsDataset ImportIgs(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read IGS file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseIgs(buf.str());
}

}  // namespace dialret
