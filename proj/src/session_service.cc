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

#include "dialret/session_service.h"

#include <algorithm>
#include <fstream>
#include <random>
#include <regex>

#include "dialret/error.h"
#include "dialret/eval.h"
#include "dialret/igs.h"
#include "dialret/random.h"
#include "dialret/text.h"

namespace dialret {
namespace {

using json = nlohmann::json;

std::string NewSessionId() {
  static std::mutex mu;
  static std::random_device device;
  std::lock_guard<std::mutex> lock(mu);
  std::string id;
  for (int i = 0; i < 2; ++i) {
    const std::uint64_t hi = device();
    const std::uint64_t lo = device();
    id += HexU64((hi << 32) ^ lo);
  }
  return id;
}

ApiError StateErr(const std::string& message) {
  return ApiError(400, "state_error", message);
}

}  // namespace

std::string_view SessionStateName(SessionState state) {
  switch (state) {
    case SessionState::kReadyForQuestion:
      return "ready_for_question";
    case SessionState::kAwaitingAnswer:
      return "awaiting_answer";
    case SessionState::kFinished:
      return "finished";
  }
  return "unknown";
}

Corpus SampleSubset(const Corpus& corpus, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw DataError("subset size must be >= 1");
  if (n >= corpus.size()) return corpus;
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.Shuffle(std::span<std::size_t>(order));
  order.resize(n);
  std::sort(order.begin(), order.end());
  Corpus out;
  out.split_tag = corpus.split_tag;
  for (std::size_t pos : order) out.records.push_back(corpus.records[pos]);
  return out;
}

SessionService::SessionService(Corpus corpus, Encoder encoder,
                               ServiceOptions options)
    : corpus_(std::move(corpus)),
      encoder_(std::move(encoder)),
      index_(BuildIndex(corpus_, encoder_)),
      options_(std::move(options)) {
  if (!options_.data_dir.empty()) {
    std::filesystem::create_directories(options_.data_dir);
  }
}

std::size_t SessionService::session_count() const {
  std::shared_lock lock(sessions_mu_);
  return sessions_.size();
}

std::shared_ptr<SessionService::Live> SessionService::Lookup(
    const std::string& session_id) const {
  std::shared_lock lock(sessions_mu_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) {
    throw ApiError(404, "unknown_session",
                   "no session with id '" + session_id + "'");
  }
  return it->second;
}

std::size_t SessionService::ResolveTarget(const json& target) const {
  if (!target.is_string()) {
    throw ApiError(400, "bad_request", "target must be a string");
  }
  const std::string text = target.get<std::string>();
  static const std::regex kRandom(R"(random\((?:seed=)?(\d+)\))");
  std::smatch m;
  if (std::regex_match(text, m, kRandom)) {
    Rng rng(std::stoull(m[1].str()));
    return rng.UniformIndex(corpus_.size());
  }
  auto pos = corpus_.Find(text);
  if (!pos) {
    throw ApiError(404, "unknown_target", "unknown target id '" + text + "'");
  }
  return *pos;
}

json SessionService::CandidateList(const RetrievalResult& r,
                                   std::size_t k) const {
  const auto top = r.TopK(k);
  double mass = 0.0;
  for (std::size_t pos : top) mass += r.probabilities[pos];
  json list = json::array();
  for (std::size_t pos : top) {
    const VideoRecord& rec = corpus_.records[pos];
    json c;
    c["id"] = rec.id;
    c["summary"] = rec.summary;
    if (rec.image_url) c["image_url"] = *rec.image_url;
    c["probability"] = r.probabilities[pos];
    c["share"] = mass > 0.0 ? r.probabilities[pos] / mass : 0.0;
    list.push_back(std::move(c));
  }
  return list;
}

json SessionService::RoundJson(const Live& s, std::size_t round) const {
  const RetrievalResult& r = s.trace[round];
  json j;
  j["round"] = round;
  json ids = json::array();
  json probs = json::array();
  for (std::size_t pos : r.TopK(s.k)) {
    ids.push_back(corpus_.records[pos].id);
    probs.push_back(r.probabilities[pos]);
  }
  j["top_ids"] = std::move(ids);
  j["top_probabilities"] = std::move(probs);
  if (options_.debug) {
    j["ground_truth_rank"] = r.rank[s.target];
    j["ground_truth_probability"] = r.probabilities[s.target];
    j["probabilities"] = r.probabilities;
  }
  return j;
}

json SessionService::SnapshotJson(const Live& s) const {
  json j;
  j["session_id"] = s.id;
  j["state"] = SessionStateName(s.state);
  j["round"] = s.history.size();
  j["policy"] = s.policy.ToJson();
  j["k"] = s.k;
  j["target_summary"] = corpus_.records[s.target].summary;
  if (corpus_.records[s.target].image_url) {
    j["target_image_url"] = *corpus_.records[s.target].image_url;
  }
  if (options_.debug) j["target_id"] = corpus_.records[s.target].id;
  j["pending_question"] = s.pending ? json(s.pending->question) : json(nullptr);
  json history = json::array();
  for (const QAPair& turn : s.history) {
    history.push_back({{"question", turn.question}, {"answer", turn.answer}});
  }
  j["history"] = std::move(history);
  j["candidates"] = CandidateList(s.trace.back(), s.k);
  json trace = json::array();
  for (std::size_t t = 0; t < s.trace.size(); ++t) trace.push_back(RoundJson(s, t));
  j["trace"] = std::move(trace);
  return j;
}

void SessionService::AppendLog(const Live& s, const json& event) const {
  if (options_.data_dir.empty()) return;
  std::ofstream out(options_.data_dir / (s.id + ".jsonl"), std::ios::app);
  if (!out) throw RuntimeFailure("cannot append to session log for " + s.id);
  out << event.dump() << '\n';
}

std::shared_ptr<SessionService::Live> SessionService::Insert(
    std::string id, std::size_t target, Policy policy, std::size_t k) {
  auto live = std::make_shared<Live>(id, target, std::move(policy), k,
                                     corpus_.records[target].id);
  const VideoRecord& rec = corpus_.records[target];
  live->trace.push_back(Vrm(rec.initial_query, {}, encoder_, index_));
  std::unique_lock lock(sessions_mu_);
  sessions_.emplace(std::move(id), live);
  return live;
}

json SessionService::Create(const json& request) {
  if (!request.is_object()) {
    throw ApiError(400, "bad_request", "request body must be a JSON object");
  }
  if (auto it = request.find("corpus_ref");
      it != request.end() && !it->is_null() &&
      it->get<std::string>() != options_.corpus_name) {
    throw ApiError(404, "unknown_corpus",
                   "corpus '" + it->get<std::string>() + "' is not loaded");
  }
  Policy policy;
  std::size_t k = options_.default_k;
  try {
    policy = Policy::FromJson(request.value("policy", json("igs_oracle")));
    k = request.value("k", options_.default_k);
  } catch (const DataError& e) {
    throw ApiError(400, "bad_request", e.what());
  } catch (const json::exception& e) {
    throw ApiError(400, "bad_request", e.what());
  }
  if (k < 1) throw ApiError(400, "bad_request", "k must be >= 1");
  if (!request.contains("target")) {
    throw ApiError(400, "bad_request", "missing target");
  }
  const std::size_t target = ResolveTarget(request["target"]);
  auto live = Insert(NewSessionId(), target, policy, k);
  std::lock_guard<std::mutex> lock(live->mu);
  json event;
  event["event"] = "create";
  event["session_id"] = live->id;
  event["target_id"] = corpus_.records[target].id;
  event["policy"] = policy.ToJson();
  event["k"] = k;
  AppendLog(*live, event);
  return SnapshotJson(*live);
}

json SessionService::Get(const std::string& session_id) const {
  auto live = Lookup(session_id);
  std::lock_guard<std::mutex> lock(live->mu);
  return SnapshotJson(*live);
}

void SessionService::ApplyQuestion(Live& s, const QAPair& pair) {
  s.pending = pair;
  s.state = SessionState::kAwaitingAnswer;
}

void SessionService::ApplyAnswer(Live& s, std::string_view answer) {
  QAPair turn = *s.pending;
  turn.answer = std::string(answer);
  s.history.push_back(std::move(turn));
  s.pending.reset();
  const VideoRecord& rec = corpus_.records[s.target];
  s.trace.push_back(Vrm(rec.initial_query, s.history, encoder_, index_));
  s.state = SessionState::kReadyForQuestion;
}

json SessionService::NextQuestion(const std::string& session_id) {
  auto live = Lookup(session_id);
  std::lock_guard<std::mutex> lock(live->mu);
  if (live->state != SessionState::kReadyForQuestion) {
    throw StateErr("cannot ask a question in state " +
                   std::string(SessionStateName(live->state)));
  }
  const VideoRecord& rec = corpus_.records[live->target];
  if (UnusedPairs(rec, live->history).empty()) {
    throw ApiError(400, "pool_exhausted",
                   "no questions left for this session; finish it instead");
  }
  const QAPair pair = live->selector.Ask(rec, live->history, encoder_, index_);
  ApplyQuestion(*live, pair);
  json event;
  event["event"] = "question";
  event["question"] = pair.question;
  event["source_index"] = pair.source_index;
  AppendLog(*live, event);
  json out;
  out["session_id"] = live->id;
  out["question"] = pair.question;
  out["round"] = live->history.size() + 1;
  out["state"] = SessionStateName(live->state);
  return out;
}

json SessionService::SubmitAnswer(const std::string& session_id,
                                  std::string_view answer) {
  auto live = Lookup(session_id);
  std::lock_guard<std::mutex> lock(live->mu);
  if (live->state != SessionState::kAwaitingAnswer) {
    throw StateErr("cannot answer in state " +
                   std::string(SessionStateName(live->state)));
  }
  if (Trim(answer).empty()) {
    throw ApiError(400, "empty_answer", "answer must not be empty");
  }
  ApplyAnswer(*live, answer);
  json event;
  event["event"] = "answer";
  event["answer"] = answer;
  AppendLog(*live, event);
  json out = RoundJson(*live, live->trace.size() - 1);
  out["session_id"] = live->id;
  out["state"] = SessionStateName(live->state);
  out["candidates"] = CandidateList(live->trace.back(), live->k);
  return out;
}

json SessionService::Finish(const std::string& session_id) {
  auto live = Lookup(session_id);
  std::lock_guard<std::mutex> lock(live->mu);
  if (live->state != SessionState::kReadyForQuestion) {
    throw StateErr("cannot finish in state " +
                   std::string(SessionStateName(live->state)));
  }
  live->state = SessionState::kFinished;
  std::vector<std::size_t> ranks;
  for (const RetrievalResult& r : live->trace) ranks.push_back(r.rank[live->target]);
  json event;
  event["event"] = "finish";
  event["ranks"] = ranks;
  AppendLog(*live, event);

  json out = SnapshotJson(*live);
  out["target_id"] = corpus_.records[live->target].id;
  out["ranks"] = ranks;
  const Metrics m = ComputeMetrics(std::span<const std::size_t>(ranks).last(1));
  out["metrics"] = {{"R1", m.r1},           {"R5", m.r5},
                    {"R10", m.r10},         {"MedianR", m.median_rank},
                    {"MeanR", m.mean_rank}, {"round", ranks.size() - 1}};
  return out;
}

json SessionService::Candidates(const std::string& session_id,
                                std::optional<std::size_t> k) const {
  auto live = Lookup(session_id);
  std::lock_guard<std::mutex> lock(live->mu);
  const std::size_t count = k.value_or(live->k);
  if (count < 1) throw ApiError(400, "bad_request", "k must be >= 1");
  json out;
  out["session_id"] = live->id;
  out["round"] = live->history.size();
  out["candidates"] = CandidateList(live->trace.back(), count);
  return out;
}

std::size_t SessionService::RecoverFromLogs() {
  if (options_.data_dir.empty()) return 0;
  std::size_t restored = 0;
  std::vector<std::filesystem::path> logs;
  for (const auto& entry : std::filesystem::directory_iterator(options_.data_dir)) {
    if (entry.path().extension() == ".jsonl") logs.push_back(entry.path());
  }
  std::sort(logs.begin(), logs.end());
  for (const auto& path : logs) {
    std::ifstream in(path);
    std::string line;
    std::shared_ptr<Live> live;
    while (std::getline(in, line)) {
      if (Trim(line).empty()) continue;
      const json event = json::parse(line, nullptr, false);
      if (event.is_discarded()) break;  // torn final write
      const std::string kind = event.value("event", "");
      if (kind == "create") {
        {
          std::shared_lock lock(sessions_mu_);
          if (sessions_.contains(event.at("session_id").get<std::string>())) break;
        }
        auto pos = corpus_.Find(event.at("target_id").get<std::string>());
        if (!pos) break;
        live = Insert(event.at("session_id").get<std::string>(), *pos,
                      Policy::FromJson(event.at("policy")),
                      event.at("k").get<std::size_t>());
        ++restored;
      } else if (!live) {
        break;
      } else if (kind == "question") {
        const VideoRecord& rec = corpus_.records[live->target];
        const QAPair pair =
            live->selector.Ask(rec, live->history, encoder_, index_);
        if (pair.question != event.at("question").get<std::string>()) {
          throw DataError("session log " + path.string() +
                          " diverges from the current corpus/encoder");
        }
        ApplyQuestion(*live, pair);
      } else if (kind == "answer") {
        if (!live->pending) break;
        ApplyAnswer(*live, event.at("answer").get<std::string>());
      } else if (kind == "finish") {
        live->state = SessionState::kFinished;
      }
    }
  }
  return restored;
}

}  // namespace dialret
