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

#ifndef DIALRET_SESSION_SERVICE_H_
#define DIALRET_SESSION_SERVICE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "dialret/corpus.h"
#include "dialret/dialog.h"
#include "dialret/encoder.h"
#include "dialret/retrieval.h"
#include "json.hpp"

namespace dialret {

// Error surfaced to HTTP clients as {"code": ..., "message": ...}.
class ApiError : public std::runtime_error {
 public:
  ApiError(int status, std::string code, const std::string& message)
      : std::runtime_error(message), status_(status), code_(std::move(code)) {}
  int status() const { return status_; }
  const std::string& code() const { return code_; }

 private:
  int status_;
  std::string code_;
};

enum class SessionState { kReadyForQuestion, kAwaitingAnswer, kFinished };
std::string_view SessionStateName(SessionState state);

struct ServiceOptions {
  std::string corpus_name = "default";
  // Append-only per-session JSONL logs; empty disables persistence.
  std::filesystem::path data_dir;
  // Exposes ground-truth ranks and full probability vectors in responses.
  bool debug = false;
  std::size_t default_k = 4;
};

// Random n-record subset kept in corpus order. n >= corpus size returns the
// corpus unchanged.
Corpus SampleSubset(const Corpus& corpus, std::size_t n, std::uint64_t seed);

// Live human-in-the-loop sessions over one shared, read-only corpus and
// index. Sessions are isolated; calls on one session are serialized.
class SessionService {
 public:
  SessionService(Corpus corpus, Encoder encoder, ServiceOptions options);

  // request: {"corpus_ref"?, "policy", "k"?, "target": "<id>" | "random(<seed>)"}
  nlohmann::json Create(const nlohmann::json& request);
  nlohmann::json Get(const std::string& session_id) const;
  nlohmann::json NextQuestion(const std::string& session_id);
  nlohmann::json SubmitAnswer(const std::string& session_id,
                              std::string_view answer);
  nlohmann::json Finish(const std::string& session_id);
  nlohmann::json Candidates(const std::string& session_id,
                            std::optional<std::size_t> k) const;

  // Replays logs from data_dir into memory. Returns the number restored.
  std::size_t RecoverFromLogs();

  const Corpus& corpus() const { return corpus_; }
  const Encoder& encoder() const { return encoder_; }
  const Index& index() const { return index_; }
  std::size_t session_count() const;

 private:
  struct Live {
    std::string id;
    std::size_t target = 0;  // corpus position
    Policy policy;
    std::size_t k = 4;
    QuestionSelector selector;
    SessionState state = SessionState::kReadyForQuestion;
    std::optional<QAPair> pending;
    DialogHistory history;
    std::vector<RetrievalResult> trace;
    mutable std::mutex mu;

    Live(std::string id_in, std::size_t target_in, Policy policy_in,
         std::size_t k_in, std::string_view target_id)
        : id(std::move(id_in)),
          target(target_in),
          policy(policy_in),
          k(k_in),
          selector(std::move(policy_in), target_id) {}
  };

  std::shared_ptr<Live> Lookup(const std::string& session_id) const;
  std::size_t ResolveTarget(const nlohmann::json& target) const;
  nlohmann::json CandidateList(const RetrievalResult& r, std::size_t k) const;
  nlohmann::json RoundJson(const Live& s, std::size_t round) const;
  nlohmann::json SnapshotJson(const Live& s) const;
  void AppendLog(const Live& s, const nlohmann::json& event) const;
  void ApplyQuestion(Live& s, const QAPair& pair);
  void ApplyAnswer(Live& s, std::string_view answer);
  std::shared_ptr<Live> Insert(std::string id, std::size_t target,
                               Policy policy, std::size_t k);

  Corpus corpus_;
  Encoder encoder_;
  Index index_;
  ServiceOptions options_;
  mutable std::shared_mutex sessions_mu_;
  std::map<std::string, std::shared_ptr<Live>> sessions_;
};

}  // namespace dialret

#endif  // DIALRET_SESSION_SERVICE_H_
