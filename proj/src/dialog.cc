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

#include "dialret/dialog.h"

#include <cmath>

#include "dialret/error.h"
#include "dialret/igs.h"
#include "dialret/parallel.h"
#include "dialret/text.h"

namespace dialret {

std::string_view PolicyKindName(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kIgsOracle:
      return "igs_oracle";
    case PolicyKind::kOriginalOrder:
      return "original_order";
    case PolicyKind::kRandom:
      return "random";
    case PolicyKind::kCandidateAware:
      return "candidate_aware";
  }
  return "unknown";
}

PolicyKind ParsePolicyKind(std::string_view name) {
  if (name == "igs_oracle") return PolicyKind::kIgsOracle;
  if (name == "original_order") return PolicyKind::kOriginalOrder;
  if (name == "random") return PolicyKind::kRandom;
  if (name == "candidate_aware") return PolicyKind::kCandidateAware;
  throw DataError("unknown policy '" + std::string(name) + "'");
}

std::string Policy::Name() const {
  std::string name(PolicyKindName(kind));
  if (kind == PolicyKind::kRandom && seed) {
    name += "(seed=" + std::to_string(*seed) + ")";
  } else if (kind == PolicyKind::kCandidateAware) {
    name += "(k=" + std::to_string(k) + ")";
  }
  return name;
}

nlohmann::json Policy::ToJson() const {
  nlohmann::json j;
  j["kind"] = PolicyKindName(kind);
  if (seed) j["seed"] = *seed;
  if (kind == PolicyKind::kCandidateAware) j["k"] = k;
  return j;
}

Policy Policy::FromJson(const nlohmann::json& j) {
  Policy p;
  try {
    if (j.is_string()) {
      p.kind = ParsePolicyKind(j.get<std::string>());
    } else {
      p.kind = ParsePolicyKind(j.at("kind").get<std::string>());
      if (j.contains("seed") && !j["seed"].is_null()) {
        p.seed = j["seed"].get<std::uint64_t>();
      }
      p.k = j.value("k", std::size_t{0});
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad policy: ") + e.what());
  }
  ValidatePolicy(p);
  return p;
}

void ValidatePolicy(const Policy& policy) {
  const bool is_random = policy.kind == PolicyKind::kRandom;
  if (is_random != policy.seed.has_value()) {
    throw DataError("a seed is required for, and only for, the random policy");
  }
  if (policy.kind == PolicyKind::kCandidateAware && policy.k < 1) {
    throw DataError("candidate_aware requires k >= 1");
  }
}

QuestionSelector::QuestionSelector(Policy policy, std::string_view target_id)
    : policy_(std::move(policy)),
      rng_(MixSeed(policy_.seed.value_or(0), Fnv1a64(target_id))) {
  ValidatePolicy(policy_);
}

double RestrictedEntropy(std::span<const double> probabilities,
                         std::span<const std::size_t> candidates) {
  double mass = 0.0;
  for (std::size_t c : candidates) mass += probabilities[c];
  if (mass <= 0.0) return 0.0;
  double h = 0.0;
  for (std::size_t c : candidates) {
    const double q = probabilities[c] / mass;
    if (q > 0.0) h -= q * std::log(q);
  }
  return h;
}

QAPair QuestionSelector::Ask(const VideoRecord& record,
                             const DialogHistory& history,
                             const Encoder& encoder, const Index& index) {
  const auto unused = UnusedPairs(record, history);
  if (unused.empty()) {
    throw StateError("QA pool of '" + record.id + "' is exhausted");
  }
  switch (policy_.kind) {
    case PolicyKind::kIgsOracle:
      return SelectBestQa(record, history, encoder, index).pair;
    case PolicyKind::kOriginalOrder:
      return *unused.front();
    case PolicyKind::kRandom:
      return *unused[rng_.UniformIndex(unused.size())];
    case PolicyKind::kCandidateAware: {
      const RetrievalResult current =
          Vrm(record.initial_query, history, encoder, index);
      const auto candidates = current.TopK(policy_.k);
      DialogHistory extended = history;
      extended.emplace_back();
      const QAPair* best = nullptr;
      double best_entropy = 0.0;
      for (const QAPair* qa : unused) {
        extended.back() = *qa;
        const RetrievalResult next =
            Vrm(record.initial_query, extended, encoder, index);
        const double h = RestrictedEntropy(next.probabilities, candidates);
        if (!best || h < best_entropy) {
          best = qa;
          best_entropy = h;
        }
      }
      return *best;
    }
  }
  throw StateError("unsupported policy");
}

std::string AnswerOracle(const VideoRecord& record, std::string_view question) {
  const std::string_view wanted = Trim(question);
  for (const QAPair& qa : record.qa_pool) {
    if (Trim(qa.question) == wanted) return qa.answer;
  }
  throw NotFoundError("no answer: question '" + std::string(wanted) +
                      "' is not in the pool of '" + record.id + "'");
}

Session RunSession(const Corpus& corpus, std::string_view target_id,
                   const Policy& policy, std::size_t rounds,
                   const Encoder& encoder, const Index& index) {
  const VideoRecord& record = corpus.Get(target_id);
  Session session;
  session.target_id = record.id;
  session.initial_query = record.initial_query;
  session.trace.push_back(Vrm(record.initial_query, {}, encoder, index));
  QuestionSelector selector(policy, record.id);
  for (std::size_t t = 0; t < rounds; ++t) {
    if (UnusedPairs(record, session.history).empty()) {
      session.stopped_early = true;
      break;
    }
    QAPair turn = selector.Ask(record, session.history, encoder, index);
    turn.answer = AnswerOracle(record, turn.question);
    session.history.push_back(std::move(turn));
    session.trace.push_back(
        Vrm(record.initial_query, session.history, encoder, index));
    ++session.rounds_completed;
  }
  return session;
}

ExperimentResult RunExperiment(const Corpus& corpus, const Policy& policy,
                               std::size_t rounds, const Encoder& encoder,
                               const Index& index, std::size_t jobs) {
  ValidatePolicy(policy);
  ExperimentResult result;
  result.policy = policy.Name();
  result.rounds = rounds;
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus.records[i].qa_pool.size() >= rounds) {
      members.push_back(i);
      result.target_ids.push_back(corpus.records[i].id);
    } else {
      result.skipped.push_back(corpus.records[i].id);
    }
  }
  std::vector<Session> sessions(members.size());
  ParallelFor(members.size(), jobs, [&](std::size_t s) {
    sessions[s] = RunSession(corpus, corpus.records[members[s]].id, policy,
                             rounds, encoder, index);
  });
  result.ranks.assign(rounds + 1, {});
  result.target_probability.assign(rounds + 1, {});
  for (std::size_t s = 0; s < sessions.size(); ++s) {
    const std::size_t pos = IndexPosition(index, sessions[s].target_id);
    for (std::size_t t = 0; t <= rounds; ++t) {
      result.ranks[t].push_back(sessions[s].trace[t].rank[pos]);
      result.target_probability[t].push_back(
          sessions[s].trace[t].probabilities[pos]);
    }
  }
  return result;
}

nlohmann::ordered_json SessionTraceJson(const Session& session,
                                        const Index& index, std::size_t top) {
  const std::size_t target = IndexPosition(index, session.target_id);
  nlohmann::ordered_json j;
  j["target_id"] = session.target_id;
  j["initial_query"] = session.initial_query;
  nlohmann::ordered_json history = nlohmann::ordered_json::array();
  for (const QAPair& turn : session.history) {
    history.push_back({{"question", turn.question},
                       {"answer", turn.answer},
                       {"source_index", turn.source_index}});
  }
  j["history"] = std::move(history);
  nlohmann::ordered_json rounds = nlohmann::ordered_json::array();
  for (std::size_t t = 0; t < session.trace.size(); ++t) {
    const RetrievalResult& r = session.trace[t];
    nlohmann::ordered_json row;
    row["round"] = t;
    nlohmann::ordered_json ids = nlohmann::ordered_json::array();
    nlohmann::ordered_json probs = nlohmann::ordered_json::array();
    for (std::size_t pos : r.TopK(top)) {
      ids.push_back(index.ids()[pos]);
      probs.push_back(r.probabilities[pos]);
    }
    row["top_ids"] = std::move(ids);
    row["top_probabilities"] = std::move(probs);
    row["ground_truth_rank"] = r.rank[target];
    row["ground_truth_probability"] = r.probabilities[target];
    rounds.push_back(std::move(row));
  }
  j["rounds"] = std::move(rounds);
  j["rounds_completed"] = session.rounds_completed;
  j["stopped_early"] = session.stopped_early;
  return j;
}

}  // namespace dialret
