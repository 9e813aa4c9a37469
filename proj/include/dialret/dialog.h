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

#ifndef DIALRET_DIALOG_H_
#define DIALRET_DIALOG_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dialret/corpus.h"
#include "dialret/encoder.h"
#include "dialret/random.h"
#include "dialret/retrieval.h"
#include "json.hpp"

namespace dialret {

enum class PolicyKind { kIgsOracle, kOriginalOrder, kRandom, kCandidateAware };

std::string_view PolicyKindName(PolicyKind kind);
PolicyKind ParsePolicyKind(std::string_view name);

struct Policy {
  PolicyKind kind = PolicyKind::kIgsOracle;
  std::optional<std::uint64_t> seed;  // random only
  std::size_t k = 0;                  // candidate_aware only

  std::string Name() const;  // e.g. "random(seed=3)", "candidate_aware(k=4)"
  nlohmann::json ToJson() const;
  static Policy FromJson(const nlohmann::json& j);
};

// Throws DataError when seed/k do not match the policy kind.
void ValidatePolicy(const Policy& policy);

// Stateful question chooser for one session. The random policy draws from a
// stream seeded by (policy seed, target id) and advances once per call.
class QuestionSelector {
 public:
  QuestionSelector(Policy policy, std::string_view target_id);

  // Chooses an unused pool pair of `record`. Throws StateError when the pool
  // is exhausted.
  QAPair Ask(const VideoRecord& record, const DialogHistory& history,
             const Encoder& encoder, const Index& index);

  const Policy& policy() const { return policy_; }

 private:
  Policy policy_;
  Rng rng_;
};

// Shannon entropy (nats) of p restricted to `candidates`, renormalized.
double RestrictedEntropy(std::span<const double> probabilities,
                         std::span<const std::size_t> candidates);

// Looks the trimmed question up in the record's pool. Throws NotFoundError
// when no pool question matches.
std::string AnswerOracle(const VideoRecord& record, std::string_view question);

struct Session {
  std::string target_id;
  std::string initial_query;
  DialogHistory history;
  std::vector<RetrievalResult> trace;  // trace[0] is the pre-dialog result
  std::size_t rounds_completed = 0;
  bool stopped_early = false;  // pool ran out before the requested rounds

  bool operator==(const Session&) const = default;
};

Session RunSession(const Corpus& corpus, std::string_view target_id,
                   const Policy& policy, std::size_t rounds,
                   const Encoder& encoder, const Index& index);

struct ExperimentResult {
  std::string policy;
  std::size_t rounds = 0;
  std::vector<std::string> target_ids;  // records that ran, corpus order
  std::vector<std::string> skipped;     // pools smaller than `rounds`
  // ranks[t][i]: 1-based rank of target_ids[i] after round t.
  std::vector<std::vector<std::size_t>> ranks;
  // target_probability[t][i]: the target's probability after round t.
  std::vector<std::vector<double>> target_probability;
};

// Runs a session for every record whose pool supports `rounds`, optionally
// on several threads; results are merged in corpus order.
ExperimentResult RunExperiment(const Corpus& corpus, const Policy& policy,
                               std::size_t rounds, const Encoder& encoder,
                               const Index& index, std::size_t jobs = 1);

// Trace export: per round the top-10 ids and probabilities plus the
// ground-truth rank and probability.
nlohmann::ordered_json SessionTraceJson(const Session& session,
                                        const Index& index,
                                        std::size_t top = 10);

}  // namespace dialret

#endif  // DIALRET_DIALOG_H_
