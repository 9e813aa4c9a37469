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

#ifndef DIALRET_IGS_H_
#define DIALRET_IGS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dialret/corpus.h"
#include "dialret/encoder.h"
#include "dialret/retrieval.h"

namespace dialret {

inline constexpr std::size_t kDefaultIgsRounds = 3;
inline constexpr std::size_t kDefaultTopK = 4;

struct QaChoice {
  QAPair pair;
  // Ground-truth probability after appending `pair` to the history.
  double probability = 0.0;
};

// Position of `record` in the index; throws NotFoundError if absent.
std::size_t IndexPosition(const Index& index, const std::string& id);

// True when `pair` (by source_index) already occurs in `history`.
bool IsUsed(const QAPair& pair, const DialogHistory& history);

// Pool entries not yet present in `history`, in source_index order.
std::vector<const QAPair*> UnusedPairs(const VideoRecord& record,
                                       const DialogHistory& history);

// Ground-truth probability for every unused pair, in source_index order.
std::vector<QaChoice> ScoreUnusedPairs(const VideoRecord& record,
                                       const DialogHistory& history,
                                       const Encoder& encoder,
                                       const Index& index);

// Exhaustive argmax over unused pairs of p_target after appending the pair;
// ties go to the lowest source_index. Throws StateError when no pair is left.
QaChoice SelectBestQa(const VideoRecord& record, const DialogHistory& history,
                      const Encoder& encoder, const Index& index);

struct IgsTarget {
  std::string video_id;
  std::size_t round = 0;  // 1-based
  QAPair chosen;
  std::string initial_query;
  std::vector<std::string> topk_summaries;
  DialogHistory history;  // H_t, before appending `chosen`
  double achieved_probability = 0.0;

  bool operator==(const IgsTarget&) const = default;
};

struct IgsConfig {
  std::size_t rounds = kDefaultIgsRounds;
  std::size_t k = kDefaultTopK;
  // Fail instead of skipping records whose pool is smaller than `rounds`.
  bool strict = false;
  std::size_t jobs = 1;
};

struct IgsDataset {
  std::size_t rounds = 0;
  std::size_t k = 0;
  std::uint64_t encoder_fingerprint = 0;
  // rounds[t] holds D_{t+1} in corpus order.
  std::vector<std::vector<IgsTarget>> targets;
  std::vector<std::string> skipped;

  bool operator==(const IgsDataset&) const = default;
};

// Greedy per-record search with a frozen retriever. For each round the
// context records the top-k summaries of vrm(T, H_t) before the chosen pair
// is appended.
IgsDataset BuildIgsDataset(const Corpus& corpus, const Encoder& encoder,
                           const Index& index, const IgsConfig& config);

// Header line with the config snapshot, then one target per line grouped by
// round then corpus order.
std::string SerializeIgs(const IgsDataset& dataset);
IgsDataset ParseIgs(std::string_view contents);
void ExportIgs(const IgsDataset& dataset, const std::filesystem::path& path);
IgsDataset ImportIgs(const std::filesystem::path& path);

}  // namespace dialret

#endif  // DIALRET_IGS_H_
