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

#ifndef DIALRET_RETRIEVAL_H_
#define DIALRET_RETRIEVAL_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dialret/corpus.h"
#include "dialret/encoder.h"

namespace dialret {

// Stacked item embeddings, one row per corpus record in corpus order.
class Index {
 public:
  Index() = default;
  Index(std::vector<std::string> ids, std::vector<double> rows,
        std::size_t dim, std::uint64_t encoder_fingerprint);

  std::size_t size() const { return ids_.size(); }
  std::size_t dim() const { return dim_; }
  std::uint64_t encoder_fingerprint() const { return fingerprint_; }
  const std::vector<std::string>& ids() const { return ids_; }
  std::span<const double> row(std::size_t i) const {
    return {rows_.data() + i * dim_, dim_};
  }
  std::span<const double> matrix() const { return rows_; }

  bool operator==(const Index&) const = default;

 private:
  std::vector<std::string> ids_;
  std::vector<double> rows_;
  std::size_t dim_ = 0;
  std::uint64_t fingerprint_ = 0;
};

Index BuildIndex(const Corpus& corpus, const Encoder& encoder);

// Binary layout (little-endian): "DRIX", u32 version, u64 N, u64 d,
// u64 fingerprint, N*d f64 row-major, then N ids as u32 length + UTF-8 bytes.
void SaveIndex(const Index& index, const std::filesystem::path& path);
Index LoadIndex(const std::filesystem::path& path);

inline constexpr std::string_view kContextSeparator = " | ";

// T | q1 | a1 | ... | qt | at
std::string BuildQueryContext(std::string_view initial_query,
                              const DialogHistory& history);

struct RetrievalResult {
  std::vector<double> probabilities;  // softmax over corpus positions
  std::vector<std::size_t> ranking;   // positions, best first
  std::vector<std::size_t> rank;      // 1-based rank per position

  std::size_t size() const { return probabilities.size(); }
  std::vector<std::size_t> TopK(std::size_t k) const;

  bool operator==(const RetrievalResult&) const = default;
};

// Max-subtracted softmax in double precision.
std::vector<double> Softmax(std::span<const double> logits);

// Raw similarities g . Y_i for every index row.
std::vector<double> ScoreAll(std::span<const double> query, const Index& index);

// probabilities = softmax(scores / tau). The ranking orders positions by
// descending raw score (equivalently descending probability), ties by
// ascending position, so it does not depend on tau.
RetrievalResult MakeResult(std::span<const double> scores, double tau);

// Throws DataError when the index was built with a different encoder.
RetrievalResult Retrieve(std::string_view context, const Encoder& encoder,
                         const Index& index);

RetrievalResult Vrm(std::string_view initial_query,
                    const DialogHistory& history, const Encoder& encoder,
                    const Index& index);

}  // namespace dialret

#endif  // DIALRET_RETRIEVAL_H_
