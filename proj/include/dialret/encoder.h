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

#ifndef DIALRET_ENCODER_H_
#define DIALRET_ENCODER_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "dialret/corpus.h"
#include "json.hpp"

namespace dialret {

using Vector = std::vector<double>;

enum class EncoderKind { kTfidf, kHashedNgram, kPrecomputed, kLinearProjection };

std::string_view EncoderKindName(EncoderKind kind);
EncoderKind ParseEncoderKind(std::string_view name);

struct EncoderSpec {
  EncoderKind kind = EncoderKind::kTfidf;
  // Output dimension for hashed_ngram and linear_projection. For
  // linear_projection, 0 means "same as the base encoder".
  std::size_t dim = 0;
  bool normalize = true;
  // Softmax temperature applied to retrieval logits.
  double tau = 1.0;
  // hashed_ngram: word n-grams of orders 1..ngram are hashed.
  std::size_t ngram = 2;
  std::uint64_t hash_seed = 0;
  // precomputed: JSONL vector file read by FitEncoder.
  std::string vectors_path;
  // linear_projection: the frozen encoder being projected.
  std::shared_ptr<const EncoderSpec> base;

  nlohmann::json ToJson() const;
  static EncoderSpec FromJson(const nlohmann::json& j);
};

// Throws DataError on tau <= 0, a missing base, or a trainable base.
void ValidateSpec(const EncoderSpec& spec);

struct TfidfTable {
  std::vector<std::string> vocab;  // sorted
  std::vector<std::size_t> df;
  std::vector<double> idf;         // ln(N / (1 + df)) + 1
  std::size_t num_documents = 0;
};

TfidfTable FitTfidf(std::span<const std::string> documents);

using PrecomputedTable = std::unordered_map<std::string, Vector>;

// Reads `{"dim": d}` followed by `{"id": ..., "vector": [...]}` lines.
PrecomputedTable LoadPrecomputedVectors(const std::filesystem::path& path,
                                        std::size_t* dim_out = nullptr);

void NormalizeInPlace(Vector& v);

// A fitted, immutable text-to-vector map. The only mutation path is
// mutable_weights() on a linear projection, used by the trainer.
class Encoder {
 public:
  const EncoderSpec& spec() const { return spec_; }
  std::size_t dim() const { return dim_; }
  double tau() const { return spec_.tau; }
  std::uint64_t fingerprint() const { return fingerprint_; }

  Vector EncodeText(std::string_view text) const;
  Vector EncodeItem(const VideoRecord& record) const;

  bool is_projection() const;
  // Projection internals; valid only when is_projection().
  const Encoder& base() const;
  std::size_t base_dim() const;
  std::span<const double> weights() const;  // row-major dim x base_dim
  std::span<double> mutable_weights();
  // Recomputes the fingerprint after weights changed.
  void Refresh();

  const TfidfTable* tfidf() const;

  // Fitted state serialization (spec plus learned tables and weights).
  nlohmann::json ToJson() const;
  static Encoder FromJson(const nlohmann::json& j);

  friend Encoder FitEncoder(const Corpus&, const EncoderSpec&);
  friend Encoder FitEncoderWithTable(const Corpus&, const EncoderSpec&,
                                     PrecomputedTable, std::size_t);
  friend Encoder MakeTfidfEncoder(TfidfTable, const EncoderSpec&);

 private:
  struct TfidfState {
    TfidfTable table;
    std::unordered_map<std::string, std::size_t> lookup;
  };
  struct HashedState {};
  struct PrecomputedState {
    PrecomputedTable table;
  };
  struct ProjectionState {
    std::shared_ptr<const Encoder> base;
    std::vector<double> w;
  };

  Encoder() = default;
  Vector Finish(Vector v) const;
  Vector EncodeRaw(std::string_view text) const;
  Vector Project(const Vector& base_vec) const;

  EncoderSpec spec_;
  std::size_t dim_ = 0;
  std::variant<TfidfState, HashedState, PrecomputedState, ProjectionState>
      state_;
  std::uint64_t fingerprint_ = 0;
};

// Fits an encoder. tfidf documents are one per record (summary, initial
// query and every QA pair); linear_projection starts from identity weights,
// padded or truncated to dim x base_dim.
Encoder FitEncoder(const Corpus& corpus, const EncoderSpec& spec);
Encoder FitEncoderWithTable(const Corpus& corpus, const EncoderSpec& spec,
                            PrecomputedTable table, std::size_t dim);
Encoder MakeTfidfEncoder(TfidfTable table, const EncoderSpec& spec);

void SaveEncoder(const Encoder& encoder, const std::filesystem::path& path);
Encoder LoadEncoder(const std::filesystem::path& path);

}  // namespace dialret

#endif  // DIALRET_ENCODER_H_
