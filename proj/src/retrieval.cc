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

#include "dialret/retrieval.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "dialret/error.h"
#include "dialret/text.h"

namespace dialret {
namespace {

constexpr char kMagic[4] = {'D', 'R', 'I', 'X'};
constexpr std::uint32_t kIndexVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "index persistence assumes a little-endian host");

template <typename T>
void WritePod(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T ReadPod(std::ifstream& in, const std::filesystem::path& path) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw DataError("truncated index file " + path.string());
  return value;
}

}  // namespace

Index::Index(std::vector<std::string> ids, std::vector<double> rows,
             std::size_t dim, std::uint64_t encoder_fingerprint)
    : ids_(std::move(ids)),
      rows_(std::move(rows)),
      dim_(dim),
      fingerprint_(encoder_fingerprint) {
  if (rows_.size() != ids_.size() * dim_) {
    throw DataError("index row count does not match id count");
  }
  for (double x : rows_) {
    if (!std::isfinite(x)) throw DataError("index has a non-finite entry");
  }
}

Index BuildIndex(const Corpus& corpus, const Encoder& encoder) {
  std::vector<std::string> ids;
  std::vector<double> rows;
  ids.reserve(corpus.size());
  rows.reserve(corpus.size() * encoder.dim());
  for (const VideoRecord& r : corpus.records) {
    ids.push_back(r.id);
    Vector v = encoder.EncodeItem(r);
    rows.insert(rows.end(), v.begin(), v.end());
  }
  return Index(std::move(ids), std::move(rows), encoder.dim(),
               encoder.fingerprint());
}

void SaveIndex(const Index& index, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeFailure("cannot write index file " + path.string());
  out.write(kMagic, sizeof(kMagic));
  WritePod(out, kIndexVersion);
  WritePod(out, static_cast<std::uint64_t>(index.size()));
  WritePod(out, static_cast<std::uint64_t>(index.dim()));
  WritePod(out, index.encoder_fingerprint());
  const auto m = index.matrix();
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
  for (const std::string& id : index.ids()) {
    WritePod(out, static_cast<std::uint32_t>(id.size()));
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
  }
  if (!out) throw RuntimeFailure("write failed for " + path.string());
}

Index LoadIndex(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read index file " + path.string());
  char magic[4];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    throw DataError(path.string() + " is not an index file");
  }
  const auto version = ReadPod<std::uint32_t>(in, path);
  if (version != kIndexVersion) {
    throw DataError("unsupported index version " + std::to_string(version));
  }
  const auto n = ReadPod<std::uint64_t>(in, path);
  const auto d = ReadPod<std::uint64_t>(in, path);
  const auto fingerprint = ReadPod<std::uint64_t>(in, path);
  std::vector<double> rows(n * d);
  in.read(reinterpret_cast<char*>(rows.data()),
          static_cast<std::streamsize>(rows.size() * sizeof(double)));
  if (!in) throw DataError("truncated index file " + path.string());
  std::vector<std::string> ids(n);
  for (auto& id : ids) {
    const auto len = ReadPod<std::uint32_t>(in, path);
    id.resize(len);
    in.read(id.data(), len);
    if (!in) throw DataError("truncated index file " + path.string());
  }
  return Index(std::move(ids), std::move(rows), d, fingerprint);
}

std::string BuildQueryContext(std::string_view initial_query,
                              const DialogHistory& history) {
  std::string out(initial_query);
  for (const QAPair& turn : history) {
    out += kContextSeparator;
    out += turn.question;
    out += kContextSeparator;
    out += turn.answer;
  }
  return out;
}

std::vector<std::size_t> RetrievalResult::TopK(std::size_t k) const {
  k = std::min(k, ranking.size());
  return {ranking.begin(), ranking.begin() + static_cast<std::ptrdiff_t>(k)};
}

std::vector<double> Softmax(std::span<const double> logits) {
  std::vector<double> p(logits.size());
  if (logits.empty()) return p;
  const double max = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - max);
    sum += p[i];
  }
  for (double& x : p) x /= sum;
  return p;
}

std::vector<double> ScoreAll(std::span<const double> query,
                             const Index& index) {
  std::vector<double> scores(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) {
    const auto row = index.row(i);
    double dot = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) dot += query[c] * row[c];
    scores[i] = dot;
  }
  return scores;
}

RetrievalResult MakeResult(std::span<const double> scores, double tau) {
  std::vector<double> logits(scores.begin(), scores.end());
  for (double& z : logits) z /= tau;
  RetrievalResult result;
  result.probabilities = Softmax(logits);
  result.ranking.resize(scores.size());
  std::iota(result.ranking.begin(), result.ranking.end(), std::size_t{0});
  std::stable_sort(
      result.ranking.begin(), result.ranking.end(),
      [&scores](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  result.rank.resize(scores.size());
  for (std::size_t r = 0; r < result.ranking.size(); ++r) {
    result.rank[result.ranking[r]] = r + 1;
  }
  return result;
}

RetrievalResult Retrieve(std::string_view context, const Encoder& encoder,
                         const Index& index) {
  if (encoder.fingerprint() != index.encoder_fingerprint()) {
    throw DataError("index fingerprint " +
                    HexU64(index.encoder_fingerprint()) +
                    " does not match encoder " +
                    HexU64(encoder.fingerprint()));
  }
  const Vector g = encoder.EncodeText(context);
  return MakeResult(ScoreAll(g, index), encoder.tau());
}

RetrievalResult Vrm(std::string_view initial_query,
                    const DialogHistory& history, const Encoder& encoder,
                    const Index& index) {
  return Retrieve(BuildQueryContext(initial_query, history), encoder, index);
}

}  // namespace dialret
