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

#include "dialret/encoder.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "dialret/error.h"
#include "dialret/random.h"
#include "dialret/text.h"

namespace dialret {
namespace {

using json = nlohmann::json;

std::string RecordDocument(const VideoRecord& r) {
  std::string doc = r.summary + " " + r.initial_query;
  for (const QAPair& qa : r.qa_pool) doc += " " + qa.question + " " + qa.answer;
  return doc;
}

void RequireFinite(const Vector& v, const std::string& what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw DataError(what + " has a non-finite entry");
  }
}

}  // namespace

std::string_view EncoderKindName(EncoderKind kind) {
  switch (kind) {
    case EncoderKind::kTfidf:
      return "tfidf";
    case EncoderKind::kHashedNgram:
      return "hashed_ngram";
    case EncoderKind::kPrecomputed:
      return "precomputed";
    case EncoderKind::kLinearProjection:
      return "linear_projection";
  }
  return "unknown";
}

EncoderKind ParseEncoderKind(std::string_view name) {
  if (name == "tfidf") return EncoderKind::kTfidf;
  if (name == "hashed_ngram") return EncoderKind::kHashedNgram;
  if (name == "precomputed") return EncoderKind::kPrecomputed;
  if (name == "linear_projection") return EncoderKind::kLinearProjection;
  throw DataError("unknown encoder kind '" + std::string(name) + "'");
}

json EncoderSpec::ToJson() const {
  json j;
  j["kind"] = EncoderKindName(kind);
  j["dim"] = dim;
  j["normalize"] = normalize;
  j["tau"] = tau;
  if (kind == EncoderKind::kHashedNgram) {
    j["n"] = ngram;
    j["hash_seed"] = hash_seed;
  }
  if (kind == EncoderKind::kPrecomputed) j["vectors_path"] = vectors_path;
  if (base) j["base"] = base->ToJson();
  return j;
}

EncoderSpec EncoderSpec::FromJson(const json& j) {
  if (!j.is_object()) throw DataError("encoder spec must be a JSON object");
  EncoderSpec spec;
  try {
    spec.kind = ParseEncoderKind(j.at("kind").get<std::string>());
    spec.dim = j.value("dim", std::size_t{0});
    spec.normalize = j.value("normalize", true);
    spec.tau = j.value("tau", 1.0);
    spec.ngram = j.value("n", std::size_t{2});
    spec.hash_seed = j.value("hash_seed", std::uint64_t{0});
    spec.vectors_path = j.value("vectors_path", std::string());
    if (auto it = j.find("base"); it != j.end()) {
      spec.base = std::make_shared<const EncoderSpec>(FromJson(*it));
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("bad encoder spec: ") + e.what());
  }
  ValidateSpec(spec);
  return spec;
}

void ValidateSpec(const EncoderSpec& spec) {
  if (!(spec.tau > 0.0) || !std::isfinite(spec.tau)) {
    throw DataError("encoder tau must be a positive finite number");
  }
  switch (spec.kind) {
    case EncoderKind::kHashedNgram:
      if (spec.dim < 1) throw DataError("hashed_ngram requires dim >= 1");
      if (spec.ngram < 1) throw DataError("hashed_ngram requires n >= 1");
      break;
    case EncoderKind::kLinearProjection:
      if (!spec.base) throw DataError("linear_projection requires a base spec");
      if (spec.base->kind == EncoderKind::kLinearProjection) {
        throw DataError("linear_projection base must not be trainable");
      }
      ValidateSpec(*spec.base);
      break;
    default:
      break;
  }
}

TfidfTable FitTfidf(std::span<const std::string> documents) {
  std::map<std::string, std::size_t> df;
  for (const std::string& doc : documents) {
    auto tokens = Tokenize(doc);
    std::set<std::string> unique(tokens.begin(), tokens.end());
    for (const auto& t : unique) ++df[t];
  }
  TfidfTable table;
  table.num_documents = documents.size();
  const double n = static_cast<double>(documents.size());
  for (const auto& [token, count] : df) {
    table.vocab.push_back(token);
    table.df.push_back(count);
    table.idf.push_back(std::log(n / (1.0 + static_cast<double>(count))) + 1.0);
  }
  return table;
}

PrecomputedTable LoadPrecomputedVectors(const std::filesystem::path& path,
                                        std::size_t* dim_out) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read vector file " + path.string());
  std::string line;
  std::size_t line_number = 0;
  std::size_t dim = 0;
  bool have_header = false;
  PrecomputedTable table;
  while (std::getline(in, line)) {
    ++line_number;
    if (Trim(line).empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError("line " + std::to_string(line_number) +
                      ": malformed JSON: " + e.what());
    }
    const std::string where = "line " + std::to_string(line_number) + ": ";
    if (!have_header) {
      if (!obj.is_object() || !obj.contains("dim") ||
          !obj["dim"].is_number_unsigned() || obj["dim"].get<std::size_t>() < 1) {
        throw DataError(where + "first line must be {\"dim\": d} with d >= 1");
      }
      dim = obj["dim"].get<std::size_t>();
      have_header = true;
      continue;
    }
    if (!obj.is_object() || !obj.contains("id") || !obj["id"].is_string() ||
        !obj.contains("vector") || !obj["vector"].is_array()) {
      throw DataError(where + "expected {\"id\": str, \"vector\": [float]}");
    }
    Vector v;
    for (const auto& x : obj["vector"]) {
      if (!x.is_number()) throw DataError(where + "vector entries must be numbers");
      v.push_back(x.get<double>());
    }
    if (v.size() != dim) {
      throw DataError(where + "vector has " + std::to_string(v.size()) +
                      " entries, header says " + std::to_string(dim));
    }
    RequireFinite(v, where + "vector");
    std::string id = obj["id"].get<std::string>();
    if (!table.emplace(id, std::move(v)).second) {
      throw DataError(where + "duplicate vector id '" + id + "'");
    }
  }
  if (!have_header) throw DataError("vector file " + path.string() + " is empty");
  if (dim_out) *dim_out = dim;
  return table;
}

void NormalizeInPlace(Vector& v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  if (sq <= 0.0) return;
  const double inv = 1.0 / std::sqrt(sq);
  for (double& x : v) x *= inv;
}

Vector Encoder::Finish(Vector v) const {
  if (spec_.normalize) NormalizeInPlace(v);
  return v;
}

Vector Encoder::Project(const Vector& base_vec) const {
  const auto& p = std::get<ProjectionState>(state_);
  const std::size_t cols = base_vec.size();
  Vector out(dim_, 0.0);
  for (std::size_t r = 0; r < dim_; ++r) {
    const double* row = p.w.data() + r * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * base_vec[c];
    out[r] = acc;
  }
  return out;
}

Vector Encoder::EncodeRaw(std::string_view text) const {
  Vector v(dim_, 0.0);
  if (const auto* tf = std::get_if<TfidfState>(&state_)) {
    for (const auto& token : Tokenize(text)) {
      auto it = tf->lookup.find(token);
      if (it != tf->lookup.end()) v[it->second] += tf->table.idf[it->second];
    }
  } else if (std::holds_alternative<HashedState>(state_)) {
    const auto tokens = Tokenize(text);
    const std::uint64_t basis = MixSeed(0xcbf29ce484222325ULL, spec_.hash_seed);
    for (std::size_t order = 1; order <= spec_.ngram; ++order) {
      for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
        std::string gram = tokens[i];
        for (std::size_t k = 1; k < order; ++k) gram += " " + tokens[i + k];
        const std::uint64_t h = Fnv1a64(gram, basis);
        v[h % dim_] += (h >> 63) ? -1.0 : 1.0;
      }
    }
  } else if (const auto* pre = std::get_if<PrecomputedState>(&state_)) {
    auto it = pre->table.find(std::string(Trim(text)));
    if (it != pre->table.end()) v = it->second;
  } else {
    const auto& p = std::get<ProjectionState>(state_);
    v = Project(p.base->EncodeText(text));
  }
  return v;
}

Vector Encoder::EncodeText(std::string_view text) const {
  return Finish(EncodeRaw(text));
}

Vector Encoder::EncodeItem(const VideoRecord& record) const {
  if (const auto* pre = std::get_if<PrecomputedState>(&state_)) {
    auto it = pre->table.find(record.id);
    if (it == pre->table.end()) {
      throw DataError("precomputed encoder has no vector for id '" + record.id +
                      "'");
    }
    return Finish(it->second);
  }
  if (const auto* p = std::get_if<ProjectionState>(&state_)) {
    return Finish(Project(p->base->EncodeItem(record)));
  }
  return EncodeText(record.summary);
}

bool Encoder::is_projection() const {
  return std::holds_alternative<ProjectionState>(state_);
}

const Encoder& Encoder::base() const {
  return *std::get<ProjectionState>(state_).base;
}

std::size_t Encoder::base_dim() const { return base().dim(); }

std::span<const double> Encoder::weights() const {
  return std::get<ProjectionState>(state_).w;
}

std::span<double> Encoder::mutable_weights() {
  return std::get<ProjectionState>(state_).w;
}

const TfidfTable* Encoder::tfidf() const {
  const auto* tf = std::get_if<TfidfState>(&state_);
  return tf ? &tf->table : nullptr;
}

void Encoder::Refresh() { fingerprint_ = Fnv1a64(ToJson().dump()); }

json Encoder::ToJson() const {
  json state;
  if (const auto* tf = std::get_if<TfidfState>(&state_)) {
    state["vocab"] = tf->table.vocab;
    state["df"] = tf->table.df;
    state["idf"] = tf->table.idf;
    state["num_documents"] = tf->table.num_documents;
  } else if (const auto* pre = std::get_if<PrecomputedState>(&state_)) {
    state["dim"] = dim_;
    json vectors = json::object();
    for (const auto& [id, v] : pre->table) vectors[id] = v;
    state["vectors"] = std::move(vectors);
  } else if (const auto* p = std::get_if<ProjectionState>(&state_)) {
    state["base"] = p->base->ToJson();
    state["rows"] = dim_;
    state["cols"] = p->base->dim();
    state["w"] = p->w;
  }
  json j;
  j["spec"] = spec_.ToJson();
  j["state"] = std::move(state);
  return j;
}

Encoder Encoder::FromJson(const json& j) {
  Encoder enc;
  try {
    enc.spec_ = EncoderSpec::FromJson(j.at("spec"));
    const json& state = j.at("state");
    switch (enc.spec_.kind) {
      case EncoderKind::kTfidf: {
        TfidfTable table;
        table.vocab = state.at("vocab").get<std::vector<std::string>>();
        table.df = state.at("df").get<std::vector<std::size_t>>();
        table.idf = state.at("idf").get<std::vector<double>>();
        table.num_documents = state.at("num_documents").get<std::size_t>();
        if (table.df.size() != table.vocab.size() ||
            table.idf.size() != table.vocab.size()) {
          throw DataError("tfidf state has mismatched table sizes");
        }
        return MakeTfidfEncoder(std::move(table), enc.spec_);
      }
      case EncoderKind::kHashedNgram:
        enc.dim_ = enc.spec_.dim;
        enc.state_ = HashedState{};
        break;
      case EncoderKind::kPrecomputed: {
        PrecomputedState pre;
        enc.dim_ = state.at("dim").get<std::size_t>();
        for (const auto& [id, v] : state.at("vectors").items()) {
          Vector vec = v.get<Vector>();
          if (vec.size() != enc.dim_) throw DataError("precomputed vector size mismatch");
          pre.table.emplace(id, std::move(vec));
        }
        enc.state_ = std::move(pre);
        break;
      }
      case EncoderKind::kLinearProjection: {
        ProjectionState p;
        p.base = std::make_shared<const Encoder>(FromJson(state.at("base")));
        enc.dim_ = state.at("rows").get<std::size_t>();
        const auto cols = state.at("cols").get<std::size_t>();
        p.w = state.at("w").get<std::vector<double>>();
        if (cols != p.base->dim() || p.w.size() != enc.dim_ * cols) {
          throw DataError("projection weights do not match base dimension");
        }
        RequireFinite(p.w, "projection weights");
        enc.state_ = std::move(p);
        break;
      }
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("bad encoder file: ") + e.what());
  }
  enc.Refresh();
  return enc;
}

Encoder MakeTfidfEncoder(TfidfTable table, const EncoderSpec& spec) {
  Encoder enc;
  enc.spec_ = spec;
  Encoder::TfidfState state;
  for (std::size_t i = 0; i < table.vocab.size(); ++i) {
    state.lookup.emplace(table.vocab[i], i);
  }
  enc.dim_ = table.vocab.size();
  state.table = std::move(table);
  enc.state_ = std::move(state);
  enc.Refresh();
  return enc;
}

Encoder FitEncoderWithTable(const Corpus& corpus, const EncoderSpec& spec,
                            PrecomputedTable table, std::size_t dim) {
  for (const VideoRecord& r : corpus.records) {
    if (!table.contains(r.id)) {
      throw DataError("precomputed vectors missing id '" + r.id + "'");
    }
  }
  Encoder enc;
  enc.spec_ = spec;
  enc.dim_ = dim;
  enc.state_ = Encoder::PrecomputedState{std::move(table)};
  enc.Refresh();
  return enc;
}

Encoder FitEncoder(const Corpus& corpus, const EncoderSpec& spec) {
  ValidateSpec(spec);
  switch (spec.kind) {
    case EncoderKind::kTfidf: {
      if (corpus.records.empty()) throw DataError("tfidf needs a non-empty corpus");
      std::vector<std::string> docs;
      docs.reserve(corpus.size());
      for (const VideoRecord& r : corpus.records) docs.push_back(RecordDocument(r));
      return MakeTfidfEncoder(FitTfidf(docs), spec);
    }
    case EncoderKind::kHashedNgram: {
      Encoder enc;
      enc.spec_ = spec;
      enc.dim_ = spec.dim;
      enc.state_ = Encoder::HashedState{};
      enc.Refresh();
      return enc;
    }
    case EncoderKind::kPrecomputed: {
      std::size_t dim = 0;
      auto table = LoadPrecomputedVectors(spec.vectors_path, &dim);
      return FitEncoderWithTable(corpus, spec, std::move(table), dim);
    }
    case EncoderKind::kLinearProjection: {
      Encoder enc;
      enc.spec_ = spec;
      Encoder::ProjectionState p;
      p.base = std::make_shared<const Encoder>(FitEncoder(corpus, *spec.base));
      const std::size_t cols = p.base->dim();
      enc.dim_ = spec.dim == 0 ? cols : spec.dim;
      p.w.assign(enc.dim_ * cols, 0.0);
      for (std::size_t i = 0; i < std::min(enc.dim_, cols); ++i) {
        p.w[i * cols + i] = 1.0;
      }
      enc.state_ = std::move(p);
      enc.Refresh();
      return enc;
    }
  }
  throw DataError("unsupported encoder kind");
}

void SaveEncoder(const Encoder& encoder, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw RuntimeFailure("cannot write encoder file " + path.string());
  out << encoder.ToJson().dump() << '\n';
  if (!out) throw RuntimeFailure("write failed for " + path.string());
}

Encoder LoadEncoder(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read encoder file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw DataError("malformed encoder file " + path.string() + ": " + e.what());
  }
  return Encoder::FromJson(j);
}

}  // namespace dialret
