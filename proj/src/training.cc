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

#include "dialret/training.h"

#include <cmath>
#include <memory>
#include <numeric>

#include "dialret/contrastive.h"
#include "dialret/error.h"
#include "dialret/random.h"
#include "dialret/retrieval.h"

namespace dialret {
namespace {

using SparseVector = std::vector<std::pair<std::size_t, double>>;

SparseVector Sparsify(const Vector& v) {
  SparseVector out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] != 0.0) out.emplace_back(i, v[i]);
  }
  return out;
}

class Projector {
 public:
  Projector(std::span<double> w, std::size_t rows, std::size_t cols,
            bool normalize)
      : w_(w), rows_(rows), cols_(cols), normalize_(normalize) {}

  // Returns the pre-normalization output; `out` receives the final vector.
  Vector Forward(const SparseVector& x, Vector& out) const {
    Vector y(rows_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) {
      const double* row = w_.data() + r * cols_;
      double acc = 0.0;
      for (const auto& [c, v] : x) acc += row[c] * v;
      y[r] = acc;
    }
    out = y;
    if (normalize_) NormalizeInPlace(out);
    return y;
  }

  // Accumulates dLoss/dW given dLoss/d(out).
  void Backward(const SparseVector& x, const Vector& y, const Vector& out,
                const Vector& d_out, std::vector<double>& dw) const {
    Vector dy = d_out;
    if (normalize_) {
      double norm = 0.0;
      for (double v : y) norm += v * v;
      norm = std::sqrt(norm);
      if (norm == 0.0) return;
      double proj = 0.0;
      for (std::size_t r = 0; r < rows_; ++r) proj += out[r] * d_out[r];
      for (std::size_t r = 0; r < rows_; ++r) {
        dy[r] = (d_out[r] - out[r] * proj) / norm;
      }
    }
    for (std::size_t r = 0; r < rows_; ++r) {
      if (dy[r] == 0.0) continue;
      double* row = dw.data() + r * cols_;
      for (const auto& [c, v] : x) row[c] += dy[r] * v;
    }
  }

 private:
  std::span<double> w_;
  std::size_t rows_;
  std::size_t cols_;
  bool normalize_;
};

struct Example {
  SparseVector item;
  SparseVector text;
};

double BatchStep(const Projector& proj, const std::vector<Example>& examples,
                 std::span<const std::size_t> members,
                 std::vector<double>* dw) {
  Batch batch;
  std::vector<Vector> y_f, y_g;
  for (std::size_t m : members) {
    Vector f, g;
    y_f.push_back(proj.Forward(examples[m].item, f));
    y_g.push_back(proj.Forward(examples[m].text, g));
    batch.f.push_back(std::move(f));
    batch.g.push_back(std::move(g));
  }
  if (!dw) return LossSym(batch);
  LossGradients grads = ComputeLossGradients(batch);
  for (std::size_t i = 0; i < members.size(); ++i) {
    proj.Backward(examples[members[i]].item, y_f[i], batch.f[i], grads.df[i], *dw);
    proj.Backward(examples[members[i]].text, y_g[i], batch.g[i], grads.dg[i], *dw);
  }
  return grads.loss;
}

// Mean loss over consecutive corpus-order batches.
double EvaluateLoss(const Projector& proj, const std::vector<Example>& examples,
                    std::size_t batch_size) {
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t batches = examples.size() / batch_size;
  double total = 0.0;
  for (std::size_t b = 0; b < batches; ++b) {
    total += BatchStep(proj, examples,
                       std::span(order).subspan(b * batch_size, batch_size),
                       nullptr);
  }
  return total / static_cast<double>(batches);
}

}  // namespace

TrainResult TrainLinearProjection(const Corpus& corpus,
                                  const EncoderSpec& base_spec,
                                  const TrainConfig& config) {
  if (config.batch_size < 1) throw DataError("batch_size must be >= 1");
  if (corpus.size() < config.batch_size) {
    throw DataError("corpus has " + std::to_string(corpus.size()) +
                    " records, fewer than batch_size " +
                    std::to_string(config.batch_size));
  }
  EncoderSpec spec;
  spec.kind = EncoderKind::kLinearProjection;
  spec.dim = config.dim;
  spec.normalize = config.normalize;
  spec.tau = config.tau;
  spec.base = std::make_shared<const EncoderSpec>(base_spec);
  Encoder encoder = FitEncoder(corpus, spec);

  const Encoder& base = encoder.base();
  std::vector<Example> examples;
  examples.reserve(corpus.size());
  for (const VideoRecord& r : corpus.records) {
    examples.push_back({Sparsify(base.EncodeItem(r)),
                        Sparsify(base.EncodeText(BuildQueryContext(
                            r.initial_query, DialogHistory{})))});
  }

  const std::size_t rows = encoder.dim();
  const std::size_t cols = encoder.base_dim();
  std::span<double> w = encoder.mutable_weights();
  Projector proj(w, rows, cols, config.normalize);

  TrainResult result{encoder, 0.0, 0.0, {}};
  result.initial_loss = EvaluateLoss(proj, examples, config.batch_size);

  Rng rng(config.seed);
  std::vector<std::size_t> order(examples.size());
  std::vector<double> dw(w.size());
  const std::size_t batches = examples.size() / config.batch_size;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.Shuffle(std::span<std::size_t>(order));
    double total = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
      std::fill(dw.begin(), dw.end(), 0.0);
      const double loss = BatchStep(
          proj, examples,
          std::span<const std::size_t>(order).subspan(b * config.batch_size,
                                                      config.batch_size),
          &dw);
      if (!std::isfinite(loss)) {
        throw RuntimeFailure("non-finite loss at epoch " +
                             std::to_string(epoch + 1) + ", batch " +
                             std::to_string(b + 1) +
                             "; try a smaller learning rate");
      }
      total += loss;
      if (config.learning_rate != 0.0) {
        for (std::size_t i = 0; i < w.size(); ++i) {
          w[i] -= config.learning_rate * dw[i];
        }
      }
    }
    result.epoch_losses.push_back(total / static_cast<double>(batches));
  }
  result.final_loss = EvaluateLoss(proj, examples, config.batch_size);
  encoder.Refresh();
  result.encoder = std::move(encoder);
  return result;
}

}  // namespace dialret
