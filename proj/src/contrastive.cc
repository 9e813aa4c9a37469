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

#include "dialret/contrastive.h"

#include <algorithm>
#include <cmath>

#include "dialret/error.h"

namespace dialret {
namespace {

double Dot(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// sim[i][j] = f_i . g_j
std::vector<std::vector<double>> Similarities(const Batch& batch) {
  const std::size_t b = batch.size();
  std::vector<std::vector<double>> sim(b, std::vector<double>(b));
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < b; ++j) sim[i][j] = Dot(batch.f[i], batch.g[j]);
  }
  return sim;
}

double LogSumExp(const std::vector<double>& z) {
  const double max = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double x : z) s += std::exp(x - max);
  return max + std::log(s);
}

// Row-wise softmax of sim (transposed when by_column).
std::vector<std::vector<double>> RowSoftmax(
    const std::vector<std::vector<double>>& sim, bool by_column) {
  const std::size_t b = sim.size();
  std::vector<std::vector<double>> p(b, std::vector<double>(b));
  std::vector<double> z(b);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < b; ++j) z[j] = by_column ? sim[j][i] : sim[i][j];
    const double lse = LogSumExp(z);
    for (std::size_t j = 0; j < b; ++j) p[i][j] = std::exp(z[j] - lse);
  }
  return p;
}

double DirectionalLoss(const std::vector<std::vector<double>>& sim,
                       bool by_column) {
  const std::size_t b = sim.size();
  std::vector<double> z(b);
  double total = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < b; ++j) z[j] = by_column ? sim[j][i] : sim[i][j];
    total += LogSumExp(z) - z[i];
  }
  return total / static_cast<double>(b);
}

}  // namespace

void ValidateBatch(const Batch& batch) {
  if (batch.f.empty()) throw DataError("batch must contain at least one pair");
  if (batch.f.size() != batch.g.size()) {
    throw DataError("batch has unequal item and text counts");
  }
  const std::size_t d = batch.f.front().size();
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (batch.f[i].size() != d || batch.g[i].size() != d) {
      throw DataError("dimension mismatch in batch pair " + std::to_string(i));
    }
  }
}

double LossV2T(const Batch& batch) {
  ValidateBatch(batch);
  return DirectionalLoss(Similarities(batch), false);
}

double LossT2V(const Batch& batch) {
  ValidateBatch(batch);
  return DirectionalLoss(Similarities(batch), true);
}

double LossSym(const Batch& batch) {
  ValidateBatch(batch);
  const auto sim = Similarities(batch);
  return DirectionalLoss(sim, false) + DirectionalLoss(sim, true);
}

LossGradients ComputeLossGradients(const Batch& batch) {
  ValidateBatch(batch);
  const std::size_t b = batch.size();
  const std::size_t d = batch.f.front().size();
  const auto sim = Similarities(batch);
  // v2t row i: softmax over j of sim[i][j]; t2v row i: softmax over j of sim[j][i].
  const auto p_v2t = RowSoftmax(sim, false);
  const auto p_t2v = RowSoftmax(sim, true);
  const double inv_b = 1.0 / static_cast<double>(b);

  // coeff[i][j] = dLoss / dsim[i][j]
  std::vector<std::vector<double>> coeff(b, std::vector<double>(b));
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      const double delta = (i == j) ? 1.0 : 0.0;
      coeff[i][j] = inv_b * ((p_v2t[i][j] - delta) + (p_t2v[j][i] - delta));
    }
  }

  LossGradients out;
  out.loss = DirectionalLoss(sim, false) + DirectionalLoss(sim, true);
  out.df.assign(b, Vector(d, 0.0));
  out.dg.assign(b, Vector(d, 0.0));
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      const double c = coeff[i][j];
      if (c == 0.0) continue;
      for (std::size_t k = 0; k < d; ++k) {
        out.df[i][k] += c * batch.g[j][k];
        out.dg[j][k] += c * batch.f[i][k];
      }
    }
  }
  return out;
}

}  // namespace dialret
