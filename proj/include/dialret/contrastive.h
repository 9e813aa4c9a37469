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

#ifndef DIALRET_CONTRASTIVE_H_
#define DIALRET_CONTRASTIVE_H_

#include <cstddef>
#include <vector>

#include "dialret/encoder.h"

namespace dialret {

// B matched (item, text) embedding pairs. Pair j is the positive for row j;
// every other pairing in the batch is a negative.
struct Batch {
  std::vector<Vector> f;  // item side
  std::vector<Vector> g;  // text side

  std::size_t size() const { return f.size(); }
};

// Throws DataError unless B >= 1, |f| == |g| and all vectors share one dim.
void ValidateBatch(const Batch& batch);

// -(1/B) sum_i log softmax_j(f_i . g_j)[i]
double LossV2T(const Batch& batch);
// -(1/B) sum_i log softmax_j(g_i . f_j)[i]
double LossT2V(const Batch& batch);
double LossSym(const Batch& batch);

struct LossGradients {
  double loss = 0.0;  // LossSym at the evaluated batch
  std::vector<Vector> df;
  std::vector<Vector> dg;
};

// Analytic gradients of LossSym with respect to every f_i and g_i.
LossGradients ComputeLossGradients(const Batch& batch);

}  // namespace dialret

#endif  // DIALRET_CONTRASTIVE_H_
