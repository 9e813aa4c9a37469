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

#ifndef DIALRET_TRAINING_H_
#define DIALRET_TRAINING_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dialret/corpus.h"
#include "dialret/encoder.h"

namespace dialret {

struct TrainConfig {
  std::size_t epochs = 20;
  std::size_t batch_size = 16;
  double learning_rate = 2.0;
  std::uint64_t seed = 42;
  // Projection output dimension; 0 keeps the base dimension.
  std::size_t dim = 0;
  // Projection spec fields other than the base.
  bool normalize = true;
  double tau = 1.0;
};

struct TrainResult {
  Encoder encoder;
  // LossSym over corpus-order batches before and after training.
  double initial_loss = 0.0;
  double final_loss = 0.0;
  // Mean batch loss seen during each epoch (pre-update values).
  std::vector<double> epoch_losses;
};

// Plain SGD on LossSym with one projection W shared by both towers:
// f = W * base(item), g = W * base(initial_query), each L2-normalized when
// config.normalize. Batches come from a seeded shuffle per epoch; a tail
// smaller than batch_size is dropped. Throws DataError when the corpus has
// fewer than batch_size records, RuntimeFailure on a non-finite loss.
TrainResult TrainLinearProjection(const Corpus& corpus,
                                  const EncoderSpec& base_spec,
                                  const TrainConfig& config);

}  // namespace dialret

#endif  // DIALRET_TRAINING_H_
