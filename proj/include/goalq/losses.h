// Copyright 2026 The goalq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GOALQ_LOSSES_H_
#define GOALQ_LOSSES_H_

#include <torch/torch.h>

namespace goalq {

// Binary cross-entropy between sigma and the candidate labels, summed over
// every unmasked entry (objects and turns). Logs are clamped at -100.
torch::Tensor ObjectPredictionLoss(const torch::Tensor& sigma,
                                   const torch::Tensor& labels,
                                   const torch::Tensor& real);
// The same loss from pre-sigmoid scores, computed stably.
torch::Tensor ObjectPredictionLossFromScores(const torch::Tensor& scores,
                                             const torch::Tensor& labels,
                                             const torch::Tensor& real);

inline constexpr int64_t kIgnoreToken = -100;

// Negative log-likelihood of the target tokens under logits [Q, L, V],
// summed over tokens. Entries equal to kIgnoreToken are skipped; any other
// id outside [0, V) throws std::out_of_range.
torch::Tensor QuestionGenerationLoss(const torch::Tensor& logits,
                                     const torch::Tensor& targets);

// alpha * pred + gen; throws std::invalid_argument for negative alpha.
torch::Tensor TotalSupervisedLoss(const torch::Tensor& pred,
                                  const torch::Tensor& gen, double alpha);

}  // namespace goalq

#endif  // GOALQ_LOSSES_H_
