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

#include "goalq/losses.h"

#include <stdexcept>
#include <string>

namespace goalq {

torch::Tensor ObjectPredictionLoss(const torch::Tensor& sigma,
                                   const torch::Tensor& labels,
                                   const torch::Tensor& real) {
  auto bce = torch::binary_cross_entropy(sigma, labels.to(sigma.scalar_type()),
                                         {}, torch::Reduction::None);
  return (bce * real.to(sigma.scalar_type())).sum();
}

torch::Tensor ObjectPredictionLossFromScores(const torch::Tensor& scores,
                                             const torch::Tensor& labels,
                                             const torch::Tensor& real) {
  auto bce = torch::binary_cross_entropy_with_logits(
      scores, labels.to(scores.scalar_type()), {}, {}, torch::Reduction::None);
  return (bce * real.to(scores.scalar_type())).sum();
}

torch::Tensor QuestionGenerationLoss(const torch::Tensor& logits,
                                     const torch::Tensor& targets) {
  const int64_t v = logits.size(-1);
  auto valid = targets != kIgnoreToken;
  auto bad = valid & ((targets < 0) | (targets >= v));
  if (bad.any().item<bool>()) {
    throw std::out_of_range("target token outside the vocabulary of size " +
                            std::to_string(v));
  }
  return torch::nn::functional::cross_entropy(
      logits.reshape({-1, v}), targets.reshape({-1}),
      torch::nn::functional::CrossEntropyFuncOptions()
          .ignore_index(kIgnoreToken)
          .reduction(torch::kSum));
}

torch::Tensor TotalSupervisedLoss(const torch::Tensor& pred,
                                  const torch::Tensor& gen, double alpha) {
  if (alpha < 0.0) throw std::invalid_argument("alpha must be non-negative");
  return alpha * pred + gen;
}

}  // namespace goalq
