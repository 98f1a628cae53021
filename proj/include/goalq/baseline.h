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

#ifndef GOALQ_BASELINE_H_
#define GOALQ_BASELINE_H_

#include <torch/torch.h>

#include <span>
#include <vector>

#include "goalq/agent.h"
#include "goalq/model.h"

namespace goalq {

// Recurrent dialogue state X_D and the number of (q, a) pairs folded in.
struct DialogueState {
  torch::Tensor h;  // [B, hidden]
  torch::Tensor c;
  int steps = 0;
};

// Four-part recurrent questioner: question-answer encoder, dialogue state
// encoder, guesser and a token-level question generator.
class BaselineAgent : public Agent {
 public:
  BaselineAgent(const ModelConfig& config, const Vocabulary& vocab);

  const ModelConfig& config() const override { return config_; }
  torch::nn::Module& net() override { return *net_; }

  SupervisedLosses Losses(std::span<const SlSample> batch) override;
  std::vector<SlOutput> Infer(std::span<const SlSample> batch) override;
  std::vector<Decision> Decide(std::span<Episode* const> live,
                               PolicyMode mode) override;
  torch::Tensor LogProbs(std::span<const Decision* const> decisions) override;
  std::vector<torch::Tensor> PolicyParameters() override;
  std::vector<torch::Tensor> FrozenParameters() override;

  // Final hidden state over question ids followed by the answer token.
  torch::Tensor EncodeQa(std::span<const int64_t> question, int answer_id);
  DialogueState FreshState(int64_t batch);
  DialogueState Update(const DialogueState& state, const torch::Tensor& qa);
  // X_D for whole dialogues, batched.
  torch::Tensor DialogueVectors(std::span<const SlSample> dialogues);
  // softmax over sigmoid(F_1(x_v^i) . F_2(X_D)), real slots only.
  torch::Tensor GuesserProbabilities(const EncoderBatch& batch,
                                     const torch::Tensor& x_d,
                                     torch::Tensor* sigma = nullptr,
                                     torch::Tensor* scores = nullptr);
  // Next-token distribution given a QGen context and the tokens so far.
  torch::Tensor QgenLogits(const torch::Tensor& context,
                           const torch::Tensor& inputs);
  int context_width() const;

 private:
  torch::Tensor DialogueVectors(std::span<const std::vector<Tokens>* const> q,
                                std::span<const std::vector<Answer>* const> a);
  // [X_D (detached), x'_v, flattened top-k rows] per sample.
  torch::Tensor Contexts(std::span<const Scene* const> scenes,
                         const torch::Tensor& x_d, const torch::Tensor& prob);
  std::vector<std::vector<int64_t>> Generate(const torch::Tensor& context,
                                             PolicyMode mode,
                                             std::span<Rng*> rngs);

  ModelConfig config_;
  Vocabulary vocab_;
  FeatureTable features_;
  int hidden_;
  std::shared_ptr<torch::nn::Module> net_;
  torch::nn::Linear object_in_{nullptr};
  torch::nn::Embedding qae_embed_{nullptr};
  torch::nn::LSTM qae_{nullptr};
  torch::nn::LSTMCell dse_{nullptr};
  torch::nn::Linear f1_{nullptr};
  torch::nn::Linear f2_{nullptr};
  torch::nn::Embedding qgen_embed_{nullptr};
  torch::nn::LSTM qgen_{nullptr};
  torch::nn::Linear qgen_init_{nullptr};
  torch::nn::Linear qgen_out_{nullptr};
};

}  // namespace goalq

#endif  // GOALQ_BASELINE_H_
