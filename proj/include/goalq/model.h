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

#ifndef GOALQ_MODEL_H_
#define GOALQ_MODEL_H_

#include <torch/torch.h>

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "goalq/agent.h"
#include "goalq/features.h"
#include "goalq/language.h"
#include "goalq/model_config.h"
#include "goalq/scene.h"

namespace goalq {

// Raw, unlearned per-object inputs.
class FeatureTable {
 public:
  explicit FeatureTable(const ModelConfig& config);

  // [o_v, o_g^N] per slot, zero rows on empty slots: [n_max, object_width].
  torch::Tensor Objects(const Scene& scene) const;
  // [o_v(i), o_g^K(i), P(i)] for i in top_k, zero rows past |top_k|:
  // [k, otm_row_width].
  torch::Tensor OtmRows(const Scene& scene, std::span<const int> top_k,
                        std::span<const double> prob) const;
  // Mean of o_v over real objects.
  torch::Tensor MeanVisual(const Scene& scene) const;

  int object_width() const { return d_v_ + GeometricWidth(n_max_); }
  int otm_row_width() const { return d_v_ + GeometricWidth(k_) + 1; }
  int d_v() const { return d_v_; }

 private:
  VisualFeaturizer featurizer_;
  int n_max_;
  int k_;
  int d_v_;
};

// Dialogue as encoder token ids: per turn the question words, then the
// answer token.
std::vector<int64_t> DialogueIds(std::span<const Tokens> questions,
                                 std::span<const Answer> answers,
                                 const Vocabulary& vocab);

struct EncoderBatch {
  torch::Tensor objects;     // [B, n_max, object_width]
  torch::Tensor object_pad;  // [B, n_max], true on empty slots
  torch::Tensor tokens;      // [B, L]
  torch::Tensor token_pad;   // [B, L]
};

// Throws std::invalid_argument on too many objects or dialogue tokens.
EncoderBatch MakeEncoderBatch(std::span<const Scene* const> scenes,
                              std::span<const std::vector<int64_t>> dialogues,
                              const FeatureTable& features,
                              const ModelConfig& config, int pad_id);

struct EncoderOutput {
  torch::Tensor objects;  // X_o [B, n_max, d]
  torch::Tensor cls;      // [B, d]
  torch::Tensor scores;   // pre-sigmoid [B, n_max]
  torch::Tensor sigma;    // [B, n_max], 0 on empty slots
  torch::Tensor prob;     // [B, n_max], 0 on empty slots
};

// sigmoid, then a softmax restricted to real slots.
torch::Tensor MaskedSigma(const torch::Tensor& scores,
                          const torch::Tensor& pad);
torch::Tensor GoalProbabilities(const torch::Tensor& sigma,
                                const torch::Tensor& pad);

class EncoderBase : public torch::nn::Module {
 public:
  virtual EncoderOutput Encode(const EncoderBatch& batch) = 0;
};

// Transformer over [objects; CLS; dialogue].
class ObjectEncoderTransformer : public EncoderBase {
 public:
  ObjectEncoderTransformer(const ModelConfig& config, int vocab_size,
                           int object_width, int cls_id);
  EncoderOutput Encode(const EncoderBatch& batch) override;

  // x_e for the batch, [S, B, d], with the matching key padding mask.
  std::pair<torch::Tensor, torch::Tensor> Embed(const EncoderBatch& batch);

 private:
  int n_max_;
  int cls_id_;
  torch::nn::Linear object_in_{nullptr};
  torch::nn::Embedding token_{nullptr};
  torch::nn::Embedding segment_{nullptr};
  torch::nn::Embedding position_{nullptr};
  torch::nn::TransformerEncoder encoder_{nullptr};
  torch::nn::LayerNorm embed_norm_{nullptr};
  torch::nn::Linear f_o_{nullptr};
  torch::nn::Linear f_c_{nullptr};
};

// Bidirectional GRU over the object slots plus an LSTM dialogue summary.
class RecurrentObjectEncoder : public EncoderBase {
 public:
  RecurrentObjectEncoder(const ModelConfig& config, int vocab_size,
                         int object_width, int cls_id);
  EncoderOutput Encode(const EncoderBatch& batch) override;

 private:
  int cls_id_;
  torch::nn::Linear object_in_{nullptr};
  torch::nn::GRU gru_{nullptr};
  torch::nn::Linear object_out_{nullptr};
  torch::nn::Embedding token_{nullptr};
  torch::nn::LSTM dialogue_{nullptr};
  torch::nn::Linear dialogue_out_{nullptr};
};

// Per-object MLP over [x_v(i), LSTM dialogue summary].
class MlpGuesser : public EncoderBase {
 public:
  MlpGuesser(const ModelConfig& config, int vocab_size, int object_width,
             int cls_id);
  EncoderOutput Encode(const EncoderBatch& batch) override;

 private:
  int cls_id_;
  torch::nn::Linear object_in_{nullptr};
  torch::nn::Embedding token_{nullptr};
  torch::nn::LSTM dialogue_{nullptr};
  torch::nn::Sequential score_{nullptr};
};

// Final LSTM state over [CLS] + tokens, honouring padding.
torch::Tensor SummarizeDialogue(torch::nn::Embedding& embed,
                                torch::nn::LSTM& lstm,
                                const EncoderBatch& batch, int cls_id);

class DecoderBase : public torch::nn::Module {
 public:
  // M_i = X_o^i + F_s(g^i).
  virtual torch::Tensor Memory(const torch::Tensor& objects,
                               const torch::Tensor& groups) = 0;
  // Teacher-forced logits [B, L, V] for inputs [B, L].
  virtual torch::Tensor Logits(const torch::Tensor& memory,
                               const torch::Tensor& memory_pad,
                               const torch::Tensor& inputs) = 0;
  virtual torch::Tensor GroupTable() = 0;

  // Greedy decoding from [BOS]; each row ends at [EOS] (kept) or after
  // max_len tokens.
  std::vector<std::vector<int64_t>> Generate(const torch::Tensor& memory,
                                             const torch::Tensor& memory_pad,
                                             int bos, int eos, int max_len);
};

class QuestionDecoderTransformer : public DecoderBase {
 public:
  QuestionDecoderTransformer(const ModelConfig& config, int vocab_size);
  torch::Tensor Memory(const torch::Tensor& objects,
                       const torch::Tensor& groups) override;
  torch::Tensor Logits(const torch::Tensor& memory,
                       const torch::Tensor& memory_pad,
                       const torch::Tensor& inputs) override;
  torch::Tensor GroupTable() override { return group_->weight; }

 private:
  torch::nn::Embedding group_{nullptr};
  torch::nn::Embedding token_{nullptr};
  torch::nn::Embedding position_{nullptr};
  torch::nn::TransformerDecoder decoder_{nullptr};
  torch::nn::Linear out_{nullptr};
};

// LSTM decoder with dot-product attention over the memory.
class AttentionLstmDecoder : public DecoderBase {
 public:
  AttentionLstmDecoder(const ModelConfig& config, int vocab_size);
  torch::Tensor Memory(const torch::Tensor& objects,
                       const torch::Tensor& groups) override;
  torch::Tensor Logits(const torch::Tensor& memory,
                       const torch::Tensor& memory_pad,
                       const torch::Tensor& inputs) override;
  torch::Tensor GroupTable() override { return group_->weight; }

 private:
  torch::nn::Embedding group_{nullptr};
  torch::nn::Embedding token_{nullptr};
  torch::nn::LSTMCell cell_{nullptr};
  torch::nn::Linear out_{nullptr};
};

// Policy over the 3^k targeting actions.
class TargetingModuleImpl : public torch::nn::Module {
 public:
  explicit TargetingModuleImpl(const ModelConfig& config);
  // rows [B, k, otm_row_width] -> logits [B, 3^k].
  torch::Tensor forward(const torch::Tensor& rows);

 private:
  int d_v_;
  int geo_width_;
  torch::nn::Linear f_a_{nullptr};
  torch::nn::Linear f_b_{nullptr};
  torch::nn::Linear f_c_{nullptr};
  torch::nn::GRU gru_{nullptr};
  torch::nn::Sequential f_l_{nullptr};
};
TORCH_MODULE(TargetingModule);

// Greedy/sampled/uniform draw of one action from logits [A].
int64_t DrawAction(const torch::Tensor& logits, PolicyMode mode, Rng& rng);

// Transformer-based questioner and its ablations.
class UniqerAgent : public Agent {
 public:
  UniqerAgent(const ModelConfig& config, const Vocabulary& vocab);

  const ModelConfig& config() const override { return config_; }
  torch::nn::Module& net() override { return *net_; }

  SupervisedLosses Losses(std::span<const SlSample> batch) override;
  std::vector<SlOutput> Infer(std::span<const SlSample> batch) override;
  std::vector<Decision> Decide(std::span<Episode* const> live,
                               PolicyMode mode) override;
  torch::Tensor LogProbs(std::span<const Decision* const> decisions) override;
  std::vector<torch::Tensor> PolicyParameters() override;
  std::vector<torch::Tensor> FrozenParameters() override;
  void SetInferenceCache(bool enabled) override;

  EncoderBase& guesser() { return *guesser_; }
  EncoderBase& qgen_encoder() { return *qgen_encoder_; }
  DecoderBase& decoder() { return *decoder_; }
  TargetingModule& otm() { return otm_; }
  const FeatureTable& features() const { return features_; }
  EncoderBatch Batch(std::span<const Scene* const> scenes,
                     std::span<const std::vector<int64_t>> dialogues) const;

 private:
  struct Encoded {
    EncoderOutput guess;
    EncoderOutput qgen;
    torch::Tensor object_pad;
  };
  Encoded Encode(const EncoderBatch& batch);

  struct CachedState {
    std::vector<double> prob;
    torch::Tensor memory_objects;  // [n_max, d]
    torch::Tensor object_pad;      // [n_max]
  };

  ModelConfig config_;
  Vocabulary vocab_;
  FeatureTable features_;
  std::shared_ptr<torch::nn::Module> net_;
  std::shared_ptr<EncoderBase> guesser_;
  std::shared_ptr<EncoderBase> qgen_encoder_;
  std::shared_ptr<DecoderBase> decoder_;
  TargetingModule otm_{nullptr};
  bool cache_enabled_ = false;
  std::unordered_map<std::string, CachedState> state_cache_;
  std::unordered_map<std::string, std::vector<int64_t>> question_cache_;
};

// Index of the largest entry, ties to the lower index.
int ArgMax(std::span<const double> values);

// Hash of the raw bytes of the given tensors, in order.
uint64_t ParameterHash(std::span<const torch::Tensor> params);

}  // namespace goalq

#endif  // GOALQ_MODEL_H_
