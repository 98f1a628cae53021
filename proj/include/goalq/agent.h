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

#ifndef GOALQ_AGENT_H_
#define GOALQ_AGENT_H_

#include <torch/torch.h>

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "goalq/language.h"
#include "goalq/metrics.h"
#include "goalq/model_config.h"
#include "goalq/oracle.h"
#include "goalq/scene.h"
#include "json.hpp"

namespace goalq {

enum class PolicyMode { kSample, kGreedy, kRandom };

// One supervised example: the dialogue prefix D^s, the candidate labels
// after it, and the next ground-truth question with its grouping.
struct SlSample {
  const Scene* scene = nullptr;
  int goal_id = 0;
  std::vector<Tokens> questions;  // words, no [EOS]
  std::vector<Answer> answers;
  IdSet candidates;
  // Next question words followed by [EOS]; empty when the dialogue ends.
  std::optional<Tokens> target;
  // Slot indexed, length N_max.
  std::vector<int> group_vector;
  Grouping grouping;
  // The recurrent questioner learns to emit [EOD] here.
  bool end_of_dialogue = false;
};

struct SupervisedLosses {
  torch::Tensor pred;  // L_pred, summed over objects, mean over samples
  torch::Tensor gen;   // L_gen, summed over tokens, mean over questions
};

struct SlOutput {
  std::vector<double> sigma;  // real objects only
  std::optional<Tokens> question;
};

// What the questioner does at one step of an episode.
struct Decision {
  bool submit = false;
  int prediction = 0;
  Tokens question;  // words, no [EOS]
  std::vector<int> group_vector;
  std::vector<double> prob;
  // Detached policy input and chosen actions, replayed by LogProbs.
  torch::Tensor context;
  std::vector<int64_t> actions;
};

struct Episode {
  const Scene* scene = nullptr;
  int goal_id = 0;
  Rng rng;
  std::vector<Tokens> questions;
  std::vector<std::optional<QuestionAst>> asts;
  std::vector<Answer> answers;
  std::vector<Decision> decisions;
  std::vector<TranscriptTurn> turns;
  int step = 0;
  bool done = false;
  bool submitted = false;
  std::optional<int> prediction;
  double reward = 0.0;
};

// Common surface of every questioner variant.
class Agent {
 public:
  virtual ~Agent() = default;

  virtual const ModelConfig& config() const = 0;
  virtual torch::nn::Module& net() = 0;

  virtual SupervisedLosses Losses(std::span<const SlSample> batch) = 0;
  // sigma and, where a target exists, a greedy question.
  virtual std::vector<SlOutput> Infer(std::span<const SlSample> batch) = 0;

  virtual std::vector<Decision> Decide(std::span<Episode* const> live,
                                       PolicyMode mode) = 0;
  // Sum of log-probabilities of each decision's actions, with gradient.
  virtual torch::Tensor LogProbs(std::span<const Decision* const> decisions) = 0;

  // Trained by reinforcement; everything else stays frozen.
  virtual std::vector<torch::Tensor> PolicyParameters() = 0;
  virtual std::vector<torch::Tensor> FrozenParameters() = 0;

  // Memoize frozen encoder/decoder outputs during rollouts.
  virtual void SetInferenceCache(bool enabled) { (void)enabled; }
};

// Throws std::invalid_argument on a bad config.
std::unique_ptr<Agent> BuildAgent(const ModelConfig& config,
                                  const Vocabulary& vocab);

struct CheckpointInfo {
  ModelConfig config;
  uint64_t vocab_hash = 0;
  std::string stage;  // "supervised" or "reinforce"
  uint64_t seed = 0;
  int epoch = 0;
  nlohmann::json metrics = nlohmann::json::object();

  nlohmann::json ToJson() const;
  static CheckpointInfo FromJson(const nlohmann::json& j);
};

// Writes <stem>.pt and <stem>.json.
void SaveCheckpoint(const std::filesystem::path& stem, Agent& agent,
                    const CheckpointInfo& info);
// Throws std::runtime_error naming the missing file.
CheckpointInfo ReadCheckpointInfo(const std::filesystem::path& stem);
// Rebuilds the agent from the manifest; the vocabulary hash must match.
std::unique_ptr<Agent> LoadAgent(const std::filesystem::path& stem,
                                 const Vocabulary& vocab,
                                 CheckpointInfo* info = nullptr);

}  // namespace goalq

#endif  // GOALQ_AGENT_H_
