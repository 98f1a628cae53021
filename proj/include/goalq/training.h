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

#ifndef GOALQ_TRAINING_H_
#define GOALQ_TRAINING_H_

#include <torch/torch.h>

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "goalq/agent.h"
#include "goalq/dataset.h"
#include "goalq/metrics.h"
#include "goalq/oracle.h"
#include "goalq/reward.h"

namespace goalq {

// ---------------------------------------------------------------------------
// Supervised data.

// A ground-truth dialogue for one game: at most `max_questions` questions,
// stopping once the goal is the only candidate. The first question is one
// of the scene's stored questions.
struct GtDialogue {
  std::vector<QuestionAst> questions;
  std::vector<Grouping> groupings;  // before top-k masking
  std::vector<Answer> answers;
  // candidates[s] is the candidate set after s pairs; size questions + 1.
  std::vector<IdSet> candidates;
};
GtDialogue SampleGtDialogue(const QuestionBank& bank, const Scene& scene,
                            int goal_id, int max_questions, Rng& rng);

// Masks further candidates at random until at most k objects stay
// unmasked, keeping at least one target and one distracter. Nullopt when
// that cannot be done.
std::optional<Grouping> MaskToTopK(const Grouping& grouping, int k, Rng& rng);
// Slot-indexed ids; empty slots are masked.
std::vector<int> GroupVectorFor(const Grouping& grouping, int n_max);

// Sample for prefix t - 1 of a fresh ground-truth dialogue: D^{t-1}, the
// labels after it, and the t-th question. Nullopt when the dialogue ended
// before t.
std::optional<SlSample> MakeSupervisedSample(const QuestionBank& bank,
                                             const Scene& scene, int goal_id,
                                             int t, const ModelConfig& config,
                                             Rng& rng);
// Every prefix of one ground-truth dialogue.
std::vector<SlSample> SamplesForGame(const QuestionBank& bank,
                                     const Scene& scene, int goal_id,
                                     const ModelConfig& config, Rng& rng);

// Goals used for training on a scene: all but the held-out one.
std::vector<int> TrainingGoals(const Scene& scene);

// ---------------------------------------------------------------------------
// Supervised training.

struct SupervisedConfig {
  int epochs = 30;
  int batch_size = 64;
  double lr = 1e-3;
  int warmup_epochs = 2;
  double alpha = 1.0;
  double grad_clip = 1.0;
  // Training goals drawn per scene and epoch.
  int games_per_scene = 3;
  int val_games_per_scene = 2;
  uint64_t seed = 1;
  // Stop after this many epochs without improvement; 0 disables.
  int patience = 0;
  // Wall-clock budget; no epoch starts that would end past it. 0 disables.
  double max_minutes = 0.0;

  void Validate() const;
  nlohmann::json ToJson() const;
  static SupervisedConfig FromJson(const nlohmann::json& j);
};

struct SupervisedMetrics {
  double f1 = 0.0;
  AddressRatios address;
  nlohmann::json ToJson() const;
};

// F1 of {sigma > 0.5} against the candidates, macro-averaged over samples
// with at least one pair; address verdicts of greedy questions against the
// sample groupings.
SupervisedMetrics EvaluateSupervised(Agent& agent,
                                     std::span<const SlSample> samples,
                                     const AttributeSpace& space,
                                     const GrammarOptions& grammar,
                                     int batch_size = 64);

std::vector<SlSample> ValidationSamples(std::span<const Scene> scenes,
                                        const QuestionBank& bank,
                                        const ModelConfig& config,
                                        uint64_t seed, int games_per_scene);

struct TrainPaths {
  std::filesystem::path best;     // checkpoint stem, empty to skip
  std::filesystem::path last;     // checkpoint stem for resuming
  std::filesystem::path metrics;  // JSONL, one record per epoch
  bool resume = false;
};

struct SupervisedResult {
  int best_epoch = 0;
  SupervisedMetrics best;
  std::vector<nlohmann::json> history;
};

// Joint training of the guesser and question generator. Keeps the weights
// of the best validation epoch in `agent` on return. Throws
// std::runtime_error on a non-finite loss.
SupervisedResult RunSupervised(Agent& agent, const Dataset& dataset,
                               const SupervisedConfig& config,
                               const TrainPaths& paths = {});

// ---------------------------------------------------------------------------
// Episodes.

std::vector<Episode> MakeEpisodes(std::span<const GameInstance> games,
                                  uint64_t seed, std::string_view tag);

struct RolloutOptions {
  PolicyMode mode = PolicyMode::kGreedy;
  // Submit the current prediction at step T instead of asking.
  bool force_stop = false;
  RewardConfig reward;
  const AttributeSpace* space = nullptr;
  GrammarOptions grammar;
  int batch_size = 64;
};

// Lock-step episodes: at step t each live episode either submits or asks
// one question, which the oracle answers.
void Rollout(Agent& agent, std::span<Episode> episodes,
             const RolloutOptions& options);

Transcript ToTranscript(const Episode& episode);

// ---------------------------------------------------------------------------
// Reinforcement.

// Per-step rewards: zero except the terminal step.
std::vector<double> StepRewards(const Episode& episode);

// -sum over steps of (G(t) - b) log pi(A_t | S_t), averaged over episodes.
torch::Tensor ReinforceLoss(Agent& agent, std::span<const Episode> episodes,
                            double gamma, double baseline);

// b(S_t): exponential running mean of returns.
class ReturnBaseline {
 public:
  explicit ReturnBaseline(double momentum = 0.9) : momentum_(momentum) {}
  double value() const { return value_; }
  void Update(double mean_return);

 private:
  double momentum_;
  double value_ = 0.0;
  bool initialized_ = false;
};

struct RlConfig {
  int epochs = 40;
  int batch_size = 32;
  double lr = 1e-3;
  double baseline_momentum = 0.9;
  RewardConfig reward;
  int val_games_per_scene = 2;
  uint64_t seed = 1;
  double max_minutes = 0.0;  // as in SupervisedConfig

  void Validate() const;
  nlohmann::json ToJson() const;
  static RlConfig FromJson(const nlohmann::json& j);
};

struct RlResult {
  int best_epoch = 0;
  double best_success = 0.0;
  std::vector<nlohmann::json> history;
};

// Policy-gradient training of the targeting module (or the recurrent
// question generator); every other parameter stays frozen. Keeps the best
// validation weights in `agent` on return.
RlResult RunReinforce(Agent& agent, const Dataset& dataset,
                      const RlConfig& config, const TrainPaths& paths = {});

double Spearman(std::span<const double> a, std::span<const double> b);

}  // namespace goalq

#endif  // GOALQ_TRAINING_H_
