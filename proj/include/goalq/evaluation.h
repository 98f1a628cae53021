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

#ifndef GOALQ_EVALUATION_H_
#define GOALQ_EVALUATION_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "goalq/agent.h"
#include "goalq/dataset.h"
#include "goalq/metrics.h"
#include "goalq/reward.h"

namespace goalq {

enum class EvalMode { kStandard, kForceStop, kRandomOtm, kRandomForceStop };
std::string_view EvalModeName(EvalMode mode);
EvalMode ParseEvalMode(std::string_view name);  // throws invalid_argument

// new_image: test scenes with random goals. new_object: training scenes with
// the goal that was withheld during training.
enum class EvalSplit { kNewImage, kNewObject };
std::string_view EvalSplitName(EvalSplit split);
EvalSplit ParseEvalSplit(std::string_view name);

struct EvalConfig {
  EvalMode mode = EvalMode::kStandard;
  std::vector<EvalSplit> splits = {EvalSplit::kNewImage, EvalSplit::kNewObject};
  std::vector<uint64_t> seeds = {1, 2, 3};
  // new_image only.
  int goals_per_scene = 2;
  RewardConfig reward;
};

struct SplitMetrics {
  double f1 = 0.0;
  double perfect = 0.0;
  double correct = 0.0;
  double task_success = 0.0;
  double mean_questions = 0.0;
  double n_vocab = 0.0;
  double n_vocab_dialogue = 0.0;
  int episodes = 0;

  nlohmann::json ToJson() const;
  static SplitMetrics FromJson(const nlohmann::json& j);
  bool operator==(const SplitMetrics&) const = default;
};

struct SplitReport {
  std::vector<uint64_t> seeds;
  std::vector<SplitMetrics> per_seed;
  SplitMetrics mean;
  SplitMetrics std;  // sample standard deviation, 0 for a single seed
};
SplitReport Aggregate(std::vector<uint64_t> seeds,
                      std::vector<SplitMetrics> per_seed);

struct MetricReport {
  std::string variant;
  EvalMode mode = EvalMode::kStandard;
  std::map<std::string, SplitReport> splits;

  nlohmann::json ToJson() const;
  static MetricReport FromJson(const nlohmann::json& j);
};

std::vector<GameInstance> EvalGames(const Dataset& dataset, EvalSplit split,
                                    int goals_per_scene, uint64_t seed);

// Everything but f1, which needs the model's candidate estimates.
SplitMetrics MetricsFromTranscripts(std::span<const Transcript> transcripts,
                                    std::span<const Scene> scenes,
                                    const AttributeSpace& space,
                                    const GrammarOptions& grammar);

// Candidate F1 of the guesser along ground-truth dialogues for `games`.
double GtDialogueF1(Agent& agent, std::span<const GameInstance> games,
                    const Dataset& dataset, uint64_t seed);

struct EvalResult {
  MetricReport report;
  // split name -> one transcript list per seed
  std::map<std::string, std::vector<std::vector<Transcript>>> transcripts;
};

EvalResult Evaluate(Agent& agent, const Dataset& dataset,
                    const EvalConfig& config);

}  // namespace goalq

#endif  // GOALQ_EVALUATION_H_
