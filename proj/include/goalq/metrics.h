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

#ifndef GOALQ_METRICS_H_
#define GOALQ_METRICS_H_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "goalq/language.h"
#include "goalq/oracle.h"
#include "goalq/scene.h"
#include "json.hpp"

namespace goalq {

// Precision/recall harmonic mean; empty vs empty scores 1.
double F1Score(const IdSet& predicted, const IdSet& truth);

struct AddressRatios {
  double perfect = 0.0;
  // Includes perfect questions.
  double correct = 0.0;
  int samples = 0;
};
AddressRatios ComputeAddressRatios(std::span<const AddressVerdict> verdicts);

// One recorded dialogue turn, in transcript form.
struct TranscriptTurn {
  std::string question;
  Answer answer = Answer::kNo;
  // Per object slot: 0 masked, 1 target, 2 distracter. Empty for agents
  // without a targeting module.
  std::vector<int> group_vector;
  // Goal probabilities over the scene's objects before the question.
  std::vector<double> prob;
};

struct Transcript {
  std::string scene_id;
  int goal_id = 0;
  std::vector<TranscriptTurn> turns;
  std::optional<int> prediction;
  double reward = 0.0;

  bool success() const { return prediction && *prediction == goal_id; }
  nlohmann::json ToJson() const;
  static Transcript FromJson(const nlohmann::json& j);
};

void SaveTranscripts(std::span<const Transcript> transcripts,
                     const std::string& path);
std::vector<Transcript> LoadTranscripts(const std::string& path);

// Fraction of episodes whose submitted prediction is the goal. Episodes
// without a submission count as failures.
double TaskSuccess(std::span<const Transcript> transcripts);
// Mean questions over successful episodes (0 when none succeeded).
double MeanQuestions(std::span<const Transcript> transcripts);

struct VocabMetrics {
  // Mean over dialogues of the mean unique content tokens per question.
  double question_mean = 0.0;
  // Mean over dialogues of |union of content tokens| / questions.
  double dialogue_mean = 0.0;
};
// Dialogues without questions are skipped.
VocabMetrics ComputeVocabMetrics(std::span<const std::vector<Tokens>> dialogues,
                                 const Vocabulary& vocab);
VocabMetrics ComputeVocabMetrics(std::span<const Transcript> transcripts,
                                 const Vocabulary& vocab);

// Address verdicts of transcript turns that carry a group vector with at
// least one target. Unparsed questions are "neither".
std::vector<AddressVerdict> TranscriptVerdicts(
    std::span<const Transcript> transcripts,
    const std::map<std::string, const Scene*>& scenes,
    const AttributeSpace& space, const GrammarOptions& options = {});

// Grouping from a slot-indexed group vector restricted to real objects.
Grouping GroupingFromVector(std::span<const int> group_vector,
                            const Scene& scene);

}  // namespace goalq

#endif  // GOALQ_METRICS_H_
