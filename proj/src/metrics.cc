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

#include "goalq/metrics.h"

#include <fstream>
#include <set>
#include <stdexcept>

namespace goalq {

using nlohmann::json;

double F1Score(const IdSet& predicted, const IdSet& truth) {
  if (predicted.empty() && truth.empty()) return 1.0;
  if (predicted.empty() || truth.empty()) return 0.0;
  int hit = 0;
  for (int id : predicted) hit += truth.count(id) ? 1 : 0;
  if (hit == 0) return 0.0;
  double precision = static_cast<double>(hit) / predicted.size();
  double recall = static_cast<double>(hit) / truth.size();
  return 2 * precision * recall / (precision + recall);
}

AddressRatios ComputeAddressRatios(std::span<const AddressVerdict> verdicts) {
  AddressRatios r;
  r.samples = static_cast<int>(verdicts.size());
  if (verdicts.empty()) return r;
  int perfect = 0, correct = 0;
  for (auto v : verdicts) {
    perfect += v == AddressVerdict::kPerfect;
    correct += v != AddressVerdict::kNeither;
  }
  r.perfect = static_cast<double>(perfect) / r.samples;
  r.correct = static_cast<double>(correct) / r.samples;
  return r;
}

json Transcript::ToJson() const {
  json turns_json = json::array();
  for (const auto& t : turns) {
    turns_json.push_back({{"question", t.question},
                          {"answer", t.answer == Answer::kYes ? "yes" : "no"},
                          {"group_vector", t.group_vector},
                          {"P_o", t.prob}});
  }
  return {{"scene_id", scene_id},
          {"goal_id", goal_id},
          {"turns", std::move(turns_json)},
          {"prediction", prediction ? json(*prediction) : json(nullptr)},
          {"reward", reward}};
}

Transcript Transcript::FromJson(const json& j) {
  Transcript t;
  t.scene_id = j.at("scene_id").get<std::string>();
  t.goal_id = j.at("goal_id").get<int>();
  for (const auto& jt : j.at("turns")) {
    TranscriptTurn turn;
    turn.question = jt.at("question").get<std::string>();
    std::string answer = jt.at("answer").get<std::string>();
    if (answer != "yes" && answer != "no") {
      throw std::invalid_argument("answer must be yes or no, got " + answer);
    }
    turn.answer = answer == "yes" ? Answer::kYes : Answer::kNo;
    turn.group_vector = jt.at("group_vector").get<std::vector<int>>();
    turn.prob = jt.at("P_o").get<std::vector<double>>();
    t.turns.push_back(std::move(turn));
  }
  if (!j.at("prediction").is_null()) t.prediction = j["prediction"].get<int>();
  t.reward = j.at("reward").get<double>();
  return t;
}

void SaveTranscripts(std::span<const Transcript> transcripts,
                     const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& t : transcripts) out << t.ToJson().dump() << '\n';
}

std::vector<Transcript> LoadTranscripts(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::vector<Transcript> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    out.push_back(Transcript::FromJson(json::parse(line)));
  }
  return out;
}

double TaskSuccess(std::span<const Transcript> transcripts) {
  if (transcripts.empty()) return 0.0;
  int wins = 0;
  for (const auto& t : transcripts) wins += t.success();
  return static_cast<double>(wins) / transcripts.size();
}

double MeanQuestions(std::span<const Transcript> transcripts) {
  int wins = 0;
  double questions = 0;
  for (const auto& t : transcripts) {
    if (!t.success()) continue;
    ++wins;
    questions += static_cast<double>(t.turns.size());
  }
  return wins ? questions / wins : 0.0;
}

VocabMetrics ComputeVocabMetrics(std::span<const std::vector<Tokens>> dialogues,
                                 const Vocabulary& vocab) {
  VocabMetrics m;
  int counted = 0;
  for (const auto& dialogue : dialogues) {
    if (dialogue.empty()) continue;
    ++counted;
    double per_question = 0;
    std::set<std::string> all;
    for (const auto& question : dialogue) {
      std::set<std::string> unique;
      for (const auto& token : question) {
        if (vocab.IsContent(token)) unique.insert(token);
      }
      per_question += static_cast<double>(unique.size());
      all.insert(unique.begin(), unique.end());
    }
    m.question_mean += per_question / dialogue.size();
    m.dialogue_mean += static_cast<double>(all.size()) / dialogue.size();
  }
  if (counted) {
    m.question_mean /= counted;
    m.dialogue_mean /= counted;
  }
  return m;
}

VocabMetrics ComputeVocabMetrics(std::span<const Transcript> transcripts,
                                 const Vocabulary& vocab) {
  std::vector<std::vector<Tokens>> dialogues;
  dialogues.reserve(transcripts.size());
  for (const auto& t : transcripts) {
    std::vector<Tokens> questions;
    for (const auto& turn : t.turns) questions.push_back(SplitTokens(turn.question));
    dialogues.push_back(std::move(questions));
  }
  return ComputeVocabMetrics(dialogues, vocab);
}

Grouping GroupingFromVector(std::span<const int> group_vector,
                            const Scene& scene) {
  Grouping g;
  for (const auto& o : scene.objects) {
    int group = o.id < static_cast<int>(group_vector.size()) ? group_vector[o.id] : 0;
    if (group == 1) {
      g.targets.insert(o.id);
    } else if (group == 2) {
      g.distracters.insert(o.id);
    } else {
      g.masked.insert(o.id);
    }
  }
  return g;
}

std::vector<AddressVerdict> TranscriptVerdicts(
    std::span<const Transcript> transcripts,
    const std::map<std::string, const Scene*>& scenes,
    const AttributeSpace& space, const GrammarOptions& options) {
  std::vector<AddressVerdict> out;
  for (const auto& t : transcripts) {
    auto it = scenes.find(t.scene_id);
    if (it == scenes.end()) {
      throw std::invalid_argument("transcript references unknown scene " +
                                  t.scene_id);
    }
    const Scene& scene = *it->second;
    for (const auto& turn : t.turns) {
      if (turn.group_vector.empty()) continue;
      Grouping g = GroupingFromVector(turn.group_vector, scene);
      if (g.targets.empty()) continue;
      auto ast = TryParse(SplitTokens(turn.question), space, options);
      out.push_back(ast ? ClassifyAddress(g, *ast, scene)
                        : AddressVerdict::kNeither);
    }
  }
  return out;
}

}  // namespace goalq
