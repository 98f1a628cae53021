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

#include "goalq/evaluation.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "goalq/training.h"

namespace goalq {

namespace {

constexpr std::pair<EvalMode, std::string_view> kModes[] = {
    {EvalMode::kStandard, "standard"},
    {EvalMode::kForceStop, "force_stop"},
    {EvalMode::kRandomOtm, "random_otm"},
    {EvalMode::kRandomForceStop, "random_force_stop"}};

constexpr std::pair<EvalSplit, std::string_view> kSplits[] = {
    {EvalSplit::kNewImage, "new_image"}, {EvalSplit::kNewObject, "new_object"}};

bool IsRandom(EvalMode m) {
  return m == EvalMode::kRandomOtm || m == EvalMode::kRandomForceStop;
}
bool IsForced(EvalMode m) {
  return m == EvalMode::kForceStop || m == EvalMode::kRandomForceStop;
}

// Applies f to every numeric field of a and b, writing into out.
template <typename F>
void ForFields(SplitMetrics& out, F f) {
  for (double SplitMetrics::*field :
       {&SplitMetrics::f1, &SplitMetrics::perfect, &SplitMetrics::correct,
        &SplitMetrics::task_success, &SplitMetrics::mean_questions,
        &SplitMetrics::n_vocab, &SplitMetrics::n_vocab_dialogue}) {
    out.*field = f(field);
  }
}

}  // namespace

std::string_view EvalModeName(EvalMode mode) {
  for (auto [m, n] : kModes) {
    if (m == mode) return n;
  }
  throw std::invalid_argument("unknown eval mode");
}

EvalMode ParseEvalMode(std::string_view name) {
  for (auto [m, n] : kModes) {
    if (n == name) return m;
  }
  throw std::invalid_argument("unknown eval mode: " + std::string(name));
}

std::string_view EvalSplitName(EvalSplit split) {
  for (auto [s, n] : kSplits) {
    if (s == split) return n;
  }
  throw std::invalid_argument("unknown eval split");
}

EvalSplit ParseEvalSplit(std::string_view name) {
  for (auto [s, n] : kSplits) {
    if (n == name) return s;
  }
  throw std::invalid_argument("unknown eval split: " + std::string(name));
}

nlohmann::json SplitMetrics::ToJson() const {
  return {{"f1", f1},
          {"perfect_address_ratio", perfect},
          {"correct_address_ratio", correct},
          {"task_success", task_success},
          {"mean_questions", mean_questions},
          {"n_vocab", n_vocab},
          {"n_vocab_dialogue", n_vocab_dialogue},
          {"episodes", episodes}};
}

SplitMetrics SplitMetrics::FromJson(const nlohmann::json& j) {
  SplitMetrics m;
  m.f1 = j.at("f1").get<double>();
  m.perfect = j.at("perfect_address_ratio").get<double>();
  m.correct = j.at("correct_address_ratio").get<double>();
  m.task_success = j.at("task_success").get<double>();
  m.mean_questions = j.at("mean_questions").get<double>();
  m.n_vocab = j.at("n_vocab").get<double>();
  m.n_vocab_dialogue = j.at("n_vocab_dialogue").get<double>();
  m.episodes = j.value("episodes", 0);
  return m;
}

SplitReport Aggregate(std::vector<uint64_t> seeds,
                      std::vector<SplitMetrics> per_seed) {
  if (seeds.size() != per_seed.size() || seeds.empty()) {
    throw std::invalid_argument("one metric set per seed is required");
  }
  SplitReport r;
  const double n = static_cast<double>(per_seed.size());
  ForFields(r.mean, [&](double SplitMetrics::*f) {
    double s = 0.0;
    for (const auto& m : per_seed) s += m.*f;
    return s / n;
  });
  ForFields(r.std, [&](double SplitMetrics::*f) {
    if (per_seed.size() < 2) return 0.0;
    double s = 0.0;
    for (const auto& m : per_seed) s += (m.*f - r.mean.*f) * (m.*f - r.mean.*f);
    return std::sqrt(s / (n - 1.0));
  });
  for (const auto& m : per_seed) r.mean.episodes += m.episodes;
  r.seeds = std::move(seeds);
  r.per_seed = std::move(per_seed);
  return r;
}

nlohmann::json MetricReport::ToJson() const {
  nlohmann::json j = {{"variant", variant}, {"mode", EvalModeName(mode)}};
  nlohmann::json s = nlohmann::json::object();
  for (const auto& [name, r] : splits) {
    nlohmann::json per = nlohmann::json::array();
    for (const auto& m : r.per_seed) per.push_back(m.ToJson());
    s[name] = {{"seeds", r.seeds},
               {"per_seed", per},
               {"mean", r.mean.ToJson()},
               {"std", r.std.ToJson()}};
  }
  j["splits"] = s;
  return j;
}

MetricReport MetricReport::FromJson(const nlohmann::json& j) {
  MetricReport r;
  r.variant = j.value("variant", "");
  r.mode = ParseEvalMode(j.at("mode").get<std::string>());
  for (const auto& [name, s] : j.at("splits").items()) {
    SplitReport sr;
    sr.seeds = s.at("seeds").get<std::vector<uint64_t>>();
    for (const auto& m : s.at("per_seed")) {
      sr.per_seed.push_back(SplitMetrics::FromJson(m));
    }
    sr.mean = SplitMetrics::FromJson(s.at("mean"));
    sr.std = SplitMetrics::FromJson(s.at("std"));
    r.splits[name] = std::move(sr);
  }
  return r;
}

std::vector<GameInstance> EvalGames(const Dataset& dataset, EvalSplit split,
                                    int goals_per_scene, uint64_t seed) {
  std::vector<GameInstance> games;
  if (split == EvalSplit::kNewObject) {
    for (const auto& scene : dataset.train) {
      games.push_back({&scene, HeldOutGoal(scene)});
    }
    return games;
  }
  if (goals_per_scene < 1) {
    throw std::invalid_argument("goals_per_scene must be positive");
  }
  for (const auto& scene : dataset.test) {
    Rng rng = StreamFor(seed, "eval_goals|" + scene.scene_id);
    std::vector<int> goals(scene.size());
    std::iota(goals.begin(), goals.end(), 0);
    std::shuffle(goals.begin(), goals.end(), rng);
    for (int g = 0; g < std::min(goals_per_scene, scene.size()); ++g) {
      games.push_back({&scene, goals[g]});
    }
  }
  return games;
}

SplitMetrics MetricsFromTranscripts(std::span<const Transcript> transcripts,
                                    std::span<const Scene> scenes,
                                    const AttributeSpace& space,
                                    const GrammarOptions& grammar) {
  std::map<std::string, const Scene*> by_id;
  for (const auto& s : scenes) by_id[s.scene_id] = &s;
  SplitMetrics m;
  m.episodes = static_cast<int>(transcripts.size());
  m.task_success = TaskSuccess(transcripts);
  m.mean_questions = MeanQuestions(transcripts);
  auto vocab = ComputeVocabMetrics(transcripts, Vocabulary::Build(space));
  m.n_vocab = vocab.question_mean;
  m.n_vocab_dialogue = vocab.dialogue_mean;
  auto verdicts = TranscriptVerdicts(transcripts, by_id, space, grammar);
  auto ratios = ComputeAddressRatios(verdicts);
  m.perfect = ratios.perfect;
  m.correct = ratios.correct;
  return m;
}

double GtDialogueF1(Agent& agent, std::span<const GameInstance> games,
                    const Dataset& dataset, uint64_t seed) {
  QuestionBank bank =
      QuestionBank::Build(dataset.config.space, dataset.config.grammar);
  std::vector<SlSample> samples;
  for (size_t i = 0; i < games.size(); ++i) {
    Rng rng = StreamFor(seed, "eval_f1|" + games[i].scene->scene_id + "|" +
                                  std::to_string(games[i].goal_id) + "|" +
                                  std::to_string(i));
    auto s = SamplesForGame(bank, *games[i].scene, games[i].goal_id,
                            agent.config(), rng);
    samples.insert(samples.end(), s.begin(), s.end());
  }
  // Question generation is irrelevant here; drop the targets.
  for (auto& s : samples) s.target.reset();
  return EvaluateSupervised(agent, samples, dataset.config.space,
                            dataset.config.grammar)
      .f1;
}

EvalResult Evaluate(Agent& agent, const Dataset& dataset,
                    const EvalConfig& config) {
  if (config.seeds.empty()) throw std::invalid_argument("no eval seeds");
  if (IsRandom(config.mode) && agent.config().variant == Variant::kBaseline) {
    throw std::invalid_argument(
        "random targeting modes need an agent with a targeting module");
  }
  EvalResult result;
  result.report.variant = std::string(VariantName(agent.config().variant));
  result.report.mode = config.mode;
  RolloutOptions options;
  options.mode = IsRandom(config.mode) ? PolicyMode::kRandom : PolicyMode::kGreedy;
  options.force_stop = IsForced(config.mode);
  options.reward = config.reward;
  options.space = &dataset.config.space;
  options.grammar = dataset.config.grammar;

  agent.net().eval();
  agent.SetInferenceCache(true);
  for (EvalSplit split : config.splits) {
    std::string name(EvalSplitName(split));
    const auto& scenes =
        split == EvalSplit::kNewObject ? dataset.train : dataset.test;
    std::vector<SplitMetrics> per_seed;
    for (uint64_t seed : config.seeds) {
      auto games = EvalGames(dataset, split, config.goals_per_scene, seed);
      auto episodes = MakeEpisodes(
          games, seed, "eval|" + std::string(EvalModeName(config.mode)) + "|" + name);
      Rollout(agent, episodes, options);
      std::vector<Transcript> ts;
      for (const auto& e : episodes) ts.push_back(ToTranscript(e));
      SplitMetrics m = MetricsFromTranscripts(ts, scenes, dataset.config.space,
                                              dataset.config.grammar);
      m.f1 = GtDialogueF1(agent, games, dataset, seed);
      per_seed.push_back(m);
      result.transcripts[name].push_back(std::move(ts));
    }
    result.report.splits[name] = Aggregate(config.seeds, std::move(per_seed));
  }
  agent.SetInferenceCache(false);
  return result;
}

}  // namespace goalq
