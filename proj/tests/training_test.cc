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

#include <algorithm>
#include <fstream>

#undef CHECK  // c10 logging macro from the torch headers
#include "doctest.h"
#include "goalq/evaluation.h"
#include "goalq/model.h"
#include "goalq/targeting.h"
#include "goalq/training.h"
#include "nn_fixtures.h"
#include "test_util.h"

namespace goalq {
namespace {

using testing::TinyConfig;
using testing::TinyDataset;

size_t Unmasked(const Grouping& g) { return g.targets.size() + g.distracters.size(); }

TEST_CASE("ground-truth dialogues narrow the candidates around the goal") {
  const Dataset& data = TinyDataset();
  QuestionBank bank = QuestionBank::Build(data.config.space, data.config.grammar);
  Rng rng(5);
  for (const Scene& scene : data.train) {
    for (int goal = 0; goal < scene.size(); ++goal) {
      GtDialogue d = SampleGtDialogue(bank, scene, goal, 4, rng);
      REQUIRE(d.candidates.size() == d.questions.size() + 1);
      CHECK(d.questions.size() <= 4);
      for (size_t s = 0; s < d.questions.size(); ++s) {
        CHECK(d.candidates[s].size() >= 2);
        CHECK(d.candidates[s + 1].size() < d.candidates[s].size());
        CHECK(d.candidates[s + 1].count(goal) == 1);
        CHECK(d.answers[s] == AnswerQuestion(d.questions[s], {&scene, goal}));
        CHECK(!d.groupings[s].targets.empty());
        CHECK(!d.groupings[s].distracters.empty());
      }
      if (d.questions.size() < 4) CHECK(d.candidates.back().size() == 1);
    }
  }
}

TEST_CASE("top-k masking keeps one target and one distracter") {
  Rng rng(2);
  Grouping g;
  g.targets = {0, 1, 2};
  g.distracters = {3, 4};
  g.masked = {5};
  for (int trial = 0; trial < 50; ++trial) {
    auto m = MaskToTopK(g, 3, rng);
    REQUIRE(m.has_value());
    CHECK(Unmasked(*m) == 3);
    CHECK(!m->targets.empty());
    CHECK(!m->distracters.empty());
    CHECK(m->masked.count(5) == 1);
    CHECK(m->masked.size() == 3);
    for (int id : m->targets) CHECK(g.targets.count(id) == 1);
  }
  Grouping small;
  small.targets = {1};
  small.distracters = {2};
  small.masked = {0, 3};
  CHECK(MaskToTopK(small, 3, rng) == small);
  Grouping lopsided;
  lopsided.targets = {0, 1, 2, 3};
  CHECK(!MaskToTopK(lopsided, 3, rng).has_value());
  CHECK(GroupVectorFor(small, 5) == std::vector<int>{0, 1, 2, 0, 0});
}

TEST_CASE("supervised samples follow the dialogue") {
  const Dataset& data = TinyDataset();
  QuestionBank bank = QuestionBank::Build(data.config.space, data.config.grammar);
  auto config = TinyConfig();
  Rng rng(8);
  for (const Scene& scene : data.train) {
    auto samples = SamplesForGame(bank, scene, 0, config, rng);
    REQUIRE(!samples.empty());
    CHECK(samples.size() <= static_cast<size_t>(config.max_questions));
    CHECK(samples.back().end_of_dialogue);
    CHECK(!samples.back().target.has_value());
    for (size_t s = 0; s < samples.size(); ++s) {
      const auto& x = samples[s];
      CHECK(x.questions.size() == s);
      CHECK(x.candidates.count(0) == 1);
      if (!x.target) continue;
      CHECK(x.target->back() == "[EOS]");
      CHECK(static_cast<int>(x.group_vector.size()) == config.n_max);
      int targets = std::count(x.group_vector.begin(), x.group_vector.end(), kTarget);
      int distracters =
          std::count(x.group_vector.begin(), x.group_vector.end(), kDistracter);
      CHECK(targets >= 1);
      CHECK(distracters >= 1);
      CHECK(targets + distracters <= config.k);
      for (int i = 0; i < config.n_max; ++i) {
        if (x.group_vector[i] != kMasked) CHECK(x.candidates.count(i) == 1);
      }
    }
  }
  CHECK(TrainingGoals(data.train[0]).size() + 1 == data.train[0].objects.size());
}

// Asks a fixed number of questions, then submits the goal.
class ScriptedAgent : public Agent {
 public:
  explicit ScriptedAgent(int asks, bool correct = true)
      : asks_(asks), correct_(correct) {
    net_ = std::make_shared<torch::nn::Module>();
  }
  const ModelConfig& config() const override { return config_; }
  torch::nn::Module& net() override { return *net_; }
  SupervisedLosses Losses(std::span<const SlSample>) override { return {}; }
  std::vector<SlOutput> Infer(std::span<const SlSample>) override { return {}; }
  std::vector<Decision> Decide(std::span<Episode* const> live,
                               PolicyMode) override {
    std::vector<Decision> out(live.size());
    for (size_t i = 0; i < live.size(); ++i) {
      const Episode& e = *live[i];
      Decision& d = out[i];
      d.prob.assign(e.scene->size(), 1.0 / e.scene->size());
      d.prediction = correct_ ? e.goal_id : (e.goal_id + 1) % e.scene->size();
      if (static_cast<int>(e.questions.size()) < asks_) {
        d.question = SplitTokens("is it a red thing ?");
      } else {
        d.submit = true;
      }
    }
    return out;
  }
  torch::Tensor LogProbs(std::span<const Decision* const>) override { return {}; }
  std::vector<torch::Tensor> PolicyParameters() override { return {}; }
  std::vector<torch::Tensor> FrozenParameters() override { return {}; }

 private:
  int asks_;
  bool correct_;
  ModelConfig config_;
  std::shared_ptr<torch::nn::Module> net_;
};

TEST_CASE("rollouts score scripted dialogues") {
  const Dataset& data = TinyDataset();
  std::vector<GameInstance> games;
  for (const auto& s : data.val) games.push_back({&s, 0});
  RolloutOptions opts;
  opts.space = &data.config.space;
  opts.grammar = data.config.grammar;

  ScriptedAgent one(1);
  auto eps = MakeEpisodes(games, 1, "s");
  Rollout(one, eps, opts);
  for (const auto& e : eps) {
    CHECK(e.done);
    CHECK(e.submitted);
    CHECK(e.step == 2);
    CHECK(e.reward == doctest::Approx(0.92));
    REQUIRE(e.turns.size() == 1);
    CHECK(e.turns[0].answer ==
          AnswerQuestion(*e.asts[0], GameInstance{e.scene, e.goal_id}));
    auto t = ToTranscript(e);
    CHECK(Transcript::FromJson(t.ToJson()).ToJson() == t.ToJson());
  }

  ScriptedAgent instant(0);
  eps = MakeEpisodes(games, 1, "s");
  Rollout(instant, eps, opts);
  for (const auto& e : eps) CHECK(e.reward == 0.0);  // t = 1 is invalid

  ScriptedAgent never(99);
  eps = MakeEpisodes(games, 1, "s");
  Rollout(never, eps, opts);
  for (const auto& e : eps) {
    CHECK(e.done);
    CHECK(!e.submitted);
    CHECK(e.turns.size() == 5);
    CHECK(e.reward == 0.0);
  }
  opts.force_stop = true;
  eps = MakeEpisodes(games, 1, "s");
  Rollout(never, eps, opts);
  for (const auto& e : eps) {
    CHECK(e.submitted);
    CHECK(e.turns.size() == 4);
    CHECK(e.reward == doctest::Approx(0.8));
  }
  ScriptedAgent wrong(2, false);
  opts.force_stop = false;
  eps = MakeEpisodes(games, 1, "s");
  Rollout(wrong, eps, opts);
  for (const auto& e : eps) CHECK(e.reward == 0.0);
}

TEST_CASE("sampled rollouts are reproducible") {
  const Dataset& data = TinyDataset();
  auto config = TinyConfig();
  std::vector<GameInstance> games;
  for (const auto& s : data.train) games.push_back({&s, 1});
  RolloutOptions opts;
  opts.mode = PolicyMode::kSample;
  opts.space = &data.config.space;
  opts.grammar = data.config.grammar;
  auto run = [&](bool cache) {
    UniqerAgent agent(config, Vocabulary::Build(data.config.space));
    agent.net().eval();
    agent.SetInferenceCache(cache);
    auto eps = MakeEpisodes(games, 4, "r");
    Rollout(agent, eps, opts);
    nlohmann::json j = nlohmann::json::array();
    for (const auto& e : eps) j.push_back(ToTranscript(e).ToJson());
    return j.dump();
  };
  std::string a = run(false);
  CHECK(a == run(false));
  CHECK(a == run(true));
}

TEST_CASE("reinforcement leaves frozen parameters untouched") {
  const Dataset& data = TinyDataset();
  for (Variant v : {Variant::kUniqer, Variant::kBaseline}) {
    CAPTURE(VariantName(v));
    auto agent = BuildAgent(TinyConfig(v), Vocabulary::Build(data.config.space));
    auto frozen = agent->FrozenParameters();
    auto policy = agent->PolicyParameters();
    uint64_t frozen_before = ParameterHash(frozen);
    uint64_t policy_before = ParameterHash(policy);
    RlConfig rc;
    rc.epochs = 2;
    rc.batch_size = 4;
    rc.val_games_per_scene = 1;
    testing::TempDir dir;
    TrainPaths paths{dir.path() / "best", dir.path() / "last",
                     dir.path() / "rl.jsonl", false};
    auto result = RunReinforce(*agent, data, rc, paths);
    CHECK(result.history.size() == 2);
    CHECK(ParameterHash(agent->FrozenParameters()) == frozen_before);
    // the last epoch's weights differ from the start
    auto last = LoadAgent(paths.last, Vocabulary::Build(data.config.space));
    CHECK(ParameterHash(last->PolicyParameters()) != policy_before);
    CHECK(ParameterHash(last->FrozenParameters()) == frozen_before);
    std::ifstream in(paths.metrics);
    int lines = 0;
    for (std::string line; std::getline(in, line);) ++lines;
    CHECK(lines == 2);
  }
}

TEST_CASE("supervised training writes checkpoints and resumes") {
  const Dataset& data = TinyDataset();
  auto config = TinyConfig();
  SupervisedConfig sc;
  sc.epochs = 2;
  sc.batch_size = 16;
  sc.games_per_scene = 1;
  sc.val_games_per_scene = 1;
  testing::TempDir dir;
  TrainPaths paths{dir.path() / "best", dir.path() / "last",
                   dir.path() / "sl.jsonl", false};
  auto agent = BuildAgent(config, Vocabulary::Build(data.config.space));
  auto result = RunSupervised(*agent, data, sc, paths);
  CHECK(result.history.size() == 2);
  CHECK(result.best_epoch >= 1);
  CHECK(std::filesystem::exists(dir.path() / "best.pt"));
  CHECK(std::filesystem::exists(dir.path() / "last.json"));
  CHECK(ReadCheckpointInfo(paths.last).epoch == 2);

  // resuming a 3-epoch schedule runs only the third epoch
  sc.epochs = 3;
  paths.resume = true;
  auto resumed = BuildAgent(config, Vocabulary::Build(data.config.space));
  auto more = RunSupervised(*resumed, data, sc, paths);
  REQUIRE(more.history.size() == 1);
  CHECK(more.history[0]["epoch"] == 3);

  // an uninterrupted 3-epoch run gives the same third epoch
  testing::TempDir other;
  TrainPaths fresh{other.path() / "best", other.path() / "last",
                   other.path() / "sl.jsonl", false};
  auto straight = BuildAgent(config, Vocabulary::Build(data.config.space));
  auto full = RunSupervised(*straight, data, sc, fresh);
  CHECK(full.history[2]["loss_pred"] == more.history[0]["loss_pred"]);
  CHECK(full.history[2]["f1"] == more.history[0]["f1"]);
}

TEST_CASE("rank correlation") {
  std::vector<double> a = {1, 2, 3, 4};
  std::vector<double> b = {10, 20, 30, 40};
  std::vector<double> c = {4, 3, 2, 1};
  CHECK(Spearman(a, b) == doctest::Approx(1.0));
  CHECK(Spearman(a, c) == doctest::Approx(-1.0));
  std::vector<double> ties = {1, 1, 2, 2};
  CHECK(Spearman(a, ties) == doctest::Approx(0.894427191));
  CHECK_THROWS(Spearman(std::vector<double>{1}, std::vector<double>{1}));
}

TEST_CASE("return baseline is an exponential moving average") {
  ReturnBaseline b(0.5);
  CHECK(b.value() == 0.0);
  b.Update(1.0);
  CHECK(b.value() == 1.0);
  b.Update(0.0);
  CHECK(b.value() == 0.5);
}

TEST_CASE("evaluation modes and splits parse") {
  CHECK(ParseEvalMode("force_stop") == EvalMode::kForceStop);
  CHECK(EvalModeName(EvalMode::kRandomOtm) == "random_otm");
  CHECK_THROWS_AS(ParseEvalMode("greedy"), std::invalid_argument);
  CHECK(ParseEvalSplit("new_object") == EvalSplit::kNewObject);
  CHECK_THROWS_AS(ParseEvalSplit("val"), std::invalid_argument);
}

TEST_CASE("evaluation games") {
  const Dataset& data = TinyDataset();
  auto objects = EvalGames(data, EvalSplit::kNewObject, 2, 1);
  REQUIRE(objects.size() == data.train.size());
  for (const auto& g : objects) CHECK(g.goal_id == HeldOutGoal(*g.scene));
  auto images = EvalGames(data, EvalSplit::kNewImage, 2, 1);
  CHECK(images.size() == 2 * data.test.size());
  for (const auto& g : images) {
    CHECK(g.scene->split == Split::kTest);
    CHECK(g.goal_id < g.scene->size());
  }
  CHECK(images[0].goal_id != images[1].goal_id);
}

TEST_CASE("aggregation uses the sample standard deviation") {
  SplitMetrics a, b;
  a.task_success = 0.5;
  b.task_success = 0.7;
  a.episodes = b.episodes = 10;
  auto r = Aggregate({1, 2}, {a, b});
  CHECK(r.mean.task_success == doctest::Approx(0.6));
  CHECK(r.std.task_success == doctest::Approx(0.141421356));
  CHECK(r.mean.episodes == 20);
  auto single = Aggregate({1}, {a});
  CHECK(single.std.task_success == 0.0);
  CHECK_THROWS(Aggregate({1, 2}, {a}));
}

TEST_CASE("evaluation is reproducible and recomputable from transcripts") {
  const Dataset& data = TinyDataset();
  Vocabulary vocab = Vocabulary::Build(data.config.space);
  EvalConfig config;
  config.seeds = {1, 2};
  for (EvalMode mode : {EvalMode::kStandard, EvalMode::kForceStop,
                        EvalMode::kRandomOtm}) {
    CAPTURE(EvalModeName(mode));
    config.mode = mode;
    UniqerAgent agent(TinyConfig(), vocab);
    auto first = Evaluate(agent, data, config);
    auto second = Evaluate(agent, data, config);
    CHECK(first.report.ToJson() == second.report.ToJson());
    auto round = MetricReport::FromJson(first.report.ToJson());
    CHECK(round.ToJson() == first.report.ToJson());

    testing::TempDir dir;
    for (const auto& [split, per_seed] : first.transcripts) {
      const auto& scenes = split == "new_object" ? data.train : data.test;
      for (size_t i = 0; i < per_seed.size(); ++i) {
        auto path = (dir.path() / (split + std::to_string(i))).string();
        SaveTranscripts(per_seed[i], path);
        auto reread = LoadTranscripts(path);
        auto m = MetricsFromTranscripts(reread, scenes, data.config.space,
                                        data.config.grammar);
        m.f1 = first.report.splits.at(split).per_seed[i].f1;
        CHECK(m == first.report.splits.at(split).per_seed[i]);
        const auto& rep = first.report.splits.at(split).per_seed[i];
        CHECK(rep.perfect <= rep.correct);
        CHECK((rep.task_success >= 0.0 && rep.task_success <= 1.0));
      }
    }
  }
  UniqerAgent agent(TinyConfig(), vocab);
  config.mode = EvalMode::kStandard;
  auto standard = Evaluate(agent, data, config);
  config.mode = EvalMode::kForceStop;
  auto forced = Evaluate(agent, data, config);
  for (const auto& [split, r] : standard.report.splits) {
    CHECK(forced.report.splits.at(split).mean.task_success >= r.mean.task_success);
  }
}

}  // namespace
}  // namespace goalq
