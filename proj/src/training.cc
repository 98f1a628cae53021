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

#include "goalq/training.h"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "goalq/losses.h"
#include "goalq/targeting.h"

namespace goalq {

namespace {

Tokens Words(const QuestionAst& ast) {
  Tokens t = Realize(ast);
  t.pop_back();  // [EOS]
  return t;
}

Grouping GroupingFor(const QuestionAst& ast, const Scene& scene,
                     const IdSet& candidates) {
  IdSet match = MatchSet(ast, scene);
  Grouping g;
  for (const auto& o : scene.objects) {
    if (!candidates.count(o.id)) {
      g.masked.insert(o.id);
    } else if (match.count(o.id)) {
      g.targets.insert(o.id);
    } else {
      g.distracters.insert(o.id);
    }
  }
  return g;
}

int PickFrom(const IdSet& s, Rng& rng) {
  std::uniform_int_distribution<size_t> pick(0, s.size() - 1);
  return *std::next(s.begin(), pick(rng));
}

std::vector<torch::Tensor> Snapshot(torch::nn::Module& m) {
  std::vector<torch::Tensor> out;
  for (const auto& p : m.parameters()) out.push_back(p.detach().clone());
  for (const auto& b : m.buffers()) out.push_back(b.detach().clone());
  return out;
}

void Restore(torch::nn::Module& m, const std::vector<torch::Tensor>& saved) {
  torch::NoGradGuard no_grad;
  size_t i = 0;
  for (auto& p : m.parameters()) p.copy_(saved.at(i++));
  for (auto& b : m.buffers()) b.copy_(saved.at(i++));
}

void AppendJsonl(const std::filesystem::path& path, const nlohmann::json& j) {
  if (path.empty()) return;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::app);
  out << j.dump() << "\n";
}

std::filesystem::path OptimizerPath(const std::filesystem::path& stem) {
  return std::filesystem::path(stem.string() + ".optim.pt");
}

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since)
      .count();
}

// True when another epoch as long as the last one would overrun the budget.
bool OutOfTime(std::chrono::steady_clock::time_point start, double last_epoch,
               double max_minutes) {
  return max_minutes > 0.0 && Seconds(start) + last_epoch > max_minutes * 60.0;
}

void SetLearningRate(torch::optim::Adam& opt, double lr) {
  for (auto& group : opt.param_groups()) {
    static_cast<torch::optim::AdamOptions&>(group.options()).lr(lr);
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Supervised data.

GtDialogue SampleGtDialogue(const QuestionBank& bank, const Scene& scene,
                            int goal_id, int max_questions, Rng& rng) {
  GtDialogue d;
  d.candidates.push_back(AllIds(scene));
  GameInstance game{&scene, goal_id};
  for (int q = 0; q < max_questions; ++q) {
    const IdSet& cand = d.candidates.back();
    if (cand.size() < 2) break;
    QuestionAst ast;
    if (q == 0 && !scene.gt_questions.empty()) {
      std::uniform_int_distribution<size_t> pick(0,
                                                 scene.gt_questions.size() - 1);
      ast = Parse(SplitTokens(scene.gt_questions[pick(rng)]), bank.space,
                  bank.options);
    } else {
      try {
        ast = SampleGtQuestion(bank, scene, cand, rng).ast;
      } catch (const NoInformativeQuestion&) {
        break;
      }
    }
    Grouping grouping = GroupingFor(ast, scene, cand);
    Answer answer = AnswerQuestion(ast, game);
    IdSet matched = MatchedSet(ast, answer, scene);
    IdSet next;
    std::set_intersection(cand.begin(), cand.end(), matched.begin(),
                          matched.end(), std::inserter(next, next.end()));
    d.questions.push_back(ast);
    d.groupings.push_back(std::move(grouping));
    d.answers.push_back(answer);
    d.candidates.push_back(std::move(next));
  }
  return d;
}

std::optional<Grouping> MaskToTopK(const Grouping& grouping, int k, Rng& rng) {
  if (grouping.targets.size() + grouping.distracters.size() <=
      static_cast<size_t>(k)) {
    return grouping;
  }
  if (grouping.targets.empty() || grouping.distracters.empty() || k < 2) {
    return std::nullopt;
  }
  Grouping out;
  out.masked = grouping.masked;
  int target = PickFrom(grouping.targets, rng);
  int distracter = PickFrom(grouping.distracters, rng);
  std::vector<int> rest;
  for (int id : grouping.targets) {
    if (id != target) rest.push_back(id);
  }
  for (int id : grouping.distracters) {
    if (id != distracter) rest.push_back(id);
  }
  std::shuffle(rest.begin(), rest.end(), rng);
  std::set<int> keep = {target, distracter};
  for (size_t i = 0; i < rest.size(); ++i) {
    if (i < static_cast<size_t>(k - 2)) {
      keep.insert(rest[i]);
    } else {
      out.masked.insert(rest[i]);
    }
  }
  for (int id : keep) {
    (grouping.targets.count(id) ? out.targets : out.distracters).insert(id);
  }
  return out;
}

std::vector<int> GroupVectorFor(const Grouping& grouping, int n_max) {
  std::vector<int> g(n_max, kMasked);
  for (int id : grouping.targets) g.at(id) = kTarget;
  for (int id : grouping.distracters) g.at(id) = kDistracter;
  return g;
}

namespace {

SlSample SampleAt(const GtDialogue& d, size_t s, const Scene& scene,
                  int goal_id, const ModelConfig& config, Rng& rng) {
  SlSample out;
  out.scene = &scene;
  out.goal_id = goal_id;
  for (size_t i = 0; i < s; ++i) {
    out.questions.push_back(Words(d.questions[i]));
    out.answers.push_back(d.answers[i]);
  }
  out.candidates = d.candidates[s];
  if (s < d.questions.size()) {
    auto masked = MaskToTopK(d.groupings[s], config.k, rng);
    if (masked) {
      out.target = Realize(d.questions[s]);
      out.grouping = *masked;
      out.group_vector = GroupVectorFor(*masked, config.n_max);
    } else {
      spdlog::warn("scene {}: grouping cannot keep a target and a distracter",
                   scene.scene_id);
    }
  } else {
    out.end_of_dialogue = true;
  }
  return out;
}

int GtQuestionLimit(const ModelConfig& config) {
  return std::max(1, config.max_questions - 1);
}

}  // namespace

std::optional<SlSample> MakeSupervisedSample(const QuestionBank& bank,
                                             const Scene& scene, int goal_id,
                                             int t, const ModelConfig& config,
                                             Rng& rng) {
  if (t < 1) throw std::invalid_argument("turn index starts at 1");
  GtDialogue d = SampleGtDialogue(bank, scene, goal_id, t, rng);
  if (d.questions.size() < static_cast<size_t>(t)) return std::nullopt;
  return SampleAt(d, t - 1, scene, goal_id, config, rng);
}

std::vector<SlSample> SamplesForGame(const QuestionBank& bank,
                                     const Scene& scene, int goal_id,
                                     const ModelConfig& config, Rng& rng) {
  GtDialogue d =
      SampleGtDialogue(bank, scene, goal_id, GtQuestionLimit(config), rng);
  std::vector<SlSample> out;
  for (size_t s = 0; s <= d.questions.size(); ++s) {
    out.push_back(SampleAt(d, s, scene, goal_id, config, rng));
  }
  return out;
}

std::vector<int> TrainingGoals(const Scene& scene) {
  int held_out = HeldOutGoal(scene);
  std::vector<int> goals;
  for (const auto& o : scene.objects) {
    if (o.id != held_out) goals.push_back(o.id);
  }
  return goals;
}

// ---------------------------------------------------------------------------
// Supervised training.

void SupervisedConfig::Validate() const {
  if (epochs < 1 || batch_size < 1 || games_per_scene < 1 ||
      val_games_per_scene < 0 || warmup_epochs < 0 || patience < 0 ||
      max_minutes < 0.0) {
    throw std::invalid_argument("supervised config: counts out of range");
  }
  if (!(lr > 0.0) || alpha < 0.0 || grad_clip < 0.0) {
    throw std::invalid_argument("supervised config: bad optimizer settings");
  }
}

nlohmann::json SupervisedConfig::ToJson() const {
  return {{"epochs", epochs},
          {"batch_size", batch_size},
          {"lr", lr},
          {"warmup_epochs", warmup_epochs},
          {"alpha", alpha},
          {"grad_clip", grad_clip},
          {"games_per_scene", games_per_scene},
          {"val_games_per_scene", val_games_per_scene},
          {"seed", seed},
          {"patience", patience},
          {"max_minutes", max_minutes}};
}

SupervisedConfig SupervisedConfig::FromJson(const nlohmann::json& j) {
  SupervisedConfig c;
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.lr = j.value("lr", c.lr);
  c.warmup_epochs = j.value("warmup_epochs", c.warmup_epochs);
  c.alpha = j.value("alpha", c.alpha);
  c.grad_clip = j.value("grad_clip", c.grad_clip);
  c.games_per_scene = j.value("games_per_scene", c.games_per_scene);
  c.val_games_per_scene = j.value("val_games_per_scene", c.val_games_per_scene);
  c.seed = j.value("seed", c.seed);
  c.patience = j.value("patience", c.patience);
  c.max_minutes = j.value("max_minutes", c.max_minutes);
  c.Validate();
  return c;
}

nlohmann::json SupervisedMetrics::ToJson() const {
  return {{"f1", f1},
          {"perfect_address_ratio", address.perfect},
          {"correct_address_ratio", address.correct},
          {"address_samples", address.samples}};
}

SupervisedMetrics EvaluateSupervised(Agent& agent,
                                     std::span<const SlSample> samples,
                                     const AttributeSpace& space,
                                     const GrammarOptions& grammar,
                                     int batch_size) {
  SupervisedMetrics m;
  double f1_sum = 0.0;
  int f1_count = 0;
  std::vector<AddressVerdict> verdicts;
  for (size_t start = 0; start < samples.size(); start += batch_size) {
    auto chunk = samples.subspan(
        start, std::min<size_t>(batch_size, samples.size() - start));
    auto outputs = agent.Infer(chunk);
    for (size_t i = 0; i < chunk.size(); ++i) {
      const SlSample& s = chunk[i];
      if (!s.questions.empty()) {
        IdSet predicted;
        for (size_t o = 0; o < outputs[i].sigma.size(); ++o) {
          if (outputs[i].sigma[o] > 0.5) predicted.insert(static_cast<int>(o));
        }
        f1_sum += F1Score(predicted, s.candidates);
        ++f1_count;
      }
      if (s.target && outputs[i].question) {
        auto ast = TryParse(*outputs[i].question, space, grammar);
        verdicts.push_back(ast ? ClassifyAddress(s.grouping, *ast, *s.scene)
                               : AddressVerdict::kNeither);
      }
    }
  }
  m.f1 = f1_count ? f1_sum / f1_count : 0.0;
  m.address = ComputeAddressRatios(verdicts);
  return m;
}

std::vector<SlSample> ValidationSamples(std::span<const Scene> scenes,
                                        const QuestionBank& bank,
                                        const ModelConfig& config,
                                        uint64_t seed, int games_per_scene) {
  std::vector<SlSample> out;
  for (const Scene& scene : scenes) {
    Rng rng = StreamFor(seed, "val|" + scene.scene_id);
    std::vector<int> goals(scene.size());
    std::iota(goals.begin(), goals.end(), 0);
    std::shuffle(goals.begin(), goals.end(), rng);
    if (games_per_scene > 0 && goals.size() > static_cast<size_t>(games_per_scene)) {
      goals.resize(games_per_scene);
    }
    for (int goal : goals) {
      auto samples = SamplesForGame(bank, scene, goal, config, rng);
      out.insert(out.end(), samples.begin(), samples.end());
    }
  }
  return out;
}

SupervisedResult RunSupervised(Agent& agent, const Dataset& dataset,
                               const SupervisedConfig& config,
                               const TrainPaths& paths) {
  config.Validate();
  const ModelConfig& mc = agent.config();
  const AttributeSpace& space = dataset.config.space;
  const GrammarOptions& grammar = dataset.config.grammar;
  QuestionBank bank = QuestionBank::Build(space, grammar);
  Vocabulary vocab = Vocabulary::Build(space);
  auto val = ValidationSamples(dataset.val, bank, mc, config.seed,
                               config.val_games_per_scene);

  torch::optim::Adam opt(agent.net().parameters(),
                         torch::optim::AdamOptions(config.lr));
  SupervisedResult result;
  std::vector<torch::Tensor> best_state = Snapshot(agent.net());
  double best_score = -1.0;
  int start_epoch = 1;
  if (paths.resume && !paths.last.empty() &&
      std::filesystem::exists(paths.last.string() + ".json")) {
    CheckpointInfo info = ReadCheckpointInfo(paths.last);
    torch::serialize::InputArchive weights, optim;
    weights.load_from(paths.last.string() + ".pt");
    agent.net().load(weights);
    optim.load_from(OptimizerPath(paths.last).string());
    opt.load(optim);
    start_epoch = info.epoch + 1;
    best_score = info.metrics.value("best_score", -1.0);
    result.best_epoch = info.metrics.value("best_epoch", 0);
    if (!paths.best.empty() && best_score >= 0.0) {
      auto best = LoadAgent(paths.best, vocab);
      best_state = Snapshot(best->net());
    }
    spdlog::info("resuming supervised training at epoch {}", start_epoch);
  }

  const auto run_start = std::chrono::steady_clock::now();
  int stale = 0;
  int64_t step = 0;
  for (int epoch = start_epoch; epoch <= config.epochs; ++epoch) {
    auto t0 = std::chrono::steady_clock::now();
    torch::manual_seed(config.seed * 1000003ULL + epoch);
    Rng rng = StreamFor(config.seed, "sl_epoch_" + std::to_string(epoch));
    std::vector<SlSample> samples;
    std::vector<const Scene*> order;
    for (const auto& s : dataset.train) order.push_back(&s);
    std::shuffle(order.begin(), order.end(), rng);
    for (const Scene* scene : order) {
      std::vector<int> goals = TrainingGoals(*scene);
      std::shuffle(goals.begin(), goals.end(), rng);
      for (int g = 0; g < config.games_per_scene; ++g) {
        auto s = SamplesForGame(bank, *scene, goals[g % goals.size()], mc, rng);
        samples.insert(samples.end(), s.begin(), s.end());
      }
    }
    // Batches group dialogues of equal length to cut padding; batch order
    // is shuffled.
    std::shuffle(samples.begin(), samples.end(), rng);
    std::stable_sort(samples.begin(), samples.end(),
                     [](const SlSample& a, const SlSample& b) {
                       return a.questions.size() < b.questions.size();
                     });
    const int64_t batches =
        (static_cast<int64_t>(samples.size()) + config.batch_size - 1) /
        config.batch_size;
    std::vector<int64_t> batch_order(batches);
    std::iota(batch_order.begin(), batch_order.end(), 0);
    std::shuffle(batch_order.begin(), batch_order.end(), rng);
    const int64_t warmup = std::max<int64_t>(1, config.warmup_epochs * batches);
    step = static_cast<int64_t>(epoch - 1) * batches;
    agent.net().train();
    double pred_sum = 0.0, gen_sum = 0.0;
    std::span<const SlSample> all(samples);
    for (int64_t b : batch_order) {
      auto chunk = all.subspan(
          b * config.batch_size,
          std::min<size_t>(config.batch_size, samples.size() - b * config.batch_size));
      SetLearningRate(opt, config.lr * std::min(1.0, double(step + 1) / warmup));
      SupervisedLosses l = agent.Losses(chunk);
      auto loss = TotalSupervisedLoss(l.pred, l.gen, config.alpha);
      double value = loss.item<double>();
      if (!std::isfinite(value)) {
        throw std::runtime_error("supervised loss diverged at epoch " +
                                 std::to_string(epoch) + ", batch " +
                                 std::to_string(b));
      }
      opt.zero_grad();
      loss.backward();
      if (config.grad_clip > 0.0) {
        torch::nn::utils::clip_grad_norm_(agent.net().parameters(),
                                          config.grad_clip);
      }
      opt.step();
      pred_sum += l.pred.item<double>();
      gen_sum += l.gen.item<double>();
      ++step;
    }
    agent.net().eval();
    SupervisedMetrics m = EvaluateSupervised(agent, val, space, grammar);
    double score = m.f1;
    nlohmann::json record = {{"stage", "supervised"},
                             {"epoch", epoch},
                             {"loss_pred", pred_sum / batches},
                             {"loss_gen", gen_sum / batches},
                             {"samples", samples.size()},
                             {"seconds", Seconds(t0)}};
    record.update(m.ToJson());
    spdlog::info("sl epoch {}: pred {:.3f} gen {:.3f} f1 {:.3f} perfect {:.3f} "
                 "correct {:.3f} ({:.0f}s)",
                 epoch, pred_sum / batches, gen_sum / batches, m.f1,
                 m.address.perfect, m.address.correct, Seconds(t0));
    result.history.push_back(record);
    AppendJsonl(paths.metrics, record);

    if (score > best_score) {
      best_score = score;
      result.best_epoch = epoch;
      result.best = m;
      best_state = Snapshot(agent.net());
      stale = 0;
      if (!paths.best.empty()) {
        CheckpointInfo info{mc, vocab.Hash(), "supervised", config.seed, epoch,
                            record};
        SaveCheckpoint(paths.best, agent, info);
      }
    } else {
      ++stale;
    }
    if (!paths.last.empty()) {
      nlohmann::json metrics = record;
      metrics["best_score"] = best_score;
      metrics["best_epoch"] = result.best_epoch;
      CheckpointInfo info{mc, vocab.Hash(), "supervised", config.seed, epoch,
                          metrics};
      SaveCheckpoint(paths.last, agent, info);
      torch::serialize::OutputArchive archive;
      opt.save(archive);
      archive.save_to(OptimizerPath(paths.last).string());
    }
    if (config.patience > 0 && stale >= config.patience) break;
    if (OutOfTime(run_start, Seconds(t0), config.max_minutes)) {
      spdlog::info("supervised time budget reached after epoch {}", epoch);
      break;
    }
  }
  Restore(agent.net(), best_state);
  agent.net().eval();
  return result;
}

// ---------------------------------------------------------------------------
// Episodes.

std::vector<Episode> MakeEpisodes(std::span<const GameInstance> games,
                                  uint64_t seed, std::string_view tag) {
  std::vector<Episode> out(games.size());
  for (size_t i = 0; i < games.size(); ++i) {
    out[i].scene = games[i].scene;
    out[i].goal_id = games[i].goal_id;
    out[i].rng = StreamFor(seed, std::string(tag) + "|" +
                                     games[i].scene->scene_id + "|" +
                                     std::to_string(games[i].goal_id) + "|" +
                                     std::to_string(i));
  }
  return out;
}

void Rollout(Agent& agent, std::span<Episode> episodes,
             const RolloutOptions& options) {
  if (!options.space) throw std::invalid_argument("rollout needs a space");
  const int horizon = agent.config().max_questions;
  if (options.reward.max_questions != horizon) {
    throw std::invalid_argument("reward T differs from the agent's T");
  }
  for (size_t start = 0; start < episodes.size(); start += options.batch_size) {
    auto chunk = episodes.subspan(
        start, std::min<size_t>(options.batch_size, episodes.size() - start));
    for (int t = 1; t <= horizon; ++t) {
      std::vector<Episode*> live;
      for (auto& e : chunk) {
        if (!e.done) live.push_back(&e);
      }
      if (live.empty()) break;
      auto decisions = agent.Decide(live, options.mode);
      for (size_t i = 0; i < live.size(); ++i) {
        Episode& e = *live[i];
        Decision& d = decisions[i];
        e.step = t;
        if (options.force_stop && t == horizon) d.submit = true;
        if (d.submit) {
          e.submitted = true;
          e.prediction = d.prediction;
          e.reward = Reward(true, d.prediction == e.goal_id, t, options.reward);
          e.done = true;
        } else {
          auto ast = TryParse(d.question, *options.space, options.grammar);
          Answer answer = AnswerQuestion(ast, GameInstance{e.scene, e.goal_id});
          e.turns.push_back(
              {JoinTokens(d.question), answer, d.group_vector, d.prob});
          e.questions.push_back(d.question);
          e.asts.push_back(ast);
          e.answers.push_back(answer);
          if (t == horizon) {
            e.reward = 0.0;
            e.done = true;
          }
        }
        e.decisions.push_back(std::move(d));
      }
    }
  }
}

Transcript ToTranscript(const Episode& episode) {
  Transcript t;
  t.scene_id = episode.scene->scene_id;
  t.goal_id = episode.goal_id;
  t.turns = episode.turns;
  t.prediction = episode.prediction;
  t.reward = episode.reward;
  return t;
}

// ---------------------------------------------------------------------------
// Reinforcement.

std::vector<double> StepRewards(const Episode& episode) {
  std::vector<double> r(episode.decisions.size(), 0.0);
  if (!r.empty()) r.back() = episode.reward;
  return r;
}

torch::Tensor ReinforceLoss(Agent& agent, std::span<const Episode> episodes,
                            double gamma, double baseline) {
  std::vector<const Decision*> decisions;
  std::vector<double> advantages;
  for (const auto& e : episodes) {
    auto rewards = StepRewards(e);
    auto g = Returns(rewards, gamma);
    for (size_t t = 0; t < e.decisions.size(); ++t) {
      decisions.push_back(&e.decisions[t]);
      advantages.push_back(g[t] - baseline);
    }
  }
  if (decisions.empty()) throw std::invalid_argument("no decisions to replay");
  auto logp = agent.LogProbs(decisions);
  auto adv = torch::tensor(advantages, torch::kDouble).to(logp.scalar_type());
  return -(logp * adv).sum() / static_cast<double>(episodes.size());
}

void ReturnBaseline::Update(double mean_return) {
  if (!initialized_) {
    value_ = mean_return;
    initialized_ = true;
  } else {
    value_ = momentum_ * value_ + (1.0 - momentum_) * mean_return;
  }
}

void RlConfig::Validate() const {
  if (epochs < 1 || batch_size < 1 || val_games_per_scene < 1 ||
      max_minutes < 0.0) {
    throw std::invalid_argument("reinforce config: counts out of range");
  }
  if (!(lr > 0.0) || baseline_momentum < 0.0 || baseline_momentum >= 1.0) {
    throw std::invalid_argument("reinforce config: bad optimizer settings");
  }
  reward.Validate();
}

nlohmann::json RlConfig::ToJson() const {
  return {{"epochs", epochs},
          {"batch_size", batch_size},
          {"lr", lr},
          {"baseline_momentum", baseline_momentum},
          {"reward", reward.ToJson()},
          {"val_games_per_scene", val_games_per_scene},
          {"seed", seed},
          {"max_minutes", max_minutes}};
}

RlConfig RlConfig::FromJson(const nlohmann::json& j) {
  RlConfig c;
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.lr = j.value("lr", c.lr);
  c.baseline_momentum = j.value("baseline_momentum", c.baseline_momentum);
  if (j.contains("reward")) c.reward = RewardConfig::FromJson(j.at("reward"));
  c.val_games_per_scene = j.value("val_games_per_scene", c.val_games_per_scene);
  c.seed = j.value("seed", c.seed);
  c.max_minutes = j.value("max_minutes", c.max_minutes);
  c.Validate();
  return c;
}

RlResult RunReinforce(Agent& agent, const Dataset& dataset,
                      const RlConfig& config, const TrainPaths& paths) {
  config.Validate();
  const ModelConfig& mc = agent.config();
  Vocabulary vocab = Vocabulary::Build(dataset.config.space);
  RolloutOptions train_opts{PolicyMode::kSample, false, config.reward,
                            &dataset.config.space, dataset.config.grammar, 64};
  RolloutOptions val_opts = train_opts;
  val_opts.mode = PolicyMode::kGreedy;

  std::vector<GameInstance> val_games;
  for (const auto& scene : dataset.val) {
    Rng rng = StreamFor(config.seed, "rl_val|" + scene.scene_id);
    std::vector<int> goals(scene.size());
    std::iota(goals.begin(), goals.end(), 0);
    std::shuffle(goals.begin(), goals.end(), rng);
    for (int g = 0; g < std::min<int>(config.val_games_per_scene, scene.size()); ++g) {
      val_games.push_back({&scene, goals[g]});
    }
  }

  agent.net().eval();
  agent.SetInferenceCache(true);
  torch::optim::Adam opt(agent.PolicyParameters(),
                         torch::optim::AdamOptions(config.lr));
  ReturnBaseline baseline(config.baseline_momentum);
  RlResult result;
  result.best_success = -1.0;
  std::vector<torch::Tensor> best_state = Snapshot(agent.net());
  int start_epoch = 1;
  if (paths.resume && !paths.last.empty() &&
      std::filesystem::exists(paths.last.string() + ".json")) {
    CheckpointInfo info = ReadCheckpointInfo(paths.last);
    torch::serialize::InputArchive weights, optim;
    weights.load_from(paths.last.string() + ".pt");
    agent.net().load(weights);
    optim.load_from(OptimizerPath(paths.last).string());
    opt.load(optim);
    start_epoch = info.epoch + 1;
    baseline.Update(info.metrics.value("baseline", 0.0));
    result.best_success = info.metrics.value("best_success", -1.0);
    result.best_epoch = info.metrics.value("best_epoch", 0);
    if (!paths.best.empty() && result.best_epoch > 0) {
      auto best = LoadAgent(paths.best, vocab);
      best_state = Snapshot(best->net());
    }
    agent.SetInferenceCache(true);
    spdlog::info("resuming reinforcement at epoch {}", start_epoch);
  }

  const auto run_start = std::chrono::steady_clock::now();
  for (int epoch = start_epoch; epoch <= config.epochs; ++epoch) {
    auto t0 = std::chrono::steady_clock::now();
    Rng rng = StreamFor(config.seed, "rl_epoch_" + std::to_string(epoch));
    std::vector<GameInstance> games;
    for (const auto& scene : dataset.train) {
      auto goals = TrainingGoals(scene);
      std::uniform_int_distribution<size_t> pick(0, goals.size() - 1);
      games.push_back({&scene, goals[pick(rng)]});
    }
    std::shuffle(games.begin(), games.end(), rng);
    double reward_sum = 0.0;
    int successes = 0;
    for (size_t start = 0; start < games.size(); start += config.batch_size) {
      std::span<const GameInstance> chunk(
          games.data() + start,
          std::min<size_t>(config.batch_size, games.size() - start));
      auto episodes = MakeEpisodes(
          chunk, config.seed,
          "rl|" + std::to_string(epoch) + "|" + std::to_string(start));
      Rollout(agent, episodes, train_opts);
      auto loss = ReinforceLoss(agent, episodes, config.reward.gamma,
                                baseline.value());
      if (!std::isfinite(loss.item<double>())) {
        throw std::runtime_error("policy loss diverged at epoch " +
                                 std::to_string(epoch));
      }
      opt.zero_grad();
      loss.backward();
      opt.step();
      double return_sum = 0.0;
      int steps = 0;
      for (const auto& e : episodes) {
        reward_sum += e.reward;
        successes += e.prediction && *e.prediction == e.goal_id;
        for (double g : Returns(StepRewards(e), config.reward.gamma)) {
          return_sum += g;
          ++steps;
        }
      }
      baseline.Update(return_sum / std::max(1, steps));
    }

    auto val_eps = MakeEpisodes(val_games, config.seed, "rl_val");
    Rollout(agent, val_eps, val_opts);
    std::vector<Transcript> ts;
    for (const auto& e : val_eps) ts.push_back(ToTranscript(e));
    double val_success = TaskSuccess(ts);
    nlohmann::json record = {
        {"stage", "reinforce"},
        {"epoch", epoch},
        {"train_reward", reward_sum / games.size()},
        {"train_success", double(successes) / games.size()},
        {"val_success", val_success},
        {"val_mean_questions", MeanQuestions(ts)},
        {"baseline", baseline.value()},
        {"seconds", Seconds(t0)}};
    spdlog::info("rl epoch {}: reward {:.3f} val success {:.3f} ({:.0f}s)",
                 epoch, reward_sum / games.size(), val_success, Seconds(t0));
    result.history.push_back(record);
    AppendJsonl(paths.metrics, record);
    if (val_success > result.best_success) {
      result.best_success = val_success;
      result.best_epoch = epoch;
      best_state = Snapshot(agent.net());
      if (!paths.best.empty()) {
        SaveCheckpoint(paths.best, agent,
                       {mc, vocab.Hash(), "reinforce", config.seed, epoch,
                        record});
      }
    }
    if (!paths.last.empty()) {
      nlohmann::json metrics = record;
      metrics["best_success"] = result.best_success;
      metrics["best_epoch"] = result.best_epoch;
      SaveCheckpoint(paths.last, agent,
                     {mc, vocab.Hash(), "reinforce", config.seed, epoch,
                      metrics});
      torch::serialize::OutputArchive archive;
      opt.save(archive);
      archive.save_to(OptimizerPath(paths.last).string());
    }
    if (OutOfTime(run_start, Seconds(t0), config.max_minutes)) {
      spdlog::info("reinforcement time budget reached after epoch {}", epoch);
      break;
    }
  }
  Restore(agent.net(), best_state);
  agent.SetInferenceCache(false);
  return result;
}

double Spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw std::invalid_argument("rank correlation needs two equal series");
  }
  auto ranks = [](std::span<const double> v) {
    std::vector<size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](size_t x, size_t y) { return v[x] < v[y]; });
    std::vector<double> r(v.size());
    for (size_t i = 0; i < idx.size();) {
      size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      double avg = (i + j) / 2.0 + 1.0;
      for (size_t m = i; m <= j; ++m) r[idx[m]] = avg;
      i = j + 1;
    }
    return r;
  };
  auto ra = ranks(a), rb = ranks(b);
  double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / ra.size();
  double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / rb.size();
  double num = 0.0, da = 0.0, db = 0.0;
  for (size_t i = 0; i < ra.size(); ++i) {
    num += (ra[i] - ma) * (rb[i] - mb);
    da += (ra[i] - ma) * (ra[i] - ma);
    db += (rb[i] - mb) * (rb[i] - mb);
  }
  return (da == 0.0 || db == 0.0) ? 0.0 : num / std::sqrt(da * db);
}

}  // namespace goalq
