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

// goalq command line: dataset generation, training, evaluation and play.

#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "goalq/agent.h"
#include "goalq/dataset.h"
#include "goalq/evaluation.h"
#include "goalq/training.h"

namespace fs = std::filesystem;
using namespace goalq;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

fs::path DefaultHome() {
  if (const char* env = std::getenv("GOALQ_HOME"); env && *env) return env;
  return "goalq_out";
}

nlohmann::json ReadJson(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config " + path);
  return nlohmann::json::parse(in);
}

void WriteJsonAtomic(const fs::path& path, const nlohmann::json& j) {
  fs::create_directories(path.parent_path());
  fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    out << j.dump(2) << "\n";
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

struct Common {
  std::string home;
  std::string dataset = "ask3";
  std::string data_dir;
  std::string run;
  uint64_t seed = 1;

  fs::path Home() const { return home.empty() ? DefaultHome() : fs::path(home); }
  fs::path DataDir() const {
    return data_dir.empty() ? Home() / "data" / dataset : fs::path(data_dir);
  }
  fs::path CheckpointDir() const { return Home() / "checkpoints" / run; }
  fs::path MetricsDir() const { return Home() / "metrics"; }
  fs::path TranscriptDir() const { return Home() / "transcripts"; }
};

// Picks the newest stage available for a run unless a stem is given.
fs::path ResolveCheckpoint(const Common& c, const std::string& explicit_stem) {
  if (!explicit_stem.empty()) return explicit_stem;
  fs::path rl = c.CheckpointDir() / "rl_best";
  if (fs::exists(rl.string() + ".json")) return rl;
  fs::path sl = c.CheckpointDir() / "sl_best";
  if (fs::exists(sl.string() + ".json")) return sl;
  throw std::runtime_error("missing checkpoint " + sl.string() + ".json");
}

void AddCommon(CLI::App* cmd, Common& c, bool with_run) {
  cmd->add_option("--home", c.home,
                  "output root (default $GOALQ_HOME or ./goalq_out)");
  cmd->add_option("--dataset", c.dataset, "dataset name")
      ->check(CLI::IsMember({"ask3", "ask4"}));
  cmd->add_option("--data", c.data_dir, "dataset directory");
  cmd->add_option("--seed", c.seed, "random seed");
  if (with_run) cmd->add_option("--run", c.run, "run name");
}

int Play(Agent& agent, const Dataset& dataset, EvalSplit split, EvalMode mode,
         int n, uint64_t seed) {
  auto games = EvalGames(dataset, split, 1, seed);
  Rng rng = StreamFor(seed, "play");
  std::shuffle(games.begin(), games.end(), rng);
  games.resize(std::min<size_t>(games.size(), n));
  auto episodes = MakeEpisodes(games, seed, "play");
  RolloutOptions options;
  options.mode = (mode == EvalMode::kRandomOtm || mode == EvalMode::kRandomForceStop)
                     ? PolicyMode::kRandom
                     : PolicyMode::kGreedy;
  options.force_stop =
      mode == EvalMode::kForceStop || mode == EvalMode::kRandomForceStop;
  options.space = &dataset.config.space;
  options.grammar = dataset.config.grammar;
  agent.net().eval();
  Rollout(agent, episodes, options);
  for (const auto& e : episodes) {
    const Scene& s = *e.scene;
    std::cout << "# scene " << s.scene_id << ", goal " << e.goal_id << "\n";
    for (const auto& o : s.objects) {
      std::cout << "#   " << o.id << ": " << o.size << " " << o.color << " "
                << o.material << " " << o.shape << "\n";
    }
    for (size_t t = 0; t < e.turns.size(); ++t) {
      const auto& turn = e.turns[t];
      std::cout << "# " << t + 1 << ". " << turn.question << " -> "
                << (turn.answer == Answer::kYes ? "yes" : "no") << "\n";
      if (!turn.group_vector.empty()) {
        std::cout << "#    groups";
        for (int i = 0; i < s.size(); ++i) std::cout << " " << turn.group_vector[i];
        std::cout << "\n";
      }
      std::vector<int> order(turn.prob.size());
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(),
                [&](int a, int b) { return turn.prob[a] > turn.prob[b]; });
      std::cout << "#    top P";
      for (size_t i = 0; i < std::min<size_t>(3, order.size()); ++i) {
        std::cout << " " << order[i] << ":" << fmt::format("{:.3f}", turn.prob[order[i]]);
      }
      std::cout << "\n";
    }
    if (e.prediction) {
      std::cout << "# prediction " << *e.prediction
                << (*e.prediction == e.goal_id ? " (correct)" : " (wrong)")
                << ", reward " << e.reward << "\n";
    } else {
      std::cout << "# no submission\n";
    }
    std::cout << ToTranscript(e).ToJson().dump() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"goal-oriented question asking agents"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level)
      ->check(CLI::IsMember({"debug", "info", "warn", "error"}));

  // gen-data
  Common gen;
  int n_train = -1, n_val = -1, n_test = -1;
  auto* cmd_gen = app.add_subcommand("gen-data", "generate a scene dataset");
  AddCommon(cmd_gen, gen, false);
  cmd_gen->add_option("--n-train", n_train);
  cmd_gen->add_option("--n-val", n_val);
  cmd_gen->add_option("--n-test", n_test);
  bool no_relations = false;
  cmd_gen->add_flag("--no-relations", no_relations,
                    "attribute questions only");

  // train-sl
  Common sl;
  std::string variant = "uniqer", model_config, sl_config;
  int sl_epochs = -1;
  bool sl_resume = false;
  auto* cmd_sl = app.add_subcommand("train-sl", "supervised training");
  AddCommon(cmd_sl, sl, true);
  cmd_sl->add_option("--variant", variant)
      ->check(CLI::IsMember({"uniqer", "vanilla", "not_unified",
                             "not_unified_mlp_guesser", "baseline"}));
  cmd_sl->add_option("--model-config", model_config, "model config JSON");
  cmd_sl->add_option("--config", sl_config, "training config JSON");
  cmd_sl->add_option("--epochs", sl_epochs);
  cmd_sl->add_flag("--resume", sl_resume);

  // train-rl
  Common rl;
  std::string rl_config;
  int rl_epochs = -1;
  bool rl_resume = false;
  auto* cmd_rl = app.add_subcommand("train-rl", "policy-gradient training");
  AddCommon(cmd_rl, rl, true);
  cmd_rl->add_option("--config", rl_config, "training config JSON");
  cmd_rl->add_option("--epochs", rl_epochs);
  cmd_rl->add_flag("--resume", rl_resume);
  cmd_rl->get_option("--run")->required();

  // eval
  Common ev;
  std::string ev_ckpt, ev_mode = "standard", ev_out;
  std::vector<std::string> ev_splits;
  std::vector<uint64_t> ev_seeds;
  int ev_goals = 2;
  auto* cmd_eval = app.add_subcommand("eval", "evaluate a checkpoint");
  AddCommon(cmd_eval, ev, true);
  cmd_eval->add_option("--checkpoint", ev_ckpt, "checkpoint stem");
  cmd_eval->add_option("--mode", ev_mode)
      ->check(CLI::IsMember(
          {"standard", "force_stop", "random_otm", "random_force_stop"}));
  cmd_eval->add_option("--split", ev_splits)
      ->check(CLI::IsMember({"new_image", "new_object"}));
  cmd_eval->add_option("--seeds", ev_seeds);
  cmd_eval->add_option("--goals-per-scene", ev_goals);
  cmd_eval->add_option("--out", ev_out, "report path");

  // play
  Common pl;
  std::string pl_ckpt, pl_mode = "standard", pl_split = "new_image";
  int pl_n = 2;
  auto* cmd_play = app.add_subcommand("play", "print sample dialogues");
  AddCommon(cmd_play, pl, true);
  cmd_play->add_option("--checkpoint", pl_ckpt, "checkpoint stem");
  cmd_play->add_option("--n", pl_n)->check(CLI::PositiveNumber);
  cmd_play->add_option("--mode", pl_mode)
      ->check(CLI::IsMember(
          {"standard", "force_stop", "random_otm", "random_force_stop"}));
  cmd_play->add_option("--split", pl_split)
      ->check(CLI::IsMember({"new_image", "new_object"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  spdlog::set_level(spdlog::level::from_str(log_level));
  spdlog::set_pattern("[%H:%M:%S] %v");
  torch::set_num_threads(1);

  try {
    if (*cmd_gen) {
      DatasetConfig config = DatasetConfig::ForName(gen.dataset);
      config.seed = gen.seed;
      if (n_train >= 0) config.n_train = n_train;
      if (n_val >= 0) config.n_val = n_val;
      if (n_test >= 0) config.n_test = n_test;
      if (no_relations) config.grammar.allow_relations = false;
      config.Validate();
      Dataset d = GenerateDataset(config);
      SaveDataset(d, gen.DataDir());
      spdlog::info("wrote {} / {} / {} scenes to {}", d.train.size(),
                   d.val.size(), d.test.size(), gen.DataDir().string());
      return 0;
    }
    if (*cmd_sl) {
      Dataset data = LoadDataset(sl.DataDir());
      ModelConfig mc;
      if (!model_config.empty()) mc = ModelConfig::FromJson(ReadJson(model_config));
      mc.variant = ParseVariant(variant);
      mc.space = data.config.name;
      mc.seed = sl.seed;
      mc.max_decode_len = std::max(
          mc.max_decode_len,
          MaxQuestionLength(data.config.space, data.config.grammar));
      mc.Validate();
      SupervisedConfig sc;
      if (!sl_config.empty()) sc = SupervisedConfig::FromJson(ReadJson(sl_config));
      sc.seed = sl.seed;
      if (sl_epochs > 0) sc.epochs = sl_epochs;
      if (sl.run.empty()) {
        sl.run = variant + "_" + data.config.name + "_s" + std::to_string(sl.seed);
      }
      auto agent = BuildAgent(mc, Vocabulary::Build(data.config.space));
      TrainPaths paths{sl.CheckpointDir() / "sl_best", sl.CheckpointDir() / "sl_last",
                       sl.MetricsDir() / (sl.run + "_sl.jsonl"), sl_resume};
      if (!sl_resume) fs::remove(paths.metrics);
      auto result = RunSupervised(*agent, data, sc, paths);
      spdlog::info("run {}: best epoch {}, f1 {:.3f}", sl.run, result.best_epoch,
                   result.best.f1);
      return 0;
    }
    if (*cmd_rl) {
      fs::path sl_stem = rl.CheckpointDir() / "sl_best";
      if (!fs::exists(sl_stem.string() + ".json")) {
        throw std::runtime_error("missing supervised checkpoint " +
                                 sl_stem.string() + ".json");
      }
      Dataset data = LoadDataset(rl.DataDir());
      auto agent = LoadAgent(sl_stem, Vocabulary::Build(data.config.space));
      if (agent->config().variant == Variant::kBaseline) {
        spdlog::info("baseline: the question generator is the policy");
      }
      RlConfig rc;
      if (!rl_config.empty()) rc = RlConfig::FromJson(ReadJson(rl_config));
      rc.seed = rl.seed;
      if (rl_epochs > 0) rc.epochs = rl_epochs;
      TrainPaths paths{rl.CheckpointDir() / "rl_best", rl.CheckpointDir() / "rl_last",
                       rl.MetricsDir() / (rl.run + "_rl.jsonl"), rl_resume};
      if (!rl_resume) fs::remove(paths.metrics);
      auto result = RunReinforce(*agent, data, rc, paths);
      spdlog::info("run {}: best epoch {}, success {:.3f}", rl.run,
                   result.best_epoch, result.best_success);
      return 0;
    }
    if (*cmd_eval) {
      if (ev.run.empty() && ev_ckpt.empty()) {
        throw UsageError("eval needs --run or --checkpoint");
      }
      Dataset data = LoadDataset(ev.DataDir());
      fs::path stem = ResolveCheckpoint(ev, ev_ckpt);
      auto agent = LoadAgent(stem, Vocabulary::Build(data.config.space));
      EvalConfig config;
      config.mode = ParseEvalMode(ev_mode);
      if (!ev_splits.empty()) {
        config.splits.clear();
        for (const auto& s : ev_splits) config.splits.push_back(ParseEvalSplit(s));
      }
      if (!ev_seeds.empty()) config.seeds = ev_seeds;
      config.goals_per_scene = ev_goals;
      auto result = Evaluate(*agent, data, config);
      std::string tag = ev.run.empty() ? stem.stem().string() : ev.run;
      for (const auto& [split, per_seed] : result.transcripts) {
        for (size_t i = 0; i < per_seed.size(); ++i) {
          fs::create_directories(ev.TranscriptDir());
          SaveTranscripts(per_seed[i],
                          (ev.TranscriptDir() /
                           (tag + "_" + ev_mode + "_" + split + "_s" +
                            std::to_string(config.seeds[i]) + ".jsonl"))
                              .string());
        }
      }
      fs::path out = ev_out.empty()
                         ? ev.MetricsDir() / (tag + "_eval_" + ev_mode + ".json")
                         : fs::path(ev_out);
      nlohmann::json report = result.report.ToJson();
      report["checkpoint"] = stem.string();
      WriteJsonAtomic(out, report);
      for (const auto& [split, r] : result.report.splits) {
        spdlog::info("{}: success {:.3f} ± {:.3f}, questions {:.2f}, f1 {:.3f}, "
                     "perfect {:.3f}, correct {:.3f}, n_vocab {:.2f}",
                     split, r.mean.task_success, r.std.task_success,
                     r.mean.mean_questions, r.mean.f1, r.mean.perfect,
                     r.mean.correct, r.mean.n_vocab);
      }
      std::cout << out.string() << "\n";
      return 0;
    }
    if (*cmd_play) {
      if (pl.run.empty() && pl_ckpt.empty()) {
        throw UsageError("play needs --run or --checkpoint");
      }
      Dataset data = LoadDataset(pl.DataDir());
      auto agent =
          LoadAgent(ResolveCheckpoint(pl, pl_ckpt), Vocabulary::Build(data.config.space));
      return Play(*agent, data, ParseEvalSplit(pl_split), ParseEvalMode(pl_mode),
                  pl_n, pl.seed);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
