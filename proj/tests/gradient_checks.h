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

#ifndef GOALQ_TESTS_GRADIENT_CHECKS_H_
#define GOALQ_TESTS_GRADIENT_CHECKS_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "goalq/losses.h"
#include "goalq/model.h"
#include "goalq/training.h"
#include "nn_fixtures.h"

namespace goalq::testing {

// Largest relative error between the stored gradients and central
// differences of `loss` over `count` random entries with |grad| > floor.
inline double WorstRelativeError(std::vector<torch::Tensor> params,
                                 const std::function<torch::Tensor()>& loss,
                                 int count, double floor, uint64_t seed) {
  std::vector<std::pair<torch::Tensor, int64_t>> entries;
  for (auto& p : params) {
    if (!p.grad().defined()) continue;
    auto flat = p.grad().reshape({-1});
    for (int64_t j = 0; j < flat.numel(); ++j) {
      if (std::abs(flat[j].item<double>()) > floor) entries.push_back({p, j});
    }
  }
  if (entries.size() < static_cast<size_t>(count)) {
    throw std::runtime_error("too few parameters with a usable gradient");
  }
  Rng rng(seed);
  std::shuffle(entries.begin(), entries.end(), rng);
  torch::NoGradGuard no_grad;
  double worst = 0.0;
  for (int c = 0; c < count; ++c) {
    auto [p, j] = entries[c];
    auto flat = p.view({-1});
    double analytic = p.grad().reshape({-1})[j].item<double>();
    double orig = flat[j].item<double>();
    const double eps = 1e-6;
    flat[j] = orig + eps;
    double up = loss().item<double>();
    flat[j] = orig - eps;
    double down = loss().item<double>();
    flat[j] = orig;
    double numeric = (up - down) / (2 * eps);
    worst = std::max(worst, std::abs(analytic - numeric) /
                                std::max(std::abs(analytic), std::abs(numeric)));
  }
  return worst;
}

// Total supervised loss of a double-precision tiny agent.
inline double SupervisedGradientError(int count = 20) {
  const Dataset& data = TinyDataset();
  auto config = TinyConfig();
  UniqerAgent agent(config, Vocabulary::Build(data.config.space));
  agent.net().to(torch::kDouble);
  agent.net().train();  // dropout is zero
  QuestionBank bank = QuestionBank::Build(data.config.space, data.config.grammar);
  Rng rng(11);
  std::vector<SlSample> samples;
  for (int i = 0; i < 3; ++i) {
    auto s = SamplesForGame(bank, data.train[i], 0, config, rng);
    samples.insert(samples.end(), s.begin(), s.end());
  }
  auto loss = [&] {
    auto l = agent.Losses(samples);
    return TotalSupervisedLoss(l.pred, l.gen, 1.0);
  };
  agent.net().zero_grad();
  loss().backward();
  return WorstRelativeError(agent.net().parameters(), loss, count, 1e-4, 11);
}

inline std::vector<Episode> ToyEpisodes(Agent& agent, const Dataset& data,
                                        int count, uint64_t seed) {
  std::vector<GameInstance> games;
  for (int i = 0; i < count; ++i) {
    const Scene& s = data.train[i % data.train.size()];
    games.push_back({&s, i % s.size()});
  }
  auto episodes = MakeEpisodes(games, seed, "toy");
  RolloutOptions opts;
  opts.mode = PolicyMode::kSample;
  opts.space = &data.config.space;
  opts.grammar = data.config.grammar;
  Rollout(agent, episodes, opts);
  return episodes;
}

// REINFORCE surrogate of sampled episodes under a k=2 targeting policy.
inline double PolicyGradientError(int count = 20) {
  const Dataset& data = TinyDataset();
  auto config = TinyConfig();
  config.k = 2;
  UniqerAgent agent(config, Vocabulary::Build(data.config.space));
  agent.net().to(torch::kDouble);
  agent.net().eval();
  auto episodes = ToyEpisodes(agent, data, 6, 5);
  auto loss = [&] { return ReinforceLoss(agent, episodes, 1.0, 0.3); };
  agent.net().zero_grad();
  loss().backward();
  return WorstRelativeError(agent.PolicyParameters(), loss, count, 1e-6, 3);
}

}  // namespace goalq::testing

#endif  // GOALQ_TESTS_GRADIENT_CHECKS_H_
