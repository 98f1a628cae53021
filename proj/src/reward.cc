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

#include "goalq/reward.h"

#include <stdexcept>

namespace goalq {

void RewardConfig::Validate() const {
  if (beta < 0.0) throw std::invalid_argument("beta must be non-negative");
  if (max_questions < 1) throw std::invalid_argument("T must be at least 1");
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("gamma must lie in (0, 1]");
  }
}

nlohmann::json RewardConfig::ToJson() const {
  return {{"beta", beta}, {"T", max_questions}, {"gamma", gamma}};
}

RewardConfig RewardConfig::FromJson(const nlohmann::json& j) {
  RewardConfig c;
  c.beta = j.value("beta", c.beta);
  c.max_questions = j.value("T", c.max_questions);
  c.gamma = j.value("gamma", c.gamma);
  c.Validate();
  return c;
}

double TurnDiscount(int t, const RewardConfig& config) {
  return config.beta * t / config.max_questions;
}

double Reward(bool submitted, bool correct, int t, const RewardConfig& config) {
  if (t < 1) throw std::invalid_argument("step index starts at 1");
  if (!submitted || !correct || t == 1 || t > config.max_questions) return 0.0;
  return 1.0 - TurnDiscount(t, config);
}

std::vector<double> Returns(std::span<const double> rewards, double gamma) {
  std::vector<double> g(rewards.size());
  double acc = 0.0;
  for (size_t i = rewards.size(); i-- > 0;) {
    acc = rewards[i] + gamma * acc;
    g[i] = acc;
  }
  return g;
}

}  // namespace goalq
