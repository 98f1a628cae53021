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

#ifndef GOALQ_REWARD_H_
#define GOALQ_REWARD_H_

#include <span>
#include <vector>

#include "json.hpp"

namespace goalq {

struct RewardConfig {
  double beta = 0.2;
  int max_questions = 5;  // T
  double gamma = 1.0;

  void Validate() const;
  nlohmann::json ToJson() const;
  static RewardConfig FromJson(const nlohmann::json& j);
};

// Turn discount beta * t / T.
double TurnDiscount(int t, const RewardConfig& config);

// Terminal reward for a submission at step t (t - 1 questions asked).
// Submitting at the first step, or never (pass submitted = false), gives 0.
double Reward(bool submitted, bool correct, int t, const RewardConfig& config);

// G(t) = sum_{t' >= t} gamma^(t' - t) R_{t'+1}, for rewards R_2..R_{n+1}.
std::vector<double> Returns(std::span<const double> rewards, double gamma);

}  // namespace goalq

#endif  // GOALQ_REWARD_H_
