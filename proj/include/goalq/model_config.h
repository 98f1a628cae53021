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

#ifndef GOALQ_MODEL_CONFIG_H_
#define GOALQ_MODEL_CONFIG_H_

#include <cstdint>
#include <string>
#include <string_view>

#include "json.hpp"

namespace goalq {

enum class Variant {
  kUniqer,
  kVanilla,
  kNotUnifiedMlpGuesser,
  kNotUnified,
  kBaseline,
};

std::string_view VariantName(Variant variant);
// Throws std::invalid_argument naming the unknown variant.
Variant ParseVariant(std::string_view name);

struct ModelConfig {
  int d_model = 128;
  int n_head = 4;
  int dim_feedforward = 256;
  int n_layers = 2;
  double dropout = 0.1;
  int k = 3;
  int n_max = 10;
  int max_questions = 5;  // T
  // Tokens per generated question, [EOS] included.
  int max_decode_len = 12;
  int d_v = 32;
  // Width of each of the three OTM input maps and of the GRU state.
  int otm_hidden = 64;
  Variant variant = Variant::kUniqer;
  std::string space = "ask3";
  uint64_t feature_seed = 1234;
  uint64_t seed = 1;

  // Dialogue tokens the encoder must accept: T turns of question words
  // plus an answer.
  int max_dialogue_tokens() const { return max_questions * (max_decode_len + 1); }

  // Throws std::invalid_argument.
  void Validate() const;
  nlohmann::json ToJson() const;
  static ModelConfig FromJson(const nlohmann::json& j);

  static ModelConfig FullScale();
};

}  // namespace goalq

#endif  // GOALQ_MODEL_CONFIG_H_
