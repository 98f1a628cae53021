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

#include "goalq/model_config.h"

#include <stdexcept>

#include "goalq/scene.h"

namespace goalq {

namespace {

constexpr std::pair<Variant, std::string_view> kVariantNames[] = {
    {Variant::kUniqer, "uniqer"},
    {Variant::kVanilla, "vanilla"},
    {Variant::kNotUnifiedMlpGuesser, "not_unified_mlp_guesser"},
    {Variant::kNotUnified, "not_unified"},
    {Variant::kBaseline, "baseline"},
};

}  // namespace

std::string_view VariantName(Variant variant) {
  for (const auto& [v, name] : kVariantNames) {
    if (v == variant) return name;
  }
  return "?";
}

Variant ParseVariant(std::string_view name) {
  for (const auto& [v, n] : kVariantNames) {
    if (n == name) return v;
  }
  throw std::invalid_argument("unknown variant '" + std::string(name) + "'");
}

void ModelConfig::Validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("model config: ") + what);
  };
  require(d_model > 0 && n_head > 0 && d_model % n_head == 0,
          "d_model must be a positive multiple of n_head");
  require(dim_feedforward > 0 && n_layers > 0, "layer sizes must be positive");
  require(dropout >= 0.0 && dropout < 1.0, "dropout must lie in [0, 1)");
  require(k >= 2, "k must be at least 2");
  require(n_max >= k, "n_max must be at least k");
  require(n_max <= kMaxObjects, "n_max exceeds the scene object limit");
  require(max_questions >= 1, "T must be at least 1");
  require(max_decode_len >= 2, "max_decode_len must be at least 2");
  require(d_v > 0 && otm_hidden > 0, "feature widths must be positive");
  AttributeSpace::ByName(space);
}

nlohmann::json ModelConfig::ToJson() const {
  return {{"d_model", d_model},
          {"n_head", n_head},
          {"dim_feedforward", dim_feedforward},
          {"n_layers", n_layers},
          {"dropout", dropout},
          {"k", k},
          {"N_max", n_max},
          {"T", max_questions},
          {"max_decode_len", max_decode_len},
          {"d_v", d_v},
          {"otm_hidden", otm_hidden},
          {"variant", std::string(VariantName(variant))},
          {"space", space},
          {"feature_seed", feature_seed},
          {"seed", seed}};
}

ModelConfig ModelConfig::FromJson(const nlohmann::json& j) {
  ModelConfig c;
  c.d_model = j.value("d_model", c.d_model);
  c.n_head = j.value("n_head", c.n_head);
  c.dim_feedforward = j.value("dim_feedforward", c.dim_feedforward);
  c.n_layers = j.value("n_layers", c.n_layers);
  c.dropout = j.value("dropout", c.dropout);
  c.k = j.value("k", c.k);
  c.n_max = j.value("N_max", c.n_max);
  c.max_questions = j.value("T", c.max_questions);
  c.max_decode_len = j.value("max_decode_len", c.max_decode_len);
  c.d_v = j.value("d_v", c.d_v);
  c.otm_hidden = j.value("otm_hidden", c.otm_hidden);
  if (j.contains("variant")) {
    c.variant = ParseVariant(j.at("variant").get<std::string>());
  }
  c.space = j.value("space", c.space);
  c.feature_seed = j.value("feature_seed", c.feature_seed);
  c.seed = j.value("seed", c.seed);
  c.Validate();
  return c;
}

ModelConfig ModelConfig::FullScale() {
  ModelConfig c;
  c.d_model = 512;
  c.n_head = 8;
  c.dim_feedforward = 512;
  c.n_layers = 3;
  c.dropout = 0.1;
  return c;
}

}  // namespace goalq
