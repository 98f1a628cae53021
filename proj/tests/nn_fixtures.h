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

#ifndef GOALQ_TESTS_NN_FIXTURES_H_
#define GOALQ_TESTS_NN_FIXTURES_H_

#include "goalq/dataset.h"
#include "goalq/language.h"
#include "goalq/model_config.h"

namespace goalq::testing {

// Small enough for finite differences and quick rollouts.
inline ModelConfig TinyConfig(Variant variant = Variant::kUniqer) {
  ModelConfig c;
  c.d_model = 16;
  c.n_head = 2;
  c.dim_feedforward = 32;
  c.n_layers = 1;
  c.dropout = 0.0;
  c.d_v = 12;
  c.otm_hidden = 8;
  c.k = 3;
  c.n_max = 6;
  c.max_decode_len = MaxQuestionLength(AttributeSpace::Ask3());
  c.variant = variant;
  c.seed = 3;
  return c;
}

inline const Dataset& TinyDataset() {
  static const Dataset data = [] {
    DatasetConfig c = DatasetConfig::ForName("ask3");
    c.n_train = 8;
    c.n_val = 4;
    c.n_test = 4;
    c.max_objects = 6;
    c.seed = 21;
    return GenerateDataset(c);
  }();
  return data;
}

}  // namespace goalq::testing

#endif  // GOALQ_TESTS_NN_FIXTURES_H_
