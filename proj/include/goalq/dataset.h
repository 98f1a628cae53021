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

#ifndef GOALQ_DATASET_H_
#define GOALQ_DATASET_H_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "goalq/language.h"
#include "goalq/oracle.h"
#include "goalq/scene.h"
#include "json.hpp"

namespace goalq {

struct DatasetConfig {
  std::string name = "ask3";
  AttributeSpace space = AttributeSpace::Ask3();
  GrammarOptions grammar;
  int n_train = 200;
  int n_val = 50;
  int n_test = 50;
  int min_objects = kMinObjects;
  int max_objects = kMaxObjects;
  // Chance that a newly placed object copies an existing attribute tuple.
  double duplicate_pressure = 0.25;
  uint64_t seed = 7;
  // Ground-plane distance below which a placement is rejected.
  double min_object_distance = 0.5;
  int width = 480;
  int height = 320;
  int questions_per_scene = 10;
  int max_resamples = 100;

  // Desk-scale defaults for "ask3" / "ask4"; anything else throws.
  static DatasetConfig ForName(const std::string& name);
  void Validate() const;
  nlohmann::json ToJson() const;
  static DatasetConfig FromJson(const nlohmann::json& j);
};

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Places objects uniformly on the ground plane and projects them to pixel
// boxes; the scene id and split are left to the caller.
Scene GenerateScene(const DatasetConfig& config, Rng& rng);

// Fills scene.gt_questions with goal-independent informative questions over
// all objects. Throws NoInformativeQuestion.
void AttachGtQuestions(Scene& scene, const QuestionBank& bank, int count,
                       Rng& rng);

struct Dataset {
  DatasetConfig config;
  std::vector<Scene> train;
  std::vector<Scene> val;
  std::vector<Scene> test;
  // Scenes thrown away because no informative question existed.
  int resampled = 0;

  const std::vector<Scene>& split(Split s) const;
};

Dataset GenerateDataset(const DatasetConfig& config);

// Writes train/val/test.jsonl and manifest.json into `dir`.
void SaveDataset(const Dataset& dataset, const std::filesystem::path& dir);
Dataset LoadDataset(const std::filesystem::path& dir);

// Counts and per-attribute histograms, as stored in manifest.json.
nlohmann::json DatasetManifest(const Dataset& dataset);

}  // namespace goalq

#endif  // GOALQ_DATASET_H_
