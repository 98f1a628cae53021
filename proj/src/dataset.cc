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

#include "goalq/dataset.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <spdlog/spdlog.h>

namespace goalq {
namespace {

using nlohmann::json;

constexpr double kPlaneExtent = 3.0;
constexpr double kMinAxisGap = 0.05;
constexpr int kPlacementAttempts = 100;
constexpr double kSmallestBox = 40.0;
constexpr double kLargestBox = 70.0;

// Box side length per size name; evenly spaced between the extremes, with
// the first listed size the largest.
double BoxSide(const AttributeSpace& space, const std::string& size) {
  int n = static_cast<int>(space.sizes.size());
  int i = space.IndexOf(Attribute::kSize, size);
  if (n == 1) return kLargestBox;
  return kLargestBox - (kLargestBox - kSmallestBox) * i / (n - 1);
}

BBox Project(const DatasetConfig& config, const Vec2& p, double side) {
  double margin = kLargestBox / 2 + 5.0;
  double sx = (config.width / 2.0 - margin) / kPlaneExtent;
  double sy = (config.height / 2.0 - margin) / kPlaneExtent;
  // Objects closer to the viewer (larger y) sit lower in the image.
  return {config.width / 2.0 + sx * p.x, config.height / 2.0 + sy * p.y, side,
          side};
}

double Round3(double v) { return std::round(v * 1000.0) / 1000.0; }

bool Placeable(const std::vector<SceneObject>& objects, const Vec2& p,
               double min_distance) {
  for (const auto& o : objects) {
    double dx = o.position.x - p.x;
    double dy = o.position.y - p.y;
    if (std::hypot(dx, dy) < min_distance || std::abs(dx) < kMinAxisGap ||
        std::abs(dy) < kMinAxisGap) {
      return false;
    }
  }
  return true;
}

std::string SceneId(const DatasetConfig& config, Split split, int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06d", index);
  return config.name + "_" + std::string(SplitName(split)) + "_" + buf;
}

json SpaceToJson(const AttributeSpace& space) {
  std::vector<std::string> active;
  for (Attribute a : space.active) active.emplace_back(AttributeName(a));
  return {{"shapes", space.shapes},       {"colors", space.colors},
          {"sizes", space.sizes},         {"materials", space.materials},
          {"active_attributes", active}};
}

AttributeSpace SpaceFromJson(const json& j) {
  AttributeSpace space;
  space.shapes = j.at("shapes").get<std::vector<std::string>>();
  space.colors = j.at("colors").get<std::vector<std::string>>();
  space.sizes = j.at("sizes").get<std::vector<std::string>>();
  space.materials = j.at("materials").get<std::vector<std::string>>();
  for (const auto& name : j.at("active_attributes")) {
    bool found = false;
    for (Attribute a : kAllAttributes) {
      if (AttributeName(a) == name.get<std::string>()) {
        space.active.push_back(a);
        found = true;
      }
    }
    if (!found) {
      throw std::invalid_argument("unknown attribute \"" +
                                  name.get<std::string>() + "\"");
    }
  }
  return space;
}

}  // namespace

DatasetConfig DatasetConfig::ForName(const std::string& name) {
  DatasetConfig config;
  config.name = name;
  config.space = AttributeSpace::ByName(name);
  return config;
}

void DatasetConfig::Validate() const {
  space.Validate();
  if (n_train < 1 || n_val < 1 || n_test < 1) {
    throw std::invalid_argument("dataset " + name + ": split counts must be >= 1");
  }
  if (min_objects < kMinObjects || max_objects > kMaxObjects ||
      min_objects > max_objects) {
    throw std::invalid_argument("dataset " + name +
                                ": object counts must satisfy 3 <= min <= max <= 10");
  }
  if (!(duplicate_pressure >= 0.0 && duplicate_pressure <= 1.0)) {
    throw std::invalid_argument("dataset " + name +
                                ": duplicate_pressure must lie in [0,1]");
  }
  if (!(min_object_distance >= 0.0)) {
    throw std::invalid_argument("dataset " + name +
                                ": min_object_distance must be >= 0");
  }
  if (questions_per_scene < 1) {
    throw std::invalid_argument("dataset " + name +
                                ": questions_per_scene must be >= 1");
  }
}

json DatasetConfig::ToJson() const {
  return {{"name", name},
          {"attribute_space", SpaceToJson(space)},
          {"allow_thing", grammar.allow_thing},
          {"allow_relations", grammar.allow_relations},
          {"n_train", n_train},
          {"n_val", n_val},
          {"n_test", n_test},
          {"min_objects", min_objects},
          {"max_objects", max_objects},
          {"duplicate_pressure", duplicate_pressure},
          {"seed", seed},
          {"min_object_distance", min_object_distance},
          {"image_size", {width, height}},
          {"questions_per_scene", questions_per_scene},
          {"max_resamples", max_resamples}};
}

DatasetConfig DatasetConfig::FromJson(const json& j) {
  DatasetConfig c = ForName(j.value("name", std::string("ask3")));
  if (j.contains("attribute_space")) c.space = SpaceFromJson(j["attribute_space"]);
  c.grammar.allow_thing = j.value("allow_thing", c.grammar.allow_thing);
  c.grammar.allow_relations = j.value("allow_relations", c.grammar.allow_relations);
  c.n_train = j.value("n_train", c.n_train);
  c.n_val = j.value("n_val", c.n_val);
  c.n_test = j.value("n_test", c.n_test);
  c.min_objects = j.value("min_objects", c.min_objects);
  c.max_objects = j.value("max_objects", c.max_objects);
  c.duplicate_pressure = j.value("duplicate_pressure", c.duplicate_pressure);
  c.seed = j.value("seed", c.seed);
  c.min_object_distance = j.value("min_object_distance", c.min_object_distance);
  if (j.contains("image_size")) {
    c.width = j["image_size"].at(0).get<int>();
    c.height = j["image_size"].at(1).get<int>();
  }
  c.questions_per_scene = j.value("questions_per_scene", c.questions_per_scene);
  c.max_resamples = j.value("max_resamples", c.max_resamples);
  c.Validate();
  return c;
}

Scene GenerateScene(const DatasetConfig& config, Rng& rng) {
  const AttributeSpace& space = config.space;
  std::uniform_int_distribution<int> count(config.min_objects,
                                           config.max_objects);
  std::uniform_real_distribution<double> coord(-kPlaneExtent, kPlaneExtent);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto pick = [&rng](const std::vector<std::string>& values) {
    std::uniform_int_distribution<size_t> d(0, values.size() - 1);
    return values[d(rng)];
  };

  Scene scene;
  scene.width = config.width;
  scene.height = config.height;
  int n = count(rng);
  for (int i = 0; i < n; ++i) {
    SceneObject o;
    o.id = i;
    if (i > 0 && unit(rng) < config.duplicate_pressure) {
      std::uniform_int_distribution<int> src(0, i - 1);
      const SceneObject& copy = scene.objects[src(rng)];
      o.shape = copy.shape;
      o.color = copy.color;
      o.size = copy.size;
      o.material = copy.material;
    } else {
      o.shape = pick(space.shapes);
      o.color = pick(space.colors);
      o.size = pick(space.sizes);
      o.material = pick(space.materials);
    }
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
      Vec2 p{Round3(coord(rng)), Round3(coord(rng))};
      if (Placeable(scene.objects, p, config.min_object_distance)) {
        o.position = p;
        placed = true;
      }
    }
    if (!placed) {
      throw GenerationError("dataset " + config.name + ": could not place object " +
                            std::to_string(i) + " of " + std::to_string(n) +
                            " after " + std::to_string(kPlacementAttempts) +
                            " attempts");
    }
    o.bbox = Project(config, o.position, BoxSide(space, o.size));
    scene.objects.push_back(std::move(o));
  }
  return scene;
}

void AttachGtQuestions(Scene& scene, const QuestionBank& bank, int count,
                       Rng& rng) {
  IdSet all = AllIds(scene);
  auto informative = InformativeQuestions(bank, scene, all);
  if (informative.empty()) {
    throw NoInformativeQuestion("scene " + scene.scene_id +
                                " admits no informative question");
  }
  std::shuffle(informative.begin(), informative.end(), rng);
  scene.gt_questions.clear();
  for (int i = 0; i < count; ++i) {
    const QuestionAst* ast = informative[i % informative.size()];
    scene.gt_questions.push_back(JoinTokens(Realize(*ast)));
  }
}

const std::vector<Scene>& Dataset::split(Split s) const {
  switch (s) {
    case Split::kTrain: return train;
    case Split::kVal: return val;
    case Split::kTest: return test;
  }
  return train;
}

Dataset GenerateDataset(const DatasetConfig& config) {
  config.Validate();
  QuestionBank bank = QuestionBank::Build(config.space, config.grammar);
  Dataset dataset;
  dataset.config = config;
  std::set<std::string> seen;
  auto fill = [&](Split split, int n, std::vector<Scene>& out) {
    for (int i = 0; i < n; ++i) {
      std::string id = SceneId(config, split, i);
      if (!seen.insert(id).second) {
        throw GenerationError("duplicate scene id " + id);
      }
      Rng rng = StreamFor(config.seed, id);
      for (int attempt = 0;; ++attempt) {
        Scene scene = GenerateScene(config, rng);
        scene.scene_id = id;
        scene.split = split;
        try {
          AttachGtQuestions(scene, bank, config.questions_per_scene, rng);
        } catch (const NoInformativeQuestion&) {
          ++dataset.resampled;
          spdlog::info("resampling {}: no informative question", id);
          if (attempt + 1 >= config.max_resamples) {
            throw GenerationError("dataset " + config.name + ": scene " + id +
                                  " still degenerate after " +
                                  std::to_string(config.max_resamples) +
                                  " resamples");
          }
          continue;
        }
        out.push_back(std::move(scene));
        break;
      }
    }
  };
  fill(Split::kTrain, config.n_train, dataset.train);
  fill(Split::kVal, config.n_val, dataset.val);
  fill(Split::kTest, config.n_test, dataset.test);
  return dataset;
}

json DatasetManifest(const Dataset& dataset) {
  json counts;
  json histograms;
  std::map<int, int> object_counts;
  std::map<std::string, std::map<std::string, int>> attributes;
  for (Split s : {Split::kTrain, Split::kVal, Split::kTest}) {
    const auto& scenes = dataset.split(s);
    size_t objects = 0;
    for (const auto& scene : scenes) {
      objects += scene.objects.size();
      ++object_counts[scene.size()];
      for (const auto& o : scene.objects) {
        for (Attribute a : kAllAttributes) {
          ++attributes[std::string(AttributeName(a))][o.attribute(a)];
        }
      }
    }
    counts[std::string(SplitName(s))] = {{"scenes", scenes.size()},
                                         {"objects", objects}};
  }
  json per_count;
  for (auto [n, c] : object_counts) per_count[std::to_string(n)] = c;
  histograms["objects_per_scene"] = per_count;
  for (const auto& [attr, values] : attributes) histograms[attr] = values;
  return {{"config", dataset.config.ToJson()},
          {"counts", counts},
          {"histograms", histograms},
          {"resampled", dataset.resampled}};
}

void SaveDataset(const Dataset& dataset, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (Split s : {Split::kTrain, Split::kVal, Split::kTest}) {
    SaveScenes(dataset.split(s), dir / (std::string(SplitName(s)) + ".jsonl"));
  }
  std::ofstream out(dir / "manifest.json", std::ios::binary | std::ios::trunc);
  out << DatasetManifest(dataset).dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write manifest in " + dir.string());
}

Dataset LoadDataset(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) {
    throw std::runtime_error("missing dataset manifest " +
                             (dir / "manifest.json").string());
  }
  json manifest = json::parse(in);
  Dataset dataset;
  dataset.config = DatasetConfig::FromJson(manifest.at("config"));
  dataset.resampled = manifest.value("resampled", 0);
  dataset.train = LoadScenes(dir / "train.jsonl", dataset.config.space);
  dataset.val = LoadScenes(dir / "val.jsonl", dataset.config.space);
  dataset.test = LoadScenes(dir / "test.jsonl", dataset.config.space);
  return dataset;
}

}  // namespace goalq
