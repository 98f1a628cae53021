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

#include "goalq/scene.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "json.hpp"

namespace goalq {
namespace {

using nlohmann::json;

void CheckList(const std::vector<std::string>& values, std::string_view name) {
  if (values.empty()) {
    throw std::invalid_argument("attribute list '" + std::string(name) +
                                "' is empty");
  }
  std::set<std::string> unique(values.begin(), values.end());
  if (unique.size() != values.size()) {
    throw std::invalid_argument("attribute list '" + std::string(name) +
                                "' has duplicate names");
  }
}

uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

json ObjectToJson(const SceneObject& o) {
  return json{{"id", o.id},
              {"shape", o.shape},
              {"color", o.color},
              {"size", o.size},
              {"material", o.material},
              {"position", {o.position.x, o.position.y}},
              {"bbox", {o.bbox.xc, o.bbox.yc, o.bbox.w, o.bbox.h}}};
}

const json& Require(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw std::invalid_argument(std::string("missing field \"") + key + "\"");
  }
  return *it;
}

std::string RequireAttribute(const json& j, const char* key, Attribute attr,
                             const AttributeSpace& space) {
  std::string value = Require(j, key).get<std::string>();
  if (space.IndexOf(attr, value) < 0) {
    throw std::invalid_argument("unknown " + std::string(AttributeName(attr)) +
                                " \"" + value + "\"");
  }
  return value;
}

}  // namespace

std::string_view AttributeName(Attribute attribute) {
  switch (attribute) {
    case Attribute::kShape: return "shape";
    case Attribute::kColor: return "color";
    case Attribute::kSize: return "size";
    case Attribute::kMaterial: return "material";
  }
  return "?";
}

AttributeSpace AttributeSpace::Ask3() {
  return {.shapes = {"cube", "cylinder", "sphere"},
          .colors = {"blue", "green", "red", "yellow"},
          .sizes = {"large", "small"},
          .materials = {"rubber"},
          .active = {Attribute::kShape, Attribute::kColor, Attribute::kSize}};
}

AttributeSpace AttributeSpace::Ask4() {
  return {.shapes = {"cube", "cylinder", "sphere"},
          .colors = {"blue", "green", "red", "yellow"},
          .sizes = {"large", "small"},
          .materials = {"metal", "rubber"},
          .active = {Attribute::kShape, Attribute::kColor, Attribute::kSize,
                     Attribute::kMaterial}};
}

AttributeSpace AttributeSpace::ByName(std::string_view name) {
  if (name == "ask3") return Ask3();
  if (name == "ask4") return Ask4();
  throw std::invalid_argument("unknown dataset \"" + std::string(name) +
                              "\" (expected ask3 or ask4)");
}

const std::vector<std::string>& AttributeSpace::values(
    Attribute attribute) const {
  switch (attribute) {
    case Attribute::kShape: return shapes;
    case Attribute::kColor: return colors;
    case Attribute::kSize: return sizes;
    case Attribute::kMaterial: return materials;
  }
  return shapes;
}

bool AttributeSpace::is_active(Attribute attribute) const {
  return std::find(active.begin(), active.end(), attribute) != active.end();
}

void AttributeSpace::Validate() const {
  for (Attribute a : kAllAttributes) {
    CheckList(values(a), AttributeName(a));
    if (!is_active(a) && values(a).size() != 1) {
      throw std::invalid_argument("inactive attribute '" +
                                  std::string(AttributeName(a)) +
                                  "' must have exactly one value");
    }
  }
  if (active.empty()) {
    throw std::invalid_argument("no active attributes");
  }
  // Words are shared across attributes in the question lexicon.
  std::set<std::string> all;
  size_t total = 0;
  for (Attribute a : kAllAttributes) {
    all.insert(values(a).begin(), values(a).end());
    total += values(a).size();
  }
  if (all.size() != total) {
    throw std::invalid_argument("attribute names must be unique across lists");
  }
}

int AttributeSpace::IndexOf(Attribute attribute, std::string_view value) const {
  const auto& list = values(attribute);
  for (size_t i = 0; i < list.size(); ++i) {
    if (list[i] == value) return static_cast<int>(i);
  }
  return -1;
}

const std::string& SceneObject::attribute(Attribute attribute) const {
  switch (attribute) {
    case Attribute::kShape: return shape;
    case Attribute::kColor: return color;
    case Attribute::kSize: return size;
    case Attribute::kMaterial: return material;
  }
  return shape;
}

bool SceneObject::SameAttributes(const SceneObject& other) const {
  return shape == other.shape && color == other.color && size == other.size &&
         material == other.material;
}

std::string_view SplitName(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

Split ParseSplit(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  throw std::invalid_argument("unknown split \"" + std::string(name) + "\"");
}

void Scene::Validate(const AttributeSpace& space) const {
  if (objects.size() < static_cast<size_t>(kMinObjects) ||
      objects.size() > static_cast<size_t>(kMaxObjects)) {
    throw std::invalid_argument("scene " + scene_id + " has " +
                                std::to_string(objects.size()) + " objects");
  }
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("scene " + scene_id + " has empty image size");
  }
  for (size_t i = 0; i < objects.size(); ++i) {
    const SceneObject& o = objects[i];
    if (o.id != static_cast<int>(i)) {
      throw std::invalid_argument("scene " + scene_id +
                                  ": object ids must be 0..n-1");
    }
    for (Attribute a : kAllAttributes) {
      if (space.IndexOf(a, o.attribute(a)) < 0) {
        throw std::invalid_argument("unknown " + std::string(AttributeName(a)) +
                                    " \"" + o.attribute(a) + "\"");
      }
    }
    const BBox& b = o.bbox;
    if (b.w <= 0 || b.h <= 0 || b.xc - b.w / 2 < 0 || b.yc - b.h / 2 < 0 ||
        b.xc + b.w / 2 > width || b.yc + b.h / 2 > height) {
      throw std::invalid_argument("scene " + scene_id + ": bbox of object " +
                                  std::to_string(i) + " leaves the image");
    }
    for (size_t j = 0; j < i; ++j) {
      if (objects[j].position == o.position) {
        throw std::invalid_argument("scene " + scene_id +
                                    ": objects share a position");
      }
    }
  }
}

SceneFormatError::SceneFormatError(int line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what),
      line_(line) {}

std::string SceneToJsonLine(const Scene& scene) {
  json objects = json::array();
  for (const auto& o : scene.objects) objects.push_back(ObjectToJson(o));
  json record{{"scene_id", scene.scene_id},
              {"split", std::string(SplitName(scene.split))},
              {"image_size", {scene.width, scene.height}},
              {"objects", std::move(objects)},
              {"gt_questions", scene.gt_questions}};
  return record.dump();
}

Scene SceneFromJsonLine(std::string_view line, const AttributeSpace& space,
                        int line_number) {
  try {
    json j = json::parse(line);
    Scene scene;
    scene.scene_id = Require(j, "scene_id").get<std::string>();
    scene.split = ParseSplit(Require(j, "split").get<std::string>());
    const json& size = Require(j, "image_size");
    if (!size.is_array() || size.size() != 2) {
      throw std::invalid_argument("\"image_size\" must be [W,H]");
    }
    scene.width = size[0].get<int>();
    scene.height = size[1].get<int>();
    for (const json& jo : Require(j, "objects")) {
      SceneObject o;
      o.id = Require(jo, "id").get<int>();
      o.shape = RequireAttribute(jo, "shape", Attribute::kShape, space);
      o.color = RequireAttribute(jo, "color", Attribute::kColor, space);
      o.size = RequireAttribute(jo, "size", Attribute::kSize, space);
      o.material = RequireAttribute(jo, "material", Attribute::kMaterial, space);
      const json& pos = Require(jo, "position");
      const json& box = Require(jo, "bbox");
      if (pos.size() != 2) throw std::invalid_argument("\"position\" must be [x,y]");
      if (box.size() != 4) throw std::invalid_argument("\"bbox\" must be [xc,yc,w,h]");
      o.position = {pos[0].get<double>(), pos[1].get<double>()};
      o.bbox = {box[0].get<double>(), box[1].get<double>(),
                box[2].get<double>(), box[3].get<double>()};
      scene.objects.push_back(std::move(o));
    }
    if (auto it = j.find("gt_questions"); it != j.end()) {
      scene.gt_questions = it->get<std::vector<std::string>>();
    }
    scene.Validate(space);
    return scene;
  } catch (const json::exception& e) {
    throw SceneFormatError(line_number, e.what());
  } catch (const std::invalid_argument& e) {
    throw SceneFormatError(line_number, e.what());
  }
}

void SaveScenes(const std::vector<Scene>& scenes,
                const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& scene : scenes) out << SceneToJsonLine(scene) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<Scene> LoadScenes(const std::filesystem::path& path,
                              const AttributeSpace& space) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::vector<Scene> scenes;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    scenes.push_back(SceneFromJsonLine(line, space, line_number));
  }
  return scenes;
}

uint64_t Fnv1a(std::string_view text) {
  uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

Rng StreamFor(uint64_t seed, std::string_view key) {
  return Rng(SplitMix64(seed ^ SplitMix64(Fnv1a(key))));
}

int HeldOutGoal(const Scene& scene) {
  return static_cast<int>(SplitMix64(Fnv1a(scene.scene_id)) %
                          static_cast<uint64_t>(scene.size()));
}

}  // namespace goalq
