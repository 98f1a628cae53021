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

#ifndef GOALQ_SCENE_H_
#define GOALQ_SCENE_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace goalq {

using Rng = std::mt19937_64;

enum class Attribute { kShape, kColor, kSize, kMaterial };
inline constexpr std::array<Attribute, 4> kAllAttributes = {
    Attribute::kShape, Attribute::kColor, Attribute::kSize,
    Attribute::kMaterial};

std::string_view AttributeName(Attribute attribute);

// The attribute vocabulary of a dataset. Inactive attributes carry exactly
// one value, which every object takes and no question mentions.
struct AttributeSpace {
  std::vector<std::string> shapes;
  std::vector<std::string> colors;
  std::vector<std::string> sizes;
  std::vector<std::string> materials;
  std::vector<Attribute> active;

  static AttributeSpace Ask3();
  static AttributeSpace Ask4();
  static AttributeSpace ByName(std::string_view name);

  const std::vector<std::string>& values(Attribute attribute) const;
  bool is_active(Attribute attribute) const;
  // Throws std::invalid_argument when an invariant is violated.
  void Validate() const;
  // Index of `value` within the attribute's list, or -1.
  int IndexOf(Attribute attribute, std::string_view value) const;

  bool operator==(const AttributeSpace&) const = default;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Vec2&) const = default;
};

// Pixel-space box given by its center and extent.
struct BBox {
  double xc = 0.0;
  double yc = 0.0;
  double w = 0.0;
  double h = 0.0;
  bool operator==(const BBox&) const = default;
};

// x grows rightward, y grows toward the viewer.
struct SceneObject {
  int id = 0;
  std::string shape;
  std::string color;
  std::string size;
  std::string material;
  Vec2 position;
  BBox bbox;

  const std::string& attribute(Attribute attribute) const;
  bool SameAttributes(const SceneObject& other) const;
  bool operator==(const SceneObject&) const = default;
};

enum class Split { kTrain, kVal, kTest };
std::string_view SplitName(Split split);
Split ParseSplit(std::string_view name);

inline constexpr int kMaxObjects = 10;
inline constexpr int kMinObjects = 3;

struct Scene {
  std::string scene_id;
  Split split = Split::kTrain;
  int width = 480;
  int height = 320;
  std::vector<SceneObject> objects;
  // Space-joined token strings, goal independent.
  std::vector<std::string> gt_questions;

  int size() const { return static_cast<int>(objects.size()); }
  // Throws std::invalid_argument on a broken invariant.
  void Validate(const AttributeSpace& space) const;
  bool operator==(const Scene&) const = default;
};

struct GameInstance {
  const Scene* scene = nullptr;
  int goal_id = 0;
};

class SceneFormatError : public std::runtime_error {
 public:
  SceneFormatError(int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

void SaveScenes(const std::vector<Scene>& scenes,
                const std::filesystem::path& path);
// Validates every record against `space`.
std::vector<Scene> LoadScenes(const std::filesystem::path& path,
                              const AttributeSpace& space);

// Serialized form of one scene, identical to a JSONL line without newline.
std::string SceneToJsonLine(const Scene& scene);
Scene SceneFromJsonLine(std::string_view line, const AttributeSpace& space,
                        int line_number = 1);

uint64_t Fnv1a(std::string_view text);
// Independent deterministic stream per (seed, key).
Rng StreamFor(uint64_t seed, std::string_view key);

// Object id that is never used as a training goal on train scenes; the
// "new object" evaluation split asks for exactly this object.
int HeldOutGoal(const Scene& scene);

}  // namespace goalq

#endif  // GOALQ_SCENE_H_
