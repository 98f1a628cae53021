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

#include "test_util.h"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace goalq::testing {

SceneObject MakeObject(int id, std::string shape, std::string color, double x,
                       double y, std::string size, std::string material) {
  SceneObject o;
  o.id = id;
  o.shape = std::move(shape);
  o.color = std::move(color);
  o.size = std::move(size);
  o.material = std::move(material);
  o.position = {x, y};
  double side = o.size == "large" ? 70.0 : 40.0;
  o.bbox = {240.0 + 65.0 * x, 160.0 + 40.0 * y, side, side};
  return o;
}

Scene MakeScene(std::vector<SceneObject> objects, std::string id) {
  Scene s;
  s.scene_id = std::move(id);
  s.objects = std::move(objects);
  for (size_t i = 0; i < s.objects.size(); ++i) s.objects[i].id = static_cast<int>(i);
  return s;
}

TempDir::TempDir() {
  char tmpl[] = "/tmp/goalq_test_XXXXXX";
  char* dir = mkdtemp(tmpl);
  if (!dir) throw std::runtime_error("mkdtemp failed");
  path_ = dir;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace goalq::testing
