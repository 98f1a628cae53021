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

#ifndef GOALQ_TESTS_TEST_UTIL_H_
#define GOALQ_TESTS_TEST_UTIL_H_

#include <filesystem>
#include <string>
#include <vector>

#include "goalq/scene.h"

namespace goalq::testing {

// Object with a bbox derived from the default projection.
SceneObject MakeObject(int id, std::string shape, std::string color, double x,
                       double y, std::string size = "large",
                       std::string material = "rubber");
// Renumbers ids to 0..n-1.
Scene MakeScene(std::vector<SceneObject> objects, std::string id = "test_scene");

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

std::string ReadFile(const std::filesystem::path& path);

}  // namespace goalq::testing

#endif  // GOALQ_TESTS_TEST_UTIL_H_
