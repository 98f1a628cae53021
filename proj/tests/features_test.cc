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

#include <cmath>
#include <numeric>

#include "doctest.h"
#include "goalq/dataset.h"
#include "goalq/features.h"
#include "test_util.h"

namespace goalq {
namespace {

using testing::MakeObject;
using testing::MakeScene;

SceneObject WithBox(double xc, double yc, double w, double h) {
  SceneObject o = MakeObject(0, "cube", "red", 0.0, 0.0);
  o.bbox = {xc, yc, w, h};
  return o;
}

void CheckVec(const Geometric5& got, const Geometric5& want) {
  for (int i = 0; i < 5; ++i) CHECK(got[i] == doctest::Approx(want[i]));
}

TEST_CASE("source geometry") {
  CheckVec(SourceGeometric(WithBox(50, 30, 20, 10), 100, 100),
           {0.5, 0.3, 0.2, 0.1, 0.02});
  CheckVec(SourceGeometric(WithBox(50, 50, 100, 100), 100, 100),
           {0.5, 0.5, 1, 1, 1});
  CHECK_THROWS_AS(SourceGeometric(WithBox(1, 1, 1, 1), 0, 100),
                  std::invalid_argument);

  DatasetConfig c = DatasetConfig::ForName("ask3");
  Rng rng(4);
  for (int i = 0; i < 30; ++i) {
    Scene s = GenerateScene(c, rng);
    for (const auto& o : s.objects) {
      for (double v : SourceGeometric(o, s.width, s.height)) {
        CHECK(v > 0.0);
        CHECK(v <= 1.0);
      }
    }
  }
}

TEST_CASE("relative geometry") {
  SceneObject i = WithBox(0, 0, 20, 10);
  SceneObject j = WithBox(40, 20, 10, 5);
  CheckVec(RelativeGeometric(i, j), {2.0, 2.0, 0.5, 0.5, 0.25});
  CHECK(RelativeGeometric(i, j)[2] * RelativeGeometric(j, i)[2] ==
        doctest::Approx(1.0));
  CHECK_THROWS_AS(RelativeGeometric(WithBox(0, 0, 0, 10), j),
                  std::invalid_argument);
}

TEST_CASE("geometric vector layout") {
  Scene s = MakeScene({MakeObject(0, "cube", "red", -1.0, 0.0),
                       MakeObject(1, "sphere", "blue", 1.0, 0.5, "small"),
                       MakeObject(2, "cylinder", "green", 0.0, -1.0)});
  std::vector<int> one = {1};
  auto v = GeometricVector(1, one, s, 3);
  REQUIRE(v.size() == 15u);
  auto sg = SourceGeometric(s.objects[1], s.width, s.height);
  for (int d = 0; d < 5; ++d) CHECK(v[d] == doctest::Approx(sg[d]));
  for (size_t d = 5; d < v.size(); ++d) CHECK(v[d] == 0.0);

  std::vector<int> all(kMaxObjects);
  std::iota(all.begin(), all.end(), 0);
  Scene big;
  for (int id = 0; id < kMaxObjects; ++id) {
    big.objects.push_back(MakeObject(id, "cube", "red", id * 0.5 - 2.0, 0.0));
  }
  CHECK(GeometricVector(0, all, big, kMaxObjects).size() ==
        static_cast<size_t>(GeometricWidth(kMaxObjects)));

  // Swapping the neighbours swaps their blocks.
  std::vector<int> a = {0, 1, 2}, b = {0, 2, 1};
  auto va = GeometricVector(0, a, s, 3);
  auto vb = GeometricVector(0, b, s, 3);
  auto r01 = RelativeGeometric(s.objects[0], s.objects[1]);
  auto r02 = RelativeGeometric(s.objects[0], s.objects[2]);
  for (int d = 0; d < 5; ++d) {
    CHECK(va[d] == vb[d]);
    CHECK(va[5 + d] == doctest::Approx(r01[d]));
    CHECK(va[10 + d] == doctest::Approx(r02[d]));
    CHECK(vb[5 + d] == va[10 + d]);
    CHECK(vb[10 + d] == va[5 + d]);
  }
  std::vector<int> missing = {1, 2};
  CHECK_THROWS_AS(GeometricVector(0, missing, s, 3), std::invalid_argument);
}

TEST_CASE("visual features") {
  auto space = AttributeSpace::Ask3();
  VisualFeaturizer f(space, 32, 11);
  SceneObject a = MakeObject(0, "cube", "red", 0.0, 0.0);
  SceneObject b = MakeObject(3, "cube", "red", 2.0, 1.0);
  CHECK(f(a) == f(b));
  CHECK(f(a) != f(MakeObject(0, "cube", "blue", 0.0, 0.0)));
  CHECK(VisualFeaturizer(space, 32, 11)(a) == f(a));

  VisualFeaturizer id(space, f.one_hot_width(), 0, true);
  CHECK(id(a) == id.OneHot(a));
  int ones = 0;
  for (float x : id(a)) ones += x == 1.0f;
  CHECK(ones == 4);

  SceneObject bad = a;
  bad.color = "pink";
  CHECK_THROWS_AS(f(bad), std::invalid_argument);

  DatasetConfig c = DatasetConfig::ForName("ask4");
  c.duplicate_pressure = 0.0;
  VisualFeaturizer f4(c.space, 32, 3);
  Rng rng(8);
  int checked = 0;
  while (checked < 100) {
    for (const auto& o : GenerateScene(c, rng).objects) {
      double in = 0.0, out = 0.0;
      for (float x : f4.OneHot(o)) in += x * x;
      for (float x : f4(o)) out += x * x;
      CHECK(std::abs(std::sqrt(out) / std::sqrt(in) - 1.0) < 0.1);
      if (++checked == 100) break;
    }
  }
}

}  // namespace
}  // namespace goalq
