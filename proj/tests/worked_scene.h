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

#ifndef GOALQ_TESTS_WORKED_SCENE_H_
#define GOALQ_TESTS_WORKED_SCENE_H_

#include "goalq/oracle.h"
#include "test_util.h"

namespace goalq::testing {

// Three objects: a green cylinder in front-left, a red cylinder in the
// back-middle and a green sphere to the right. The grouping targets the
// green cylinder against the green sphere with the red cylinder masked.
struct WorkedExample {
  Scene scene;
  Grouping grouping;
  int green_cylinder = 0;
  int red_cylinder = 1;
  int green_sphere = 2;

  WorkedExample() {
    scene = MakeScene({MakeObject(0, "cylinder", "green", -2.0, 1.0),
                       MakeObject(1, "cylinder", "red", 0.0, -1.0),
                       MakeObject(2, "sphere", "green", 2.0, 0.0)},
                      "worked");
    grouping.targets = {green_cylinder};
    grouping.distracters = {green_sphere};
    grouping.masked = {red_cylinder};
  }
};

}  // namespace goalq::testing

#endif  // GOALQ_TESTS_WORKED_SCENE_H_
