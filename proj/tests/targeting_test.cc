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
#include <set>

#include "doctest.h"
#include "goalq/reward.h"
#include "goalq/targeting.h"

namespace goalq {
namespace {

TEST_CASE("actions and digit vectors are a bijection") {
  for (int k : {2, 3, 4}) {
    const int64_t n = ActionCount(k);
    CHECK(n == static_cast<int64_t>(std::pow(3, k)));
    std::set<std::vector<int>> seen;
    for (int64_t a = 0; a < n; ++a) {
      auto digits = ActionDigits(a, k);
      REQUIRE(digits.size() == static_cast<size_t>(k));
      for (int d : digits) CHECK((d >= 0 && d <= 2));
      CHECK(DigitsToAction(digits) == a);
      seen.insert(digits);
      CHECK(IsSubmission(a, k) == (a == 0 || a == n - 1));
    }
    CHECK(seen.size() == static_cast<size_t>(n));
  }
  CHECK_THROWS_AS(ActionDigits(9, 2), std::out_of_range);
  CHECK_THROWS_AS(ActionDigits(-1, 2), std::out_of_range);
}

TEST_CASE("least significant digit goes to the first top-k object") {
  // 5 = 2*1 + 1*3 -> digits [2, 1]
  CHECK(ActionDigits(5, 2) == std::vector<int>{2, 1});
  std::vector<int> top = {4, 1};
  auto g = ActionToGroupVector(5, 2, top, 6);
  CHECK(g == std::vector<int>{0, 1, 0, 0, 2, 0});
}

TEST_CASE("top-k selection") {
  std::vector<double> p = {0.1, 0.4, 0.2, 0.3};
  CHECK(TopKSelect(p, 4, 2) == std::vector<int>{1, 3});
  CHECK(TopKSelect(p, 4, 3) == std::vector<int>{1, 3, 2});
  // ties favour the lower id
  std::vector<double> flat = {0.25, 0.25, 0.25, 0.25};
  CHECK(TopKSelect(flat, 4, 2) == std::vector<int>{0, 1});
  // fewer objects than k
  CHECK(TopKSelect(p, 2, 3) == std::vector<int>{1, 0});
}

TEST_CASE("reward values") {
  RewardConfig c;
  CHECK(Reward(true, true, 1, c) == 0.0);
  CHECK(Reward(true, true, 2, c) == doctest::Approx(0.92).epsilon(1e-15));
  CHECK(Reward(true, true, 5, c) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(Reward(true, false, 3, c) == 0.0);
  CHECK(Reward(false, true, 3, c) == 0.0);
  CHECK(Reward(true, true, 6, c) == 0.0);
  CHECK_THROWS(Reward(true, true, 0, c));
}

TEST_CASE("discounted returns") {
  std::vector<double> r = {0.0, 0.0, 0.92};
  CHECK(Returns(r, 1.0) == std::vector<double>{0.92, 0.92, 0.92});
  std::vector<double> one = {0.0, 0.0, 1.0};
  CHECK(Returns(one, 0.5) == std::vector<double>{0.25, 0.5, 1.0});
  std::vector<double> zero = {0.0, 0.0};
  CHECK(Returns(zero, 0.9) == std::vector<double>{0.0, 0.0});
}

}  // namespace
}  // namespace goalq
