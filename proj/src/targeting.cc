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

#include "goalq/targeting.h"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace goalq {

int64_t ActionCount(int k) {
  if (k < 1 || k > 19) {
    throw std::invalid_argument("top-k size out of range: " + std::to_string(k));
  }
  int64_t n = 1;
  for (int i = 0; i < k; ++i) n *= 3;
  return n;
}

bool IsSubmission(int64_t action, int k) {
  return action == 0 || action == ActionCount(k) - 1;
}

std::vector<int> ActionDigits(int64_t action, int k) {
  if (action < 0 || action >= ActionCount(k)) {
    throw std::out_of_range("action " + std::to_string(action) +
                            " outside [0, 3^" + std::to_string(k) + ")");
  }
  std::vector<int> digits(k);
  for (int j = 0; j < k; ++j) {
    digits[j] = static_cast<int>(action % 3);
    action /= 3;
  }
  return digits;
}

int64_t DigitsToAction(std::span<const int> digits) {
  int64_t action = 0;
  for (size_t j = digits.size(); j-- > 0;) {
    if (digits[j] < 0 || digits[j] > 2) {
      throw std::invalid_argument("group digit must be 0, 1 or 2");
    }
    action = action * 3 + digits[j];
  }
  return action;
}

std::vector<int> ActionToGroupVector(int64_t action, int k,
                                     std::span<const int> top_k, int n_max) {
  std::vector<int> digits = ActionDigits(action, k);
  std::vector<int> groups(n_max, kMasked);
  size_t used = std::min(top_k.size(), digits.size());
  for (size_t j = 0; j < used; ++j) {
    if (top_k[j] < 0 || top_k[j] >= n_max) {
      throw std::out_of_range("top-k id outside the object slots");
    }
    groups[top_k[j]] = digits[j];
  }
  return groups;
}

std::vector<int> TopKSelect(std::span<const double> prob, int n_real, int k) {
  std::vector<int> ids(n_real);
  std::iota(ids.begin(), ids.end(), 0);
  std::stable_sort(ids.begin(), ids.end(),
                   [&](int a, int b) { return prob[a] > prob[b]; });
  if (k < n_real) ids.resize(k);
  return ids;
}

}  // namespace goalq
