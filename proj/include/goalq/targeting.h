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

#ifndef GOALQ_TARGETING_H_
#define GOALQ_TARGETING_H_

#include <cstdint>
#include <span>
#include <vector>

namespace goalq {

// Group ids carried by a group vector.
inline constexpr int kMasked = 0;
inline constexpr int kTarget = 1;
inline constexpr int kDistracter = 2;

// 3^k; throws std::invalid_argument for k < 1 or k > 19.
int64_t ActionCount(int k);

// True for 0 and 3^k - 1.
bool IsSubmission(int64_t action, int k);

// Base-3 digits, least significant first: digit j is the group of K[j].
std::vector<int> ActionDigits(int64_t action, int k);
int64_t DigitsToAction(std::span<const int> digits);

// Slot-indexed group vector of length n_max; slots outside `top_k` are
// masked. When top_k is shorter than k the trailing digits are dropped.
std::vector<int> ActionToGroupVector(int64_t action, int k,
                                     std::span<const int> top_k, int n_max);

// Ids of the k largest probabilities among the first n_real entries,
// descending, ties to the lower id. Returns all ids when k > n_real.
std::vector<int> TopKSelect(std::span<const double> prob, int n_real, int k);

}  // namespace goalq

#endif  // GOALQ_TARGETING_H_
