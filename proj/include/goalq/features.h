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

#ifndef GOALQ_FEATURES_H_
#define GOALQ_FEATURES_H_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "goalq/scene.h"

namespace goalq {

using Geometric5 = std::array<double, 5>;

// [x_c/W, y_c/H, w/W, h/H, wh/(WH)].
Geometric5 SourceGeometric(const SceneObject& obj, int width, int height);

// Box of `other` expressed in units of `source`'s box:
// [x_cj/w_i, y_cj/h_i, w_j/w_i, h_j/h_i, w_j h_j/(w_i h_i)].
Geometric5 RelativeGeometric(const SceneObject& source,
                             const SceneObject& other);

// [o_sg(i), o_rg(i, j) for j in phi order, j != i], zero padded to
// 5 + 5 * (phi_max - 1) entries. Throws std::invalid_argument if i is not
// in phi.
std::vector<double> GeometricVector(int i, std::span<const int> phi,
                                    const Scene& scene, int phi_max);

inline int GeometricWidth(int phi_max) { return 5 + 5 * (phi_max - 1); }

// One-hot attribute encoding followed by a fixed seeded projection with
// orthonormal columns, so norms are preserved exactly.
class VisualFeaturizer {
 public:
  VisualFeaturizer(const AttributeSpace& space, int dim, uint64_t seed,
                   bool identity = false);

  // Throws std::invalid_argument on attributes outside the space.
  std::vector<float> operator()(const SceneObject& obj) const;
  std::vector<float> OneHot(const SceneObject& obj) const;

  int dim() const { return dim_; }
  int one_hot_width() const { return width_; }

 private:
  AttributeSpace space_;
  int dim_;
  int width_;
  // dim_ x width_, row major.
  std::vector<double> projection_;
};

}  // namespace goalq

#endif  // GOALQ_FEATURES_H_
