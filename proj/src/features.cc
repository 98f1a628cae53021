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

#include "goalq/features.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace goalq {

Geometric5 SourceGeometric(const SceneObject& obj, int width, int height) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("image size must be positive");
  }
  const BBox& b = obj.bbox;
  double w = width, h = height;
  return {b.xc / w, b.yc / h, b.w / w, b.h / h, (b.w * b.h) / (w * h)};
}

Geometric5 RelativeGeometric(const SceneObject& source,
                             const SceneObject& other) {
  const BBox& s = source.bbox;
  const BBox& o = other.bbox;
  if (!(s.w > 0) || !(s.h > 0)) {
    throw std::invalid_argument("degenerate source box for object " +
                                std::to_string(source.id));
  }
  return {o.xc / s.w, o.yc / s.h, o.w / s.w, o.h / s.h,
          (o.w * o.h) / (s.w * s.h)};
}

std::vector<double> GeometricVector(int i, std::span<const int> phi,
                                    const Scene& scene, int phi_max) {
  bool member = false;
  for (int j : phi) member |= (j == i);
  if (!member) {
    throw std::invalid_argument("object " + std::to_string(i) +
                                " is not in the index set");
  }
  if (static_cast<int>(phi.size()) > phi_max) {
    throw std::invalid_argument("index set larger than its padded width");
  }
  std::vector<double> out(GeometricWidth(phi_max), 0.0);
  const SceneObject& src = scene.objects.at(i);
  Geometric5 sg = SourceGeometric(src, scene.width, scene.height);
  std::copy(sg.begin(), sg.end(), out.begin());
  size_t offset = 5;
  for (int j : phi) {
    if (j == i) continue;
    Geometric5 rg = RelativeGeometric(src, scene.objects.at(j));
    std::copy(rg.begin(), rg.end(), out.begin() + offset);
    offset += 5;
  }
  return out;
}

VisualFeaturizer::VisualFeaturizer(const AttributeSpace& space, int dim,
                                   uint64_t seed, bool identity)
    : space_(space), dim_(dim), width_(0) {
  for (Attribute a : kAllAttributes) {
    width_ += static_cast<int>(space.values(a).size());
  }
  if (identity) {
    if (dim_ != width_) {
      throw std::invalid_argument("identity projection needs dim == " +
                                  std::to_string(width_));
    }
    projection_.assign(dim_ * width_, 0.0);
    for (int k = 0; k < width_; ++k) projection_[k * width_ + k] = 1.0;
    return;
  }
  if (dim_ < width_) {
    throw std::invalid_argument("visual feature width " + std::to_string(dim_) +
                                " is below the one-hot width " +
                                std::to_string(width_));
  }
  // Gram-Schmidt over Gaussian columns.
  Rng rng(seed);
  std::normal_distribution<double> normal;
  std::vector<std::vector<double>> columns;
  while (static_cast<int>(columns.size()) < width_) {
    std::vector<double> v(dim_);
    for (double& x : v) x = normal(rng);
    for (const auto& c : columns) {
      double dot = 0;
      for (int r = 0; r < dim_; ++r) dot += v[r] * c[r];
      for (int r = 0; r < dim_; ++r) v[r] -= dot * c[r];
    }
    double norm = 0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm < 1e-8) continue;
    for (double& x : v) x /= norm;
    columns.push_back(std::move(v));
  }
  projection_.assign(dim_ * width_, 0.0);
  for (int c = 0; c < width_; ++c) {
    for (int r = 0; r < dim_; ++r) projection_[r * width_ + c] = columns[c][r];
  }
}

std::vector<float> VisualFeaturizer::OneHot(const SceneObject& obj) const {
  std::vector<float> out(width_, 0.0f);
  int offset = 0;
  for (Attribute a : kAllAttributes) {
    int index = space_.IndexOf(a, obj.attribute(a));
    if (index < 0) {
      throw std::invalid_argument("unknown " + std::string(AttributeName(a)) +
                                  " \"" + obj.attribute(a) + "\"");
    }
    out[offset + index] = 1.0f;
    offset += static_cast<int>(space_.values(a).size());
  }
  return out;
}

std::vector<float> VisualFeaturizer::operator()(const SceneObject& obj) const {
  std::vector<float> hot = OneHot(obj);
  std::vector<float> out(dim_, 0.0f);
  for (int r = 0; r < dim_; ++r) {
    double acc = 0;
    for (int c = 0; c < width_; ++c) acc += projection_[r * width_ + c] * hot[c];
    out[r] = static_cast<float>(acc);
  }
  return out;
}

}  // namespace goalq
