// Copyright 2026 The VesselGrow Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vesselgrow/image.hpp"

#include <algorithm>
#include <cmath>

namespace vesselgrow {

GrayImage::GrayImage(Plane pixels) : pixels_(std::move(pixels)) {
  for (double v : pixels_.data()) {
    if (!(v >= 0.0 && v <= 255.0)) {
      throw DimensionError("gray intensity out of [0, 255]: " + std::to_string(v));
    }
  }
}

GrayImage::GrayImage(int width, int height, double fill)
    : GrayImage(Plane(width, height, fill)) {}

GrayImage::GrayImage(int width, int height, std::vector<double> data)
    : GrayImage(Plane(width, height, std::move(data))) {}

GrayImage GrayImage::clamped(Plane pixels) {
  for (double& v : pixels.data()) {
    v = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 255.0);
  }
  GrayImage out;
  out.pixels_ = std::move(pixels);
  return out;
}

GrayImage invert(const GrayImage& img) {
  Plane out = img.plane();
  for (double& v : out.data()) v = 255.0 - v;
  return GrayImage(std::move(out));
}

BinaryMask threshold(const GrayImage& img, double threshold) {
  BinaryMask mask(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) mask[i] = img[i] >= threshold ? 1 : 0;
  return mask;
}

std::size_t count_set(const BinaryMask& mask) noexcept {
  return static_cast<std::size_t>(
      std::count_if(mask.data().begin(), mask.data().end(),
                    [](std::uint8_t v) { return v != 0; }));
}

}  // namespace vesselgrow
