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

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vesselgrow/errors.hpp"

namespace vesselgrow {

// Maps an arbitrary coordinate onto [0, n) by mirror reflection about the
// edges without repeating the border sample: -1 -> 1, n -> n - 2. Offsets
// larger than the extent keep bouncing (period 2n - 2).
inline int reflect_index(int i, int n) noexcept {
  if (n <= 1) return 0;
  if (i >= 0 && i < n) return i;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

// Row-major 2-D grid. Plain value type; copies are deep.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height) {
    check_extent(width, height);
    data_.assign(static_cast<std::size_t>(width) * height, fill);
  }
  Grid(int width, int height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    check_extent(width, height);
    if (data_.size() != static_cast<std::size_t>(width) * height) {
      throw DimensionError("grid data length " + std::to_string(data_.size()) +
                           " does not match " + std::to_string(width) + "x" +
                           std::to_string(height));
    }
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  T& operator()(int x, int y) noexcept { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const noexcept { return data_[index(x, y)]; }
  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  const T& reflected(int x, int y) const noexcept {
    return (*this)(reflect_index(x, width_), reflect_index(y, height_));
  }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  const std::vector<T>& values() const noexcept { return data_; }

  template <typename U>
  bool same_shape(const Grid<U>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  static void check_extent(int width, int height) {
    if (width <= 0 || height <= 0) {
      throw DimensionError("grid extent must be positive, got " +
                           std::to_string(width) + "x" + std::to_string(height));
    }
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

// Real-valued plane with no range restriction (Hessian responses, feature
// planes, probabilities).
using Plane = Grid<double>;

// Per-pixel class label; nonzero means vessel.
using BinaryMask = Grid<std::uint8_t>;

// Intensity image whose samples all lie in [0, 255].
class GrayImage {
 public:
  GrayImage() = default;
  // Throws DimensionError if any sample lies outside [0, 255] or is NaN.
  explicit GrayImage(Plane pixels);
  GrayImage(int width, int height, double fill = 0.0);
  GrayImage(int width, int height, std::vector<double> data);

  // Builds an image by clamping every sample into [0, 255]; NaN maps to 0.
  static GrayImage clamped(Plane pixels);

  int width() const noexcept { return pixels_.width(); }
  int height() const noexcept { return pixels_.height(); }
  std::size_t size() const noexcept { return pixels_.size(); }
  bool empty() const noexcept { return pixels_.empty(); }

  double operator()(int x, int y) const noexcept { return pixels_(x, y); }
  double operator[](std::size_t i) const noexcept { return pixels_[i]; }
  double sample_reflected(int x, int y) const noexcept {
    return pixels_.reflected(x, y);
  }

  std::span<const double> data() const noexcept { return pixels_.data(); }
  const Plane& plane() const noexcept { return pixels_; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  Plane pixels_;
};

// Free-function form of GrayImage::sample_reflected.
inline double sample_reflected(const GrayImage& img, int x, int y) noexcept {
  return img.sample_reflected(x, y);
}

// 255 - v at every pixel.
GrayImage invert(const GrayImage& img);

// Mask of pixels whose intensity is >= threshold.
BinaryMask threshold(const GrayImage& img, double threshold = 128.0);

std::size_t count_set(const BinaryMask& mask) noexcept;

}  // namespace vesselgrow
