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

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "vesselgrow/image.hpp"

namespace vesselgrow {

// ------------------------------------------------------------------ Hessian

// Second-order derivatives at one pixel: a = Ixx, b = Ixy, c = Iyx, d = Iyy.
struct HessianAtPixel {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;
};

// The ten scalar responses derived from one Hessian, in plane order.
struct HessianFeatures {
  double det = 0.0;
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;
  double lambda1 = 0.0;  // smaller eigenvalue
  double lambda2 = 0.0;  // larger eigenvalue
  double gamma_norm = 0.0;
  double modulus = 0.0;
  double trace = 0.0;
  // Set when (a - d)^2 + 4bc < 0; both eigenvalues are then reported as 0.
  bool negative_discriminant = false;
  // Set when a^2 + bc + d^2 < 0; the modulus is then reported as 0.
  bool negative_modulus = false;
};

// Evaluates determinant, eigenvalues (t = 1 gamma-normalized difference),
// modulus sqrt(a^2 + bc + d^2) and trace from raw coefficients.
HessianFeatures hessian_features(const HessianAtPixel& h) noexcept;

// Derivatives from reflected 3x3 neighbourhoods: [1, -2, 1] along x and y,
// cross term from composed central differences. b and c are identical.
HessianAtPixel hessian_at(const GrayImage& img, int x, int y) noexcept;

inline constexpr std::size_t kHessianPlaneCount = 10;

struct HessianPlanes {
  // det, a, b, c, d, lambda1, lambda2, gamma_norm, modulus, trace.
  std::array<Plane, kHessianPlaneCount> planes;
  std::size_t negative_discriminant_count = 0;
  std::size_t negative_modulus_count = 0;
};

// Unclamped Hessian feature planes. Throws DimensionError below 3x3.
HessianPlanes hessian_planes(const GrayImage& img);

// ------------------------------------------------------- window statistics

struct WindowStats {
  Plane mean;
  Plane max;
  Plane min;
  Plane median;
};

// Mean/max/min/median over the reflected size x size window at each pixel.
// The median is the middle order statistic (25th of 49 for size 7).
// Throws ParamError unless size is odd and >= 3.
WindowStats window_stats(const GrayImage& img, int size = 7);

// ---------------------------------------------------- anisotropic diffusion

struct DiffusionParams {
  double lambda = 0.25;
  double kappa = 1.0;
  int iterations = 1;

  // Throws ParamError: kappa > 0, iterations >= 1, 0 <= lambda <= 2.
  void validate() const;
};

// Perona-Malik edge-stopping function exp(-(grad / kappa)^2).
double diffusion_conductance(double gradient, double kappa) noexcept;

// Synchronous explicit sweeps over the 4-neighbourhood; every sweep is
// clamped back into [0, 255].
GrayImage anisotropic_diffusion(const GrayImage& img, const DiffusionParams& p);

// --------------------------------------------------------------- morphology

struct Offset {
  int dx = 0;
  int dy = 0;
  friend auto operator<=>(const Offset&, const Offset&) = default;
};

// Flat structuring element: only the support matters.
struct StructuringElement {
  std::string name;
  std::vector<Offset> offsets;

  bool contains(Offset o) const noexcept;
  bool is_symmetric() const noexcept;
  int radius() const noexcept;  // max |dx|, |dy| over the support
};

// 3x3 plus sign.
StructuringElement make_b1();
// Disc of radius 5 on an 11x11 lattice (81 offsets).
StructuringElement make_b2();

GrayImage gray_dilate(const GrayImage& img, const StructuringElement& se);
GrayImage gray_erode(const GrayImage& img, const StructuringElement& se);

// `dilations` dilations followed by `erosions` erosions.
// Throws ParamError on negative counts or when both are zero.
GrayImage morph_feature(const GrayImage& img, const StructuringElement& se,
                        int dilations, int erosions);

// ----------------------------------------------------------------- Kuwahara

// Four (a+1)x(a+1) quadrants sharing the centre row/column; output is the mean
// of the quadrant with the smallest population standard deviation, ties going
// to the lowest quadrant index. Quadrant 1 spans [x, x+a] x [y, y+a],
// 2: [x-a, x] x [y, y+a], 3: [x-a, x] x [y-a, y], 4: [x, x+a] x [y-a, y].
// Throws ParamError when a < 1.
GrayImage kuwahara(const GrayImage& img, int a);

// ------------------------------------------------------------- light sobel

// 1 where the pixel exceeds each of its four neighbours at distance d by more
// than t, else 0. Throws ParamError when d < 1.
Plane light_sobel(const GrayImage& img, double t, int d);

}  // namespace vesselgrow
