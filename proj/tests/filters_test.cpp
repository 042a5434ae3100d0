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

#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "vesselgrow/errors.hpp"
#include "vesselgrow/filters.hpp"

namespace vesselgrow {
namespace {

using vgtest::pixel;
using vgtest::random_image;

constexpr int kRandomImages = 100;

// ---------------------------------------------------------------- Hessian

TEST(HessianTest, RawCoefficientExample) {
  const HessianFeatures f = hessian_features({3, 1, 2, 4});
  EXPECT_DOUBLE_EQ(f.det, 10);
  EXPECT_DOUBLE_EQ(f.trace, 7);
  EXPECT_DOUBLE_EQ(f.lambda1, 2);
  EXPECT_DOUBLE_EQ(f.lambda2, 5);
  EXPECT_DOUBLE_EQ(f.lambda1 + f.lambda2, f.trace);
  EXPECT_DOUBLE_EQ(f.lambda1 * f.lambda2, f.det);
  EXPECT_FALSE(f.negative_discriminant);
}

TEST(HessianTest, NegativeDiscriminantEmitsZero) {
  const HessianFeatures f = hessian_features({0, 1, -1, 0});
  EXPECT_TRUE(f.negative_discriminant);
  EXPECT_EQ(f.lambda1, 0);
  EXPECT_EQ(f.lambda2, 0);
}

TEST(HessianTest, NegativeModulusEmitsZero) {
  const HessianFeatures f = hessian_features({0, 2, -3, 0});
  EXPECT_TRUE(f.negative_modulus);
  EXPECT_EQ(f.modulus, 0);
}

TEST(HessianTest, QuadraticRamp) {
  Plane p(16, 5);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 16; ++x) p(x, y) = x * x;
  const HessianPlanes h = hessian_planes(GrayImage(p));
  const int x = 7, y = 2;
  EXPECT_EQ(h.planes[1](x, y), 2);  // a
  EXPECT_EQ(h.planes[2](x, y), 0);  // b
  EXPECT_EQ(h.planes[3](x, y), 0);  // c
  EXPECT_EQ(h.planes[4](x, y), 0);  // d
  EXPECT_EQ(h.planes[0](x, y), 0);  // det
  EXPECT_EQ(h.planes[9](x, y), 2);  // trace
  EXPECT_EQ(h.planes[5](x, y), 0);
  EXPECT_EQ(h.planes[6](x, y), 2);
  EXPECT_EQ(h.planes[8](x, y), 2);   // modulus
  EXPECT_EQ(h.planes[7](x, y), 16);  // gamma-normalized difference
}

TEST(HessianTest, ConstantImageHasZeroPlanes) {
  const HessianPlanes h = hessian_planes(GrayImage(9, 7, 42.0));
  for (const Plane& plane : h.planes)
    for (double v : plane.data()) EXPECT_EQ(v, 0.0);
}

TEST(HessianTest, TooSmallImageIsDimensionError) {
  EXPECT_THROW(hessian_planes(GrayImage(2, 5)), DimensionError);
}

TEST(HessianTest, MatchesFiniteDifferenceOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const GrayImage img = random_image(16, 16, seed);
    const HessianPlanes h = hessian_planes(img);
    EXPECT_EQ(h.negative_discriminant_count, 0u);
    for (int y = 0; y < 16; ++y) {
      for (int x = 0; x < 16; ++x) {
        const double a = pixel(img, x + 1, y) + pixel(img, x - 1, y) - 2 * pixel(img, x, y);
        const double d = pixel(img, x, y + 1) + pixel(img, x, y - 1) - 2 * pixel(img, x, y);
        const double b = (pixel(img, x + 1, y + 1) + pixel(img, x - 1, y - 1) -
                          pixel(img, x - 1, y + 1) - pixel(img, x + 1, y - 1)) / 4.0;
        EXPECT_EQ(h.planes[1](x, y), a);
        EXPECT_EQ(h.planes[4](x, y), d);
        EXPECT_EQ(h.planes[2](x, y), b);
        EXPECT_EQ(h.planes[3](x, y), h.planes[2](x, y));
        const double l1 = h.planes[5](x, y), l2 = h.planes[6](x, y);
        EXPECT_LE(l1, l2);
        EXPECT_NEAR(l1 + l2, a + d, 1e-6);
        EXPECT_NEAR(l1 * l2, a * d - b * b, 1e-6);
        EXPECT_NEAR(h.planes[8](x, y), std::sqrt(a * a + b * b + d * d), 1e-9);
      }
    }
  }
}

// ------------------------------------------------------- window statistics

TEST(WindowStatsTest, ConstantImage) {
  const WindowStats s = window_stats(GrayImage(10, 10, 5.0));
  for (const Plane* p : {&s.mean, &s.max, &s.min, &s.median})
    for (double v : p->data()) EXPECT_EQ(v, 5.0);
}

TEST(WindowStatsTest, OneToFortyNine) {
  std::vector<double> v(49);
  for (int i = 0; i < 49; ++i) v[i] = i + 1;
  const WindowStats s = window_stats(GrayImage(7, 7, v));
  EXPECT_EQ(s.mean(3, 3), 25);
  EXPECT_EQ(s.median(3, 3), 25);
  EXPECT_EQ(s.min(3, 3), 1);
  EXPECT_EQ(s.max(3, 3), 49);
}

TEST(WindowStatsTest, MatchesNaiveOracle) {
  for (std::uint64_t seed = 0; seed < kRandomImages; ++seed) {
    const GrayImage img = random_image(16, 16, seed);
    const WindowStats s = window_stats(img, 7);
    for (int y = 0; y < 16; ++y) {
      for (int x = 0; x < 16; ++x) {
        const vgtest::NaiveWindow w = vgtest::naive_window(img, x, y, 7);
        ASSERT_EQ(s.mean(x, y), w.mean);
        ASSERT_EQ(s.max(x, y), w.max);
        ASSERT_EQ(s.min(x, y), w.min);
        ASSERT_EQ(s.median(x, y), w.median);
      }
    }
  }
}

TEST(WindowStatsTest, RejectsEvenSize) {
  EXPECT_THROW(window_stats(GrayImage(8, 8), 6), ParamError);
}

// ---------------------------------------------------------------- diffusion

TEST(DiffusionTest, ConstantAndZeroStepAreIdentity) {
  const GrayImage flat(8, 8, 77.0);
  EXPECT_EQ(anisotropic_diffusion(flat, {0.3, 4, 20}), flat);
  const GrayImage img = random_image(12, 12, 9);
  EXPECT_EQ(anisotropic_diffusion(img, {0.0, 3, 10}), img);
}

TEST(DiffusionTest, StepEdgeScalarExample) {
  const GrayImage step(4, 1, std::vector<double>{0, 0, 100, 100});
  const GrayImage out = anisotropic_diffusion(step, {0.3, 4, 1});
  const double flux = 0.3 * 100 * std::exp(-625.0);
  EXPECT_EQ(out(0, 0), 0);
  EXPECT_DOUBLE_EQ(out(1, 0), flux);
  EXPECT_DOUBLE_EQ(out(2, 0), 100 - flux);
  EXPECT_EQ(out(3, 0), 100);
}

TEST(DiffusionTest, SmallStepAtLowContrast) {
  const GrayImage step(3, 1, std::vector<double>{10, 12, 10});
  const GrayImage out = anisotropic_diffusion(step, {0.25, 4, 1});
  const double g = std::exp(-(2.0 / 4) * (2.0 / 4));
  EXPECT_NEAR(out(1, 0), 12 + 0.25 * 2 * g * -2, 1e-12);
  EXPECT_NEAR(out(0, 0), 10 + 0.25 * 2 * g * 2, 1e-12);  // both west and east see 12
}

TEST(DiffusionTest, MatchesNaiveSweepOracle) {
  const DiffusionParams configs[] = {{0.3, 4, 20}, {0.5, 3, 10}, {2.0, 3, 35}, {0.8, 6, 40}};
  for (std::uint64_t seed = 0; seed < kRandomImages; ++seed) {
    const GrayImage img = random_image(16, 16, seed);
    const DiffusionParams& p = configs[seed % 4];
    const GrayImage got = anisotropic_diffusion(img, p);
    const GrayImage want = vgtest::naive_diffusion(img, p.lambda, p.kappa, p.iterations);
    for (std::size_t i = 0; i < got.size(); ++i) ASSERT_NEAR(got[i], want[i], 1e-6);
  }
}

TEST(DiffusionTest, StaysInRange) {
  const GrayImage img = random_image(16, 16, 4);
  const GrayImage out = anisotropic_diffusion(img, {2.0, 3, 35});
  for (double v : out.data()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 255.0);
  }
}

TEST(DiffusionTest, ValidatesParameters) {
  const GrayImage img(4, 4);
  EXPECT_THROW(anisotropic_diffusion(img, {0.3, 0.0, 1}), ParamError);
  EXPECT_THROW(anisotropic_diffusion(img, {0.3, 1.0, 0}), ParamError);
  EXPECT_THROW(anisotropic_diffusion(img, {2.5, 1.0, 1}), ParamError);
}

// --------------------------------------------------------------- morphology

TEST(StructuringElementTest, B1IsPlusSign) {
  const StructuringElement b1 = make_b1();
  EXPECT_EQ(b1.offsets.size(), 5u);
  EXPECT_TRUE(b1.contains({0, 0}));
  EXPECT_TRUE(b1.contains({0, -1}));
  EXPECT_FALSE(b1.contains({1, 1}));
  EXPECT_TRUE(b1.is_symmetric());
  EXPECT_EQ(b1.radius(), 1);
}

TEST(StructuringElementTest, B2IsRadiusFiveDisc) {
  const StructuringElement b2 = make_b2();
  const auto disc = vgtest::naive_disc(5);
  EXPECT_EQ(disc.size(), 81u);
  ASSERT_EQ(b2.offsets.size(), 81u);
  for (const Offset& o : disc) EXPECT_TRUE(b2.contains(o));
  EXPECT_TRUE(b2.is_symmetric());
  EXPECT_EQ(b2.radius(), 5);
}

TEST(MorphologyTest, ConstantImageIsFixed) {
  const GrayImage flat(9, 9, 31.0);
  for (const auto& se : {make_b1(), make_b2()}) {
    EXPECT_EQ(gray_dilate(flat, se), flat);
    EXPECT_EQ(gray_erode(flat, se), flat);
    EXPECT_EQ(morph_feature(flat, se, 1, 1), flat);
  }
}

TEST(MorphologyTest, DilatedImpulseIsPlus) {
  GrayImage img(7, 7, std::vector<double>(49, 0.0));
  Plane p = img.plane();
  p(3, 3) = 255;
  const GrayImage out = gray_dilate(GrayImage(p), make_b1());
  for (int y = 0; y < 7; ++y) {
    for (int x = 0; x < 7; ++x) {
      const bool on = std::abs(x - 3) + std::abs(y - 3) <= 1;
      EXPECT_EQ(out(x, y), on ? 255 : 0) << x << "," << y;
    }
  }
  // Dilate then erode restores the impulse's plus to a single pixel.
  const GrayImage back = morph_feature(GrayImage(p), make_b1(), 1, 1);
  EXPECT_EQ(back, vgtest::naive_erode_image(out, make_b1().offsets));
  EXPECT_EQ(back(3, 3), 255);
  EXPECT_EQ(back(3, 4), 0);
}

TEST(MorphologyTest, MatchesNaiveOracle) {
  for (const auto& se : {make_b1(), make_b2()}) {
    for (std::uint64_t seed = 0; seed < kRandomImages; ++seed) {
      const GrayImage img = random_image(16, 16, seed);
      ASSERT_EQ(gray_dilate(img, se), vgtest::naive_dilate_image(img, se.offsets));
      ASSERT_EQ(gray_erode(img, se), vgtest::naive_erode_image(img, se.offsets));
    }
  }
}

TEST(MorphologyTest, AsymmetricElementUsesReflectedSupportForErosion) {
  const StructuringElement se{"east", {{0, 0}, {1, 0}}};
  const GrayImage img = random_image(10, 6, 2);
  EXPECT_EQ(gray_dilate(img, se), vgtest::naive_dilate_image(img, se.offsets));
  EXPECT_EQ(gray_erode(img, se), vgtest::naive_erode_image(img, se.offsets));
}

TEST(MorphologyTest, Duality) {
  for (const auto& se : {make_b1(), make_b2()}) {
    for (std::uint64_t seed = 0; seed < kRandomImages; ++seed) {
      const GrayImage img = random_image(16, 16, seed);
      EXPECT_EQ(gray_erode(img, se), invert(gray_dilate(invert(img), se)));
    }
  }
}

TEST(MorphologyTest, ExtensiveAndMonotone) {
  const StructuringElement se = make_b2();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const GrayImage img = random_image(16, 16, seed, 0, 200);
    Plane brighter = img.plane();
    for (double& v : brighter.data()) v += 55;
    const GrayImage hi(brighter);
    const GrayImage dil = gray_dilate(img, se), ero = gray_erode(img, se);
    const GrayImage dil_hi = gray_dilate(hi, se);
    for (std::size_t i = 0; i < img.size(); ++i) {
      EXPECT_LE(ero[i], img[i]);
      EXPECT_GE(dil[i], img[i]);
      EXPECT_LE(dil[i], dil_hi[i]);
    }
  }
}

TEST(MorphologyTest, FeatureComposesDilationsThenErosions) {
  const StructuringElement b2 = make_b2();
  const GrayImage img = random_image(32, 32, 11);
  GrayImage want = img;
  for (int k = 0; k < 3; ++k) want = vgtest::naive_dilate_image(want, b2.offsets);
  want = vgtest::naive_erode_image(want, b2.offsets);
  EXPECT_EQ(morph_feature(img, b2, 3, 1), want);
}

// ----------------------------------------------------------------- Kuwahara

TEST(KuwaharaTest, ConstantImage) {
  const GrayImage flat(12, 12, 90.0);
  EXPECT_EQ(kuwahara(flat, 5), flat);
}

TEST(KuwaharaTest, StepEdgeKeepsLeftSide) {
  Plane p(10, 6);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 10; ++x) p(x, y) = x < 5 ? 0 : 200;
  const GrayImage out = kuwahara(GrayImage(p), 2);
  for (int y = 0; y < 6; ++y) {
    EXPECT_EQ(out(4, y), 0);
    EXPECT_EQ(out(5, y), 200);
  }
}

TEST(KuwaharaTest, OutputIsAQuadrantMean) {
  const GrayImage img = random_image(16, 16, 3);
  const GrayImage out = kuwahara(img, 2);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) {
      bool found = false;
      for (int q = 0; q < 4; ++q) {
        const int x0 = (q == 0 || q == 3) ? x : x - 2;
        const int y0 = q < 2 ? y : y - 2;
        double sum = 0;
        for (int j = y0; j <= y0 + 2; ++j)
          for (int i = x0; i <= x0 + 2; ++i) sum += pixel(img, i, j);
        found = found || sum / 9.0 == out(x, y);
      }
      EXPECT_TRUE(found);
    }
  }
}

TEST(KuwaharaTest, MatchesNaiveOracle) {
  for (int a : {2, 5, 10}) {
    for (std::uint64_t seed = 0; seed < kRandomImages; ++seed) {
      const GrayImage img = random_image(16, 16, seed);
      const GrayImage out = kuwahara(img, a);
      for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x)
          ASSERT_EQ(out(x, y), vgtest::naive_kuwahara(img, a, x, y)) << "a=" << a;
    }
  }
}

TEST(KuwaharaTest, RejectsZeroHalfSize) {
  EXPECT_THROW(kuwahara(GrayImage(4, 4), 0), ParamError);
}

// -------------------------------------------------------------- Light Sobel

TEST(LightSobelTest, ConstantImageIsAllOnes) {
  const Plane out = light_sobel(GrayImage(8, 8, 100.0), -10, 2);
  for (double v : out.data()) EXPECT_EQ(v, 1.0);
}

TEST(LightSobelTest, BrightAndDarkImpulses) {
  Plane bright(9, 9, 0.0);
  bright(4, 4) = 255;
  EXPECT_EQ(light_sobel(GrayImage(bright), -10, 2)(4, 4), 1.0);

  Plane dark(9, 9, 255.0);
  dark(4, 4) = 0;
  EXPECT_EQ(light_sobel(GrayImage(dark), -10, 2)(4, 4), 0.0);
}

TEST(LightSobelTest, MatchesNaiveOracle) {
  for (const auto& [t, d] : {std::pair{-10.0, 2}, std::pair{-10.0, 5}, std::pair{15.0, 1}}) {
    for (std::uint64_t seed = 0; seed < kRandomImages; ++seed) {
      const GrayImage img = random_image(16, 16, seed);
      const Plane out = light_sobel(img, t, d);
      for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x)
          ASSERT_EQ(out(x, y), vgtest::naive_light_sobel(img, t, d, x, y));
    }
  }
}

TEST(LightSobelTest, RejectsZeroDistance) {
  EXPECT_THROW(light_sobel(GrayImage(4, 4), -10, 0), ParamError);
}

}  // namespace
}  // namespace vesselgrow
