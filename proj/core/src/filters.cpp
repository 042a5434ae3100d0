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

#include "vesselgrow/filters.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace vesselgrow {
namespace {

// Copy of the image with a reflected border of `pad` pixels on every side,
// so window loops can index without per-sample reflection.
class PaddedImage {
 public:
  PaddedImage(const GrayImage& img, int pad)
      : pad_(pad), stride_(img.width() + 2 * pad) {
    const int h = img.height() + 2 * pad;
    data_.resize(static_cast<std::size_t>(stride_) * h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < stride_; ++x) {
        data_[static_cast<std::size_t>(y) * stride_ + x] =
            img.sample_reflected(x - pad, y - pad);
      }
    }
  }

  // (x, y) in original image coordinates, |offset| <= pad.
  double at(int x, int y) const noexcept {
    return data_[static_cast<std::size_t>(y + pad_) * stride_ + (x + pad_)];
  }
  const double* row(int y) const noexcept {
    return data_.data() + static_cast<std::size_t>(y + pad_) * stride_ + pad_;
  }

 private:
  int pad_;
  int stride_;
  std::vector<double> data_;
};

}  // namespace

// ------------------------------------------------------------------ Hessian

HessianFeatures hessian_features(const HessianAtPixel& h) noexcept {
  const double a = h.a, b = h.b, c = h.c, d = h.d;
  HessianFeatures f;
  f.det = a * d - c * b;
  f.a = a;
  f.b = b;
  f.c = c;
  f.d = d;
  f.trace = a + d;

  const double diff = a - d;
  const double discriminant = diff * diff + 4.0 * b * c;
  if (discriminant >= 0.0) {
    const double root = std::sqrt(discriminant);
    f.lambda1 = (a + d - root) / 2.0;
    f.lambda2 = (a + d + root) / 2.0;
  } else {
    f.negative_discriminant = true;
  }

  f.gamma_norm = diff * diff * (diff * diff + 4.0 * b * b);

  const double modulus_sq = a * a + b * c + d * d;
  if (modulus_sq >= 0.0) {
    f.modulus = std::sqrt(modulus_sq);
  } else {
    f.negative_modulus = true;
  }
  return f;
}

HessianAtPixel hessian_at(const GrayImage& img, int x, int y) noexcept {
  auto I = [&](int dx, int dy) { return img.sample_reflected(x + dx, y + dy); };
  HessianAtPixel h;
  h.a = I(1, 0) - 2.0 * I(0, 0) + I(-1, 0);
  h.d = I(0, 1) - 2.0 * I(0, 0) + I(0, -1);
  // d/dy of the central x-difference.
  h.b = ((I(1, 1) - I(-1, 1)) / 2.0 - (I(1, -1) - I(-1, -1)) / 2.0) / 2.0;
  h.c = h.b;
  return h;
}

HessianPlanes hessian_planes(const GrayImage& img) {
  if (img.width() < 3 || img.height() < 3) {
    throw DimensionError("Hessian features need at least a 3x3 image, got " +
                         std::to_string(img.width()) + "x" +
                         std::to_string(img.height()));
  }
  HessianPlanes out;
  for (auto& p : out.planes) p = Plane(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const HessianFeatures f = hessian_features(hessian_at(img, x, y));
      const double values[kHessianPlaneCount] = {
          f.det,     f.a,       f.b,          f.c,       f.d,
          f.lambda1, f.lambda2, f.gamma_norm, f.modulus, f.trace};
      for (std::size_t k = 0; k < kHessianPlaneCount; ++k) out.planes[k](x, y) = values[k];
      out.negative_discriminant_count += f.negative_discriminant;
      out.negative_modulus_count += f.negative_modulus;
    }
  }
  return out;
}

// ------------------------------------------------------- window statistics

WindowStats window_stats(const GrayImage& img, int size) {
  if (size < 3 || size % 2 == 0) {
    throw ParamError("window size must be odd and >= 3, got " + std::to_string(size));
  }
  const int r = size / 2;
  const std::size_t n = static_cast<std::size_t>(size) * size;
  const std::size_t mid = (n - 1) / 2;
  const PaddedImage padded(img, r);
  const int w = img.width();
  const int h = img.height();
  WindowStats out{Plane(w, h), Plane(w, h), Plane(w, h), Plane(w, h)};
  std::vector<double> window(n);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double sum = 0.0;
      double hi = -std::numeric_limits<double>::infinity();
      double lo = std::numeric_limits<double>::infinity();
      std::size_t k = 0;
      for (int dy = -r; dy <= r; ++dy) {
        const double* row = padded.row(y + dy);
        for (int dx = -r; dx <= r; ++dx) {
          const double v = row[x + dx];
          window[k++] = v;
          sum += v;
          hi = std::max(hi, v);
          lo = std::min(lo, v);
        }
      }
      std::nth_element(window.begin(), window.begin() + mid, window.end());
      out.mean(x, y) = sum / static_cast<double>(n);
      out.max(x, y) = hi;
      out.min(x, y) = lo;
      out.median(x, y) = window[mid];
    }
  }
  return out;
}

// ---------------------------------------------------- anisotropic diffusion

void DiffusionParams::validate() const {
  if (!(kappa > 0.0)) throw ParamError("diffusion kappa must be > 0");
  if (iterations < 1) throw ParamError("diffusion iterations must be >= 1");
  if (!(lambda >= 0.0 && lambda <= 2.0)) {
    throw ParamError("diffusion lambda must lie in [0, 2]");
  }
}

double diffusion_conductance(double gradient, double kappa) noexcept {
  const double s = gradient / kappa;
  return std::exp(-(s * s));
}

GrayImage anisotropic_diffusion(const GrayImage& img, const DiffusionParams& p) {
  p.validate();
  const int w = img.width();
  const int h = img.height();
  Plane current = img.plane();
  Plane next(w, h);
  for (int it = 0; it < p.iterations; ++it) {
    for (int y = 0; y < h; ++y) {
      const int yn = reflect_index(y - 1, h);
      const int ys = reflect_index(y + 1, h);
      for (int x = 0; x < w; ++x) {
        const int xw = reflect_index(x - 1, w);
        const int xe = reflect_index(x + 1, w);
        const double c = current(x, y);
        const double gn = current(x, yn) - c;
        const double gs = current(x, ys) - c;
        const double gw = current(xw, y) - c;
        const double ge = current(xe, y) - c;
        const double flux = diffusion_conductance(gn, p.kappa) * gn +
                            diffusion_conductance(gs, p.kappa) * gs +
                            diffusion_conductance(gw, p.kappa) * gw +
                            diffusion_conductance(ge, p.kappa) * ge;
        next(x, y) = std::clamp(c + p.lambda * flux, 0.0, 255.0);
      }
    }
    std::swap(current, next);
  }
  return GrayImage(std::move(current));
}

// --------------------------------------------------------------- morphology

bool StructuringElement::contains(Offset o) const noexcept {
  return std::find(offsets.begin(), offsets.end(), o) != offsets.end();
}

bool StructuringElement::is_symmetric() const noexcept {
  return std::all_of(offsets.begin(), offsets.end(),
                     [&](Offset o) { return contains({-o.dx, -o.dy}); });
}

int StructuringElement::radius() const noexcept {
  int r = 0;
  for (const Offset& o : offsets) r = std::max({r, std::abs(o.dx), std::abs(o.dy)});
  return r;
}

StructuringElement make_b1() {
  return {"B1", {{0, -1}, {-1, 0}, {0, 0}, {1, 0}, {0, 1}}};
}

StructuringElement make_b2() {
  StructuringElement se{"B2", {}};
  for (int dy = -5; dy <= 5; ++dy) {
    for (int dx = -5; dx <= 5; ++dx) {
      if (dx * dx + dy * dy <= 25) se.offsets.push_back({dx, dy});
    }
  }
  return se;
}

namespace {

template <typename Pick>
GrayImage flat_rank_filter(const GrayImage& img, const StructuringElement& se,
                           int sign, double init, Pick pick) {
  if (se.offsets.empty()) throw ParamError("structuring element '" + se.name + "' is empty");
  const PaddedImage padded(img, se.radius());
  Plane out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      double acc = init;
      for (const Offset& o : se.offsets) {
        acc = pick(acc, padded.at(x + sign * o.dx, y + sign * o.dy));
      }
      out(x, y) = acc;
    }
  }
  return GrayImage::clamped(std::move(out));
}

}  // namespace

GrayImage gray_dilate(const GrayImage& img, const StructuringElement& se) {
  return flat_rank_filter(img, se, +1, -std::numeric_limits<double>::infinity(),
                          [](double a, double b) { return std::max(a, b); });
}

GrayImage gray_erode(const GrayImage& img, const StructuringElement& se) {
  return flat_rank_filter(img, se, -1, std::numeric_limits<double>::infinity(),
                          [](double a, double b) { return std::min(a, b); });
}

GrayImage morph_feature(const GrayImage& img, const StructuringElement& se,
                        int dilations, int erosions) {
  if (dilations < 0 || erosions < 0 || dilations + erosions < 1) {
    throw ParamError("morph_feature needs non-negative counts with at least one step");
  }
  GrayImage out = img;
  for (int k = 0; k < dilations; ++k) out = gray_dilate(out, se);
  for (int k = 0; k < erosions; ++k) out = gray_erode(out, se);
  return out;
}

// ----------------------------------------------------------------- Kuwahara

GrayImage kuwahara(const GrayImage& img, int a) {
  if (a < 1) throw ParamError("Kuwahara half-size must be >= 1");
  const PaddedImage padded(img, a);
  const double n = static_cast<double>(a + 1) * (a + 1);
  // Quadrant origins relative to the pixel, in quadrant index order.
  const int x0[4] = {0, -a, -a, 0};
  const int y0[4] = {0, 0, -a, -a};
  Plane out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      double best_mean = 0.0;
      double best_sigma = std::numeric_limits<double>::infinity();
      for (int q = 0; q < 4; ++q) {
        double sum = 0.0;
        for (int dy = 0; dy <= a; ++dy) {
          const double* row = padded.row(y + y0[q] + dy) + x + x0[q];
          for (int dx = 0; dx <= a; ++dx) sum += row[dx];
        }
        const double mean = sum / n;
        double ss = 0.0;
        for (int dy = 0; dy <= a; ++dy) {
          const double* row = padded.row(y + y0[q] + dy) + x + x0[q];
          for (int dx = 0; dx <= a; ++dx) {
            const double e = row[dx] - mean;
            ss += e * e;
          }
        }
        const double sigma = std::sqrt(ss / n);
        if (sigma < best_sigma) {
          best_sigma = sigma;
          best_mean = mean;
        }
      }
      out(x, y) = best_mean;
    }
  }
  return GrayImage::clamped(std::move(out));
}

// ------------------------------------------------------------- light sobel

Plane light_sobel(const GrayImage& img, double t, int d) {
  if (d < 1) throw ParamError("light sobel distance must be >= 1");
  Plane out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double c = img(x, y);
      const bool vertical = c - img.sample_reflected(x, y - d) > t &&
                            c - img.sample_reflected(x, y + d) > t;
      const bool horizontal = c - img.sample_reflected(x - d, y) > t &&
                              c - img.sample_reflected(x + d, y) > t;
      out(x, y) = vertical && horizontal ? 1.0 : 0.0;
    }
  }
  return out;
}

}  // namespace vesselgrow
