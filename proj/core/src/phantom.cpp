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

#include "vesselgrow/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vesselgrow/rng.hpp"

namespace vesselgrow {
namespace {

struct Canvas {
  Plane darkening;
  BinaryMask truth;
};

double gaussian(Rng& rng) {
  // Box-Muller; 1 - u keeps the log argument in (0, 1].
  const double u = 1.0 - rng.uniform();
  const double v = rng.uniform();
  return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
}

void stamp(Canvas& c, double cx, double cy, double radius, double contrast) {
  const int reach = static_cast<int>(std::ceil(radius + 1.0));
  const int x0 = static_cast<int>(std::floor(cx));
  const int y0 = static_cast<int>(std::floor(cy));
  for (int y = y0 - reach; y <= y0 + reach + 1; ++y) {
    for (int x = x0 - reach; x <= x0 + reach + 1; ++x) {
      if (!c.truth.contains(x, y)) continue;
      const double d = std::hypot(x - cx, y - cy);
      double dark = 0.0;
      if (d <= radius) {
        const double t = d / radius;
        dark = contrast * std::sqrt(1.0 - 0.75 * t * t);
        c.truth(x, y) = 1;
      } else if (d < radius + 1.0) {
        dark = contrast * 0.5 * (radius + 1.0 - d);  // partial-volume rim
      }
      c.darkening(x, y) = std::max(c.darkening(x, y), dark);
    }
  }
}

struct Walker {
  double x, y, heading, radius, contrast;
};

// Traces one vessel until it leaves the image or runs out of length, and
// returns the points it visited for branching.
std::vector<Walker> trace(Canvas& c, Rng& rng, Walker w, double length, double taper) {
  std::vector<Walker> path;
  double turn = 0.0;
  for (double s = 0.0; s < length; s += 0.5) {
    stamp(c, w.x, w.y, w.radius, w.contrast);
    path.push_back(w);
    turn = 0.92 * turn + 0.02 * gaussian(rng);
    w.heading += turn;
    w.x += 0.5 * std::cos(w.heading);
    w.y += 0.5 * std::sin(w.heading);
    w.radius = std::max(w.radius * taper, 0.6);
    if (w.x < -4 || w.y < -4 || w.x > c.truth.width() + 4 || w.y > c.truth.height() + 4) break;
  }
  return path;
}

}  // namespace

DatasetEntry make_phantom(const PhantomParams& p, std::string image_id) {
  Rng rng(p.seed);
  Canvas canvas{Plane(p.width, p.height, 0.0), BinaryMask(p.width, p.height, 0)};
  const double scale = std::max(p.width, p.height);

  for (int t = 0; t < p.trunks; ++t) {
    // Enter from a random border point, heading roughly inwards.
    const int side = static_cast<int>(rng.below(4));
    const double along = 0.15 + 0.7 * rng.uniform();
    Walker w{};
    switch (side) {
      case 0: w = {along * p.width, 0.0, std::numbers::pi / 2, 0, 0}; break;
      case 1: w = {along * p.width, p.height - 1.0, -std::numbers::pi / 2, 0, 0}; break;
      case 2: w = {0.0, along * p.height, 0.0, 0, 0}; break;
      default: w = {p.width - 1.0, along * p.height, std::numbers::pi, 0, 0}; break;
    }
    w.heading += 0.5 * (rng.uniform() - 0.5);
    w.radius = p.max_radius * (0.75 + 0.25 * rng.uniform());
    w.contrast = p.contrast;
    const std::vector<Walker> trunk = trace(canvas, rng, w, 1.6 * scale, 0.9995);

    for (int b = 0; b < p.branches_per_trunk && trunk.size() > 8; ++b) {
      const Walker& at = trunk[trunk.size() / 8 + rng.below(trunk.size() * 3 / 4)];
      Walker child = at;
      const double side_sign = rng.below(2) ? 1.0 : -1.0;
      child.heading += side_sign * (0.4 + 0.6 * rng.uniform());
      child.radius = std::max(p.min_radius, at.radius * (0.45 + 0.3 * rng.uniform()));
      child.contrast = p.contrast * (0.6 + 0.3 * rng.uniform());
      trace(canvas, rng, child, (0.25 + 0.35 * rng.uniform()) * scale, 0.998);
    }
  }

  // Smooth lighting: two random low-frequency cosines.
  const double fx = (0.5 + rng.uniform()) * 2.0 * std::numbers::pi / p.width;
  const double fy = (0.5 + rng.uniform()) * 2.0 * std::numbers::pi / p.height;
  const double phase_x = 2.0 * std::numbers::pi * rng.uniform();
  const double phase_y = 2.0 * std::numbers::pi * rng.uniform();
  Plane pixels(p.width, p.height);
  for (int y = 0; y < p.height; ++y) {
    for (int x = 0; x < p.width; ++x) {
      const double light = p.illumination * 0.5 *
                           (std::cos(fx * x + phase_x) + std::cos(fy * y + phase_y));
      pixels(x, y) = p.background + light - canvas.darkening(x, y) +
                     p.noise_sigma * gaussian(rng);
    }
  }
  for (double& v : pixels.data()) v = std::round(v);
  return {std::move(image_id), GrayImage::clamped(std::move(pixels)), std::move(canvas.truth)};
}

std::vector<DatasetEntry> make_phantom_dataset(int count, const PhantomParams& base,
                                               const std::string& prefix) {
  std::vector<DatasetEntry> out;
  for (int i = 1; i <= count; ++i) {
    PhantomParams p = base;
    p.seed = derive_seed(base.seed, static_cast<std::uint64_t>(i));
    out.push_back(make_phantom(p, prefix + std::to_string(i)));
  }
  return out;
}

}  // namespace vesselgrow
