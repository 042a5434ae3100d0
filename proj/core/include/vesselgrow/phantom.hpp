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

#include <cstdint>
#include <string>
#include <vector>

#include "vesselgrow/imaging.hpp"

namespace vesselgrow {

// Synthetic angiogram-like scenes: dark branching tubes on a bright, unevenly
// lit, noisy background, with the exact tube footprint as ground truth.
struct PhantomParams {
  int width = 512;
  int height = 512;
  std::uint64_t seed = 1;
  int trunks = 2;              // vessels entering from the border
  int branches_per_trunk = 4;
  double max_radius = 5.0;     // trunk half-width in pixels
  double min_radius = 1.0;
  double contrast = 60.0;      // centreline darkening of a trunk
  double background = 170.0;
  double illumination = 25.0;  // amplitude of the smooth lighting field
  double noise_sigma = 6.0;
};

DatasetEntry make_phantom(const PhantomParams& params, std::string image_id);

// `count` phantoms with ids "<prefix>1".."<prefix>N" and seeds derived from
// base.seed.
std::vector<DatasetEntry> make_phantom_dataset(int count, const PhantomParams& base,
                                               const std::string& prefix = "phantom");

}  // namespace vesselgrow
