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

#include <stdexcept>
#include <string>

namespace vesselgrow {

// Root of every error raised by the library. The CLI maps these to exit
// code 2 (data error); anything else escaping is treated as internal.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define VESSELGROW_DEFINE_ERROR(Name)  \
  class Name : public Error {          \
   public:                             \
    using Error::Error;                \
  }

VESSELGROW_DEFINE_ERROR(IoError);
VESSELGROW_DEFINE_ERROR(FormatError);
VESSELGROW_DEFINE_ERROR(PairingError);
VESSELGROW_DEFINE_ERROR(DimensionError);
VESSELGROW_DEFINE_ERROR(ParamError);
VESSELGROW_DEFINE_ERROR(BoundsError);
VESSELGROW_DEFINE_ERROR(SchemaError);
VESSELGROW_DEFINE_ERROR(EmptyDatasetError);
VESSELGROW_DEFINE_ERROR(DegenerateError);
VESSELGROW_DEFINE_ERROR(VersionError);
VESSELGROW_DEFINE_ERROR(CorruptModelError);
VESSELGROW_DEFINE_ERROR(SingleClassError);

#undef VESSELGROW_DEFINE_ERROR

}  // namespace vesselgrow
