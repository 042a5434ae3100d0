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
#include <functional>

namespace vesselgrow {

// Worker count: VESSELGROW_THREADS when set to a positive integer, otherwise
// std::thread::hardware_concurrency() (at least 1).
int thread_count();

// Calls fn(i) for every i in [0, n), spreading indices over up to `threads`
// workers (0 = thread_count()). Each index is processed exactly once; fn must
// not depend on execution order. Exceptions are rethrown on the caller
// (the first by index wins).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  int threads = 0);

}  // namespace vesselgrow
