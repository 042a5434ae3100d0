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

// Acceptance gate on the published angiogram set. Set VESSELGROW_DATASET to
// a directory of <id>.png / <id>_gt.png pairs; without it the binary exits
// with the ctest skip code.

#include <cstdio>
#include <cstdlib>
#include <string>

#include "acceptance_common.hpp"

namespace {

constexpr int kSkip = 77;
constexpr double kMinAccuracy = 0.94;
constexpr double kMinAuc = 0.94;
constexpr double kMinTnr = 0.955;
constexpr double kMinTpr = 0.66;
constexpr double kMinAblationDrop = 0.02;

double or_zero(const std::optional<double>& v) { return v.value_or(0.0); }

}  // namespace

int main() {
  using namespace vesselgrow;
  const char* dir = std::getenv("VESSELGROW_DATASET");
  if (dir == nullptr || *dir == '\0') {
    std::printf("SKIP: VESSELGROW_DATASET is not set\n");
    return kSkip;
  }
  const std::vector<DatasetEntry> entries = load_dataset(dir);
  std::printf("dataset: %zu images from %s\n", entries.size(), dir);

  LoioOptions opts;
  opts.log = [](std::string_view line) { std::printf("  %.*s\n", int(line.size()), line.data()); };
  const vgtest::CapturedRun run = vgtest::run_captured(entries, opts);
  const ImageMetrics& agg = run.result.report.aggregate;
  std::printf("default run: %s\n", vgtest::format_rates(agg).c_str());

  vgtest::Ledger ledger;
  const bool table_ok = or_zero(agg.rates.accuracy) >= kMinAccuracy &&
                        or_zero(agg.auc) >= kMinAuc && or_zero(agg.rates.tnr) >= kMinTnr &&
                        or_zero(agg.rates.tpr) >= kMinTpr;
  ledger.add({"1", "leave-one-image-out floors", table_ok,
              vgtest::format_rates(agg) + " (floors Acc 94%, AUC 0.94, TNR 95.5%, TPR 66%)"});

  LoioOptions ablated = opts;
  ablated.element.use_connectivity = false;
  const LoioResult off = leave_one_image_out(entries, ablated);
  const double drop = or_zero(agg.rates.tpr) - or_zero(off.report.aggregate.rates.tpr);
  char detail[160];
  std::snprintf(detail, sizeof detail, "TPR %.2f%% without connectivity, drop %.2f points%s",
                or_zero(off.report.aggregate.rates.tpr) * 100, drop * 100,
                drop < kMinAblationDrop ? " (FLAG: smaller than 2 points)" : "");
  ledger.add({"2", "connectivity ablation", drop >= kMinAblationDrop, detail});

  ledger.add(vgtest::check_hessian_algebra(entries));
  opts.log = nullptr;
  ledger.add(vgtest::check_determinism(run, vgtest::run_captured(entries, opts)));
  ledger.add(vgtest::check_termination(run.result));
  return ledger.finish();
}
