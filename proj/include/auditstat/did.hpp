// Copyright 2026 The auditstat Authors
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


#ifndef AUDITSTAT_DID_HPP_
#define AUDITSTAT_DID_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "auditstat/core_model.hpp"

namespace auditstat {

enum class DidGroup { treated, control };

const char* to_string(DidGroup group);

struct DidObservation {
  DidGroup group = DidGroup::treated;
  std::int64_t period = 0;
  double outcome = 0.0;
};

// Periods before change_period form the pre era, the rest the post era.
struct DidPanel {
  std::vector<DidObservation> observations;
  std::int64_t change_period = 0;
};

struct PeriodValue {
  std::int64_t period = 0;
  double value = 0.0;

  bool operator==(const PeriodValue&) const = default;
};

struct DidOptions {
  // Era means as the mean of per-period means instead of over raw
  // observations.
  bool period_balanced = false;
  // Resample observations within each group x era; 0 disables.
  std::size_t bootstrap_replicates = 0;
  std::uint64_t bootstrap_seed = 0;
};

struct DidResult {
  double effect = 0.0;
  double treated_pre_mean = 0.0;
  double treated_post_mean = 0.0;
  double control_pre_mean = 0.0;
  double control_post_mean = 0.0;
  // Treated trajectory had the change not happened, for post periods where
  // the control group was observed.
  std::vector<PeriodValue> counterfactual;
  std::vector<PeriodValue> treated_series;
  std::vector<PeriodValue> control_series;
  std::optional<double> bootstrap_se;

  bool operator==(const DidResult&) const = default;
};

DidResult did_estimate(const DidPanel& panel, const DidOptions& options = {});

// One observation per (group, period): the share of (product, reviewer)
// decisions whose final_classification differs from the ground truth.
DidPanel error_rate_panel(const ReviewDataset& treated, const ReviewDataset& control,
                          std::int64_t change_period,
                          const std::map<std::string, std::string>& ground_truth);

DidResult did_with_error_rates(const ReviewDataset& treated, const ReviewDataset& control,
                               std::int64_t change_period,
                               const std::map<std::string, std::string>& ground_truth,
                               const DidOptions& options = {});

}  // namespace auditstat

#endif  // AUDITSTAT_DID_HPP_
