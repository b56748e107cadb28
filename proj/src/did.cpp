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


#include "auditstat/did.hpp"

#include <cmath>
#include <set>
#include <tuple>

#include "auditstat/error.hpp"
#include "auditstat/random.hpp"

namespace auditstat {
namespace {

// Outcomes keyed by period for one group.
using Cells = std::map<std::int64_t, std::vector<double>>;

struct EraMeans {
  double pre;
  double post;
};

EraMeans era_means(const Cells& cells, std::int64_t change, bool balanced) {
  double sum[2] = {0.0, 0.0};
  double count[2] = {0.0, 0.0};
  for (const auto& [period, values] : cells) {
    const int era = period >= change ? 1 : 0;
    if (balanced) {
      double s = 0.0;
      for (double v : values) s += v;
      sum[era] += s / static_cast<double>(values.size());
      count[era] += 1.0;
    } else {
      for (double v : values) sum[era] += v;
      count[era] += static_cast<double>(values.size());
    }
  }
  return {sum[0] / count[0], sum[1] / count[1]};
}

std::vector<PeriodValue> series_of(const Cells& cells) {
  std::vector<PeriodValue> out;
  for (const auto& [period, values] : cells) {
    double s = 0.0;
    for (double v : values) s += v;
    out.push_back({period, s / static_cast<double>(values.size())});
  }
  return out;
}

void check_eras(const Cells& cells, std::int64_t change, const char* group) {
  bool pre = false, post = false;
  for (const auto& [period, values] : cells) {
    (period >= change ? post : pre) = true;
  }
  if (!pre || !post) {
    fail(ErrorCode::missing_group, std::string(group) + " group has no observations in the " +
                                       (pre ? "post" : "pre") + " era");
  }
}

}  // namespace

const char* to_string(DidGroup group) {
  return group == DidGroup::treated ? "treated" : "control";
}

DidResult did_estimate(const DidPanel& panel, const DidOptions& options) {
  if (panel.observations.empty()) fail(ErrorCode::empty_input, "DiD panel is empty");
  Cells treated, control;
  for (const auto& obs : panel.observations) {
    if (!std::isfinite(obs.outcome)) fail(ErrorCode::bad_value, "non-finite DiD outcome");
    (obs.group == DidGroup::treated ? treated : control)[obs.period].push_back(obs.outcome);
  }
  if (treated.empty()) fail(ErrorCode::missing_group, "panel has no treated observations");
  if (control.empty()) fail(ErrorCode::missing_group, "panel has no control observations");
  check_eras(treated, panel.change_period, "treated");
  check_eras(control, panel.change_period, "control");

  const auto t = era_means(treated, panel.change_period, options.period_balanced);
  const auto c = era_means(control, panel.change_period, options.period_balanced);
  DidResult r;
  r.treated_pre_mean = t.pre;
  r.treated_post_mean = t.post;
  r.control_pre_mean = c.pre;
  r.control_post_mean = c.post;
  r.effect = (t.post - t.pre) - (c.post - c.pre);
  r.treated_series = series_of(treated);
  r.control_series = series_of(control);
  for (const auto& pv : r.control_series) {
    if (pv.period < panel.change_period) continue;
    r.counterfactual.push_back({pv.period, t.pre + (pv.value - c.pre)});
  }

  if (options.bootstrap_replicates > 0) {
    auto rng = SplitMix64::substream(options.bootstrap_seed, 0xD1D);
    auto resample = [&](const Cells& cells) {
      Cells out;
      for (const auto& [period, values] : cells) {
        auto& dst = out[period];
        for (std::size_t i = 0; i < values.size(); ++i) {
          dst.push_back(values[rng.below(values.size())]);
        }
      }
      return out;
    };
    std::vector<double> effects;
    for (std::size_t b = 0; b < options.bootstrap_replicates; ++b) {
      const auto bt = era_means(resample(treated), panel.change_period, options.period_balanced);
      const auto bc = era_means(resample(control), panel.change_period, options.period_balanced);
      effects.push_back((bt.post - bt.pre) - (bc.post - bc.pre));
    }
    double mean = 0.0;
    for (double e : effects) mean += e;
    mean /= static_cast<double>(effects.size());
    double ss = 0.0;
    for (double e : effects) ss += (e - mean) * (e - mean);
    r.bootstrap_se =
        effects.size() > 1 ? std::sqrt(ss / static_cast<double>(effects.size() - 1)) : 0.0;
  }
  return r;
}

DidPanel error_rate_panel(const ReviewDataset& treated, const ReviewDataset& control,
                          std::int64_t change_period,
                          const std::map<std::string, std::string>& ground_truth) {
  if (ground_truth.empty()) fail(ErrorCode::missing_ground_truth, "ground truth map is empty");
  DidPanel panel;
  panel.change_period = change_period;
  for (auto [dataset, group] : {std::pair{&treated, DidGroup::treated},
                                std::pair{&control, DidGroup::control}}) {
    // (period, product, reviewer) -> classification
    std::map<std::tuple<std::int64_t, std::string, std::string>, std::string> decisions;
    for (const auto& r : dataset->records()) {
      if (!r.period) {
        fail(ErrorCode::bad_value, "record for product " + r.product_id + " has no period");
      }
      auto [it, inserted] = decisions.emplace(
          std::tuple{*r.period, r.product_id, r.reviewer_id}, r.final_classification);
      if (!inserted && it->second != r.final_classification) {
        fail(ErrorCode::bad_value, "reviewer " + r.reviewer_id +
                                       " has conflicting classifications for product " +
                                       r.product_id);
      }
    }
    std::map<std::int64_t, std::pair<double, double>> tally;  // errors, decisions
    for (const auto& [key, cls] : decisions) {
      const auto& product = std::get<1>(key);
      auto truth = ground_truth.find(product);
      if (truth == ground_truth.end()) {
        fail(ErrorCode::missing_ground_truth, "no ground truth for product " + product);
      }
      auto& [errors, total] = tally[std::get<0>(key)];
      if (cls != truth->second) errors += 1.0;
      total += 1.0;
    }
    for (const auto& [period, counts] : tally) {
      panel.observations.push_back({group, period, counts.first / counts.second});
    }
  }
  return panel;
}

DidResult did_with_error_rates(const ReviewDataset& treated, const ReviewDataset& control,
                               std::int64_t change_period,
                               const std::map<std::string, std::string>& ground_truth,
                               const DidOptions& options) {
  return did_estimate(error_rate_panel(treated, control, change_period, ground_truth), options);
}

}  // namespace auditstat
