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


#ifndef AUDITSTAT_SIMULATOR_HPP_
#define AUDITSTAT_SIMULATOR_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "auditstat/core_model.hpp"

namespace auditstat {

struct QuestionSpec {
  std::string id;
  std::size_t n_categories = 2;
  // Probability a reviewer answers from their preference weights instead of
  // reporting the latent truth.
  double difficulty = 0.0;

  bool operator==(const QuestionSpec&) const = default;
};

struct TreatmentSpec {
  std::int64_t change_period = 1;
  // Shift of the treated-group post-period classification error rate.
  double error_rate_delta = 0.0;

  bool operator==(const TreatmentSpec&) const = default;
};

struct SimulationConfig {
  // Products per period.
  std::size_t n_products = 100;
  // Reviewers are named R1..Rn and review in that order.
  std::size_t n_reviewers = 3;
  std::vector<QuestionSpec> questions;
  // Per-category weights used when a reviewer errs; absent means uniform.
  // Each vector covers the widest question; narrower questions use a prefix.
  std::map<std::string, std::vector<double>> reviewer_bias;
  // Probability reviewer r > 1 copies reviewer r - 1 on a question.
  double anchoring = 0.0;
  // Optional reviewer -> team assignment; must cover every reviewer if set.
  std::map<std::string, std::string> teams;
  // Questions whose answers drive the classification; empty means all.
  std::vector<std::string> classification_questions;
  std::size_t n_periods = 1;
  std::optional<TreatmentSpec> treatment;
  std::uint64_t seed = 0;

  bool operator==(const SimulationConfig&) const = default;
};

// Throws invalid_config naming the offending field.
void validate_config(const SimulationConfig& config);

SimulationConfig parse_simulation_config(const std::string& json_text);
std::string to_json(const SimulationConfig& config);

struct SimulatedPanel {
  ReviewDataset dataset;
  // Product -> classification implied by the latent true answers.
  std::map<std::string, std::string> ground_truth;
};

std::string reviewer_name(std::size_t index);

// Raw records in canonical (product, question, reviewer) order. Products are
// named <prefix>p<period>-<index> and drawn from substreams keyed by
// (seed, stream, period, index), so any product can be regenerated alone.
std::vector<ReviewRecord> simulate_records(const SimulationConfig& config,
                                           std::map<std::string, std::string>& ground_truth,
                                           const std::string& prefix = "",
                                           std::uint64_t stream = 0);

SimulatedPanel simulate_panel(const SimulationConfig& config);

struct ChangePanel {
  ReviewDataset treated;
  ReviewDataset control;
  std::map<std::string, std::string> ground_truth;
  std::int64_t change_period = 0;
};

// Generates both groups over all periods, then moves the treated group's
// post-period classification error rate by the configured delta: correct
// classifications are flipped with probability delta / (1 - e) (or wrong ones
// corrected with probability -delta / e), e being the realized base rate.
ChangePanel inject_review_change(const SimulationConfig& treated,
                                 const SimulationConfig& control);

}  // namespace auditstat

#endif  // AUDITSTAT_SIMULATOR_HPP_
