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


#ifndef AUDITSTAT_AGREEMENT_HPP_
#define AUDITSTAT_AGREEMENT_HPP_

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "auditstat/core_model.hpp"

namespace auditstat {

struct KappaResult {
  double kappa = 0.0;
  double p_bar = 0.0;    // mean per-subject agreement
  double p_e_bar = 0.0;  // chance agreement from pooled category shares
  std::size_t n_subjects = 0;
  std::size_t n_raters = 0;
  std::size_t n_categories = 0;

  bool operator==(const KappaResult&) const = default;
};

enum class OverallKappaMode { pooled, mean_of_questions };

const char* to_string(OverallKappaMode mode);

struct OverallKappa {
  OverallKappaMode mode = OverallKappaMode::pooled;
  double kappa = 0.0;
  // Full decomposition; present in pooled mode only.
  std::optional<KappaResult> pooled;

  bool operator==(const OverallKappa&) const = default;
};

struct AgreementReport {
  std::map<std::string, KappaResult> per_question;
  // Questions whose kappa could not be computed, with the reason.
  std::map<std::string, std::string> question_errors;
  OverallKappa overall;
  // Fraction of products with identical answers from every reviewer on every
  // question. Absent when no product is complete on all questions.
  std::optional<double> agreement_rate;
  // Per reviewer: share of (cell, other reviewer) pairs with matching answers.
  std::map<std::string, double> reviewer_agreement;
  // Ascending kappa, ties by question id; questions without a kappa last.
  std::vector<std::string> disagreement_ranking;

  bool operator==(const AgreementReport&) const = default;
};

// Throws empty_input when no product has complete ratings on every question.
double agreement_rate(const ReviewDataset& dataset);

// Throws kappa_undefined when every rating falls in a single category.
KappaResult fleiss_kappa(const RatingMatrix& matrix);

std::map<std::string, double> reviewer_agreement(const ReviewDataset& dataset);

// Fails only when no question yields a kappa.
AgreementReport analyze_agreement(const ReviewDataset& dataset,
                                  OverallKappaMode mode = OverallKappaMode::pooled);

}  // namespace auditstat

#endif  // AUDITSTAT_AGREEMENT_HPP_
