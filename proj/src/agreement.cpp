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


#include "auditstat/agreement.hpp"

#include <algorithm>
#include <numeric>

#include "auditstat/error.hpp"

namespace auditstat {

const char* to_string(OverallKappaMode mode) {
  switch (mode) {
    case OverallKappaMode::pooled: return "pooled";
    case OverallKappaMode::mean_of_questions: return "mean_of_questions";
  }
  return "unknown";
}

double agreement_rate(const ReviewDataset& dataset) {
  std::size_t complete = 0;
  std::size_t consensus = 0;
  for (const auto& product : dataset.products()) {
    bool is_complete = true;
    bool unanimous = true;
    for (const auto& q : dataset.questions()) {
      auto cell = dataset.cell(product, q);
      if (cell.empty()) {
        is_complete = false;
        break;
      }
      for (const auto* r : cell) {
        if (r->answer != cell.front()->answer) unanimous = false;
      }
    }
    if (!is_complete) continue;
    ++complete;
    if (unanimous) ++consensus;
  }
  if (complete == 0) {
    fail(ErrorCode::empty_input, "no product is complete on every question");
  }
  return static_cast<double>(consensus) / static_cast<double>(complete);
}

KappaResult fleiss_kappa(const RatingMatrix& matrix) {
  const std::size_t n_subjects = matrix.counts.size();
  if (n_subjects == 0) fail(ErrorCode::empty_matrix, "rating matrix has no subjects");
  const std::size_t k = matrix.counts.front().size();
  const std::size_t n = matrix.raters;
  if (n < 2) fail(ErrorCode::too_few_raters, "Fleiss kappa needs at least 2 raters");
  if (k < 2) fail(ErrorCode::too_few_categories, "Fleiss kappa needs at least 2 categories");

  // Integer accumulation keeps p_bar and p_e_bar to a single rounding each.
  std::size_t agreeing_pairs = 0;
  std::vector<std::size_t> column(k, 0);
  for (std::size_t i = 0; i < n_subjects; ++i) {
    const auto& row = matrix.counts[i];
    if (row.size() != k) {
      fail(ErrorCode::invalid_argument, "ragged rating matrix at row " + std::to_string(i));
    }
    std::size_t sum = 0;
    for (std::size_t j = 0; j < k; ++j) {
      sum += row[j];
      column[j] += row[j];
      if (row[j] > 0) agreeing_pairs += row[j] * (row[j] - 1);
    }
    if (sum != n) {
      fail(ErrorCode::invalid_argument,
           "row " + std::to_string(i) + " does not sum to " + std::to_string(n));
    }
  }
  const std::size_t ratings = n_subjects * n;
  std::size_t sum_sq = 0;
  for (auto c : column) sum_sq += c * c;
  if (sum_sq == ratings * ratings) {
    fail(ErrorCode::kappa_undefined,
         "kappa undefined: every rating falls in one category (p_e_bar = 1)");
  }

  KappaResult r;
  r.n_subjects = n_subjects;
  r.n_raters = n;
  r.n_categories = k;
  r.p_bar = static_cast<double>(agreeing_pairs) /
            (static_cast<double>(n_subjects) * static_cast<double>(n * (n - 1)));
  const double total = static_cast<double>(ratings);
  r.p_e_bar = static_cast<double>(sum_sq) / (total * total);
  r.kappa = (r.p_bar - r.p_e_bar) / (1.0 - r.p_e_bar);
  return r;
}

std::map<std::string, double> reviewer_agreement(const ReviewDataset& dataset) {
  std::map<std::string, std::pair<std::size_t, std::size_t>> tally;  // agree, pairs
  for (const auto& product : dataset.products()) {
    for (const auto& q : dataset.questions()) {
      auto cell = dataset.cell(product, q);
      if (cell.size() < 2) continue;
      for (const auto* a : cell) {
        auto& [agree, pairs] = tally[a->reviewer_id];
        for (const auto* b : cell) {
          if (a == b) continue;
          ++pairs;
          if (a->answer == b->answer) ++agree;
        }
      }
    }
  }
  std::map<std::string, double> out;
  for (const auto& [reviewer, counts] : tally) {
    out[reviewer] = static_cast<double>(counts.first) / static_cast<double>(counts.second);
  }
  return out;
}

AgreementReport analyze_agreement(const ReviewDataset& dataset, OverallKappaMode mode) {
  AgreementReport report;
  for (const auto& q : dataset.questions()) {
    try {
      report.per_question[q] = fleiss_kappa(rating_matrix(dataset, q));
    } catch (const AuditError& e) {
      report.question_errors[q] = std::string(to_string(e.code())) + ": " + e.what();
    }
  }
  if (report.per_question.empty()) {
    fail(ErrorCode::empty_matrix, "no question has a computable kappa");
  }

  report.overall.mode = mode;
  if (mode == OverallKappaMode::pooled) {
    report.overall.pooled = fleiss_kappa(pooled_rating_matrix(dataset));
    report.overall.kappa = report.overall.pooled->kappa;
  } else {
    double sum = 0.0;
    for (const auto& [q, k] : report.per_question) sum += k.kappa;
    report.overall.kappa = sum / static_cast<double>(report.per_question.size());
  }

  try {
    report.agreement_rate = agreement_rate(dataset);
  } catch (const AuditError&) {
    report.agreement_rate.reset();
  }
  report.reviewer_agreement = reviewer_agreement(dataset);

  std::vector<std::string> ranked;
  for (const auto& [q, k] : report.per_question) ranked.push_back(q);
  std::stable_sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
    return report.per_question.at(a).kappa < report.per_question.at(b).kappa;
  });
  for (const auto& [q, err] : report.question_errors) ranked.push_back(q);
  report.disagreement_ranking = std::move(ranked);
  return report;
}

}  // namespace auditstat
