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

#ifndef AUDITSTAT_CORE_MODEL_HPP_
#define AUDITSTAT_CORE_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace auditstat {

// One reviewer's answer to one rubric question for one product.
struct ReviewRecord {
  std::string product_id;
  std::string reviewer_id;
  std::string question_id;
  std::string answer;
  std::string final_classification;
  std::optional<std::string> team;
  std::optional<std::int64_t> period;

  bool operator==(const ReviewRecord&) const = default;
};

enum class IncompletePolicy { drop, strict };

struct ValidationOptions {
  IncompletePolicy policy = IncompletePolicy::drop;
  // Raters every (product, question) cell must have. Defaults to the number
  // of distinct reviewers in the input.
  std::optional<std::size_t> raters_per_cell;
  // Overrides the observed label union for the listed questions.
  std::map<std::string, std::vector<std::string>> declared_categories;
};

struct DroppedCell {
  std::string product_id;
  std::string question_id;
  std::size_t ratings = 0;

  bool operator==(const DroppedCell&) const = default;
};

struct ValidationSummary {
  std::size_t input_records = 0;
  std::size_t kept_records = 0;
  std::size_t dropped_records = 0;
  std::vector<DroppedCell> dropped_cells;

  bool operator==(const ValidationSummary&) const = default;
};

// Validated long-format panel. Records are held in canonical order
// (product, question, reviewer) and every retained (product, question) cell
// has exactly raters_per_cell() ratings.
class ReviewDataset {
 public:
  const std::vector<ReviewRecord>& records() const { return records_; }
  const std::vector<std::string>& products() const { return products_; }
  const std::vector<std::string>& reviewers() const { return reviewers_; }
  const std::vector<std::string>& questions() const { return questions_; }
  std::size_t raters_per_cell() const { return raters_per_cell_; }
  const ValidationSummary& summary() const { return summary_; }

  // Lexicographically ordered label set for the question; throws
  // unknown_question.
  const std::vector<std::string>& categories(const std::string& question) const;

  bool has_question(const std::string& question) const;
  bool has_teams() const;

  // Records of one (product, question) cell, reviewer-ordered. Empty when the
  // cell was dropped or never existed.
  std::vector<const ReviewRecord*> cell(const std::string& product,
                                        const std::string& question) const;

  friend ReviewDataset validate_dataset(std::vector<ReviewRecord> records,
                                        const ValidationOptions& options);

 private:
  std::vector<ReviewRecord> records_;
  std::vector<std::string> products_;
  std::vector<std::string> reviewers_;
  std::vector<std::string> questions_;
  std::map<std::string, std::vector<std::string>> categories_;
  // (product, question) -> [first, last) index range into records_.
  std::map<std::pair<std::string, std::string>,
           std::pair<std::size_t, std::size_t>>
      cells_;
  std::size_t raters_per_cell_ = 0;
  ValidationSummary summary_;
};

ReviewDataset validate_dataset(std::vector<ReviewRecord> records,
                               const ValidationOptions& options = {});

// N subjects by K categories; every row sums to raters.
struct RatingMatrix {
  std::vector<std::vector<std::size_t>> counts;
  std::size_t raters = 0;
  std::vector<std::string> categories;
  std::vector<std::string> subjects;

  std::size_t n_subjects() const { return counts.size(); }
  std::size_t n_categories() const { return categories.size(); }
};

// Builds and checks a matrix from raw counts (no labels needed).
RatingMatrix make_rating_matrix(std::vector<std::vector<std::size_t>> counts);

RatingMatrix rating_matrix(const ReviewDataset& dataset,
                           const std::string& question);

// Every retained (product, question) cell as one subject over the union of
// all question category labels.
RatingMatrix pooled_rating_matrix(const ReviewDataset& dataset);

struct ContingencyTable {
  std::vector<std::vector<std::size_t>> observed;
  std::vector<std::vector<double>> expected;
  std::vector<std::string> row_labels;
  std::vector<std::string> column_labels;

  std::size_t rows() const { return row_labels.size(); }
  std::size_t columns() const { return column_labels.size(); }
  double grand_total() const;
};

// Computes expected counts from margins; throws degenerate_table when a row
// or column margin is zero or the table is narrower than 2x2.
ContingencyTable make_contingency_table(
    std::vector<std::vector<std::size_t>> observed,
    std::vector<std::string> row_labels = {},
    std::vector<std::string> column_labels = {});

ContingencyTable contingency_from(const ReviewDataset& dataset,
                                  const std::string& question);

}  // namespace auditstat

#endif  // AUDITSTAT_CORE_MODEL_HPP_
