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


#include "auditstat/core_model.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <tuple>

#include "auditstat/error.hpp"

namespace auditstat {
namespace {

bool canonical_less(const ReviewRecord& a, const ReviewRecord& b) {
  return std::tie(a.product_id, a.question_id, a.reviewer_id) <
         std::tie(b.product_id, b.question_id, b.reviewer_id);
}

bool same_key(const ReviewRecord& a, const ReviewRecord& b) {
  return a.product_id == b.product_id && a.question_id == b.question_id &&
         a.reviewer_id == b.reviewer_id;
}

std::string describe(const ReviewRecord& r) {
  return "(product=" + r.product_id + ", reviewer=" + r.reviewer_id +
         ", question=" + r.question_id + ")";
}

void check_identifiers(const ReviewRecord& r) {
  if (r.product_id.empty() || r.reviewer_id.empty() || r.question_id.empty()) {
    fail(ErrorCode::empty_identifier, "empty identifier in record " + describe(r));
  }
  if (r.answer.empty()) {
    fail(ErrorCode::empty_identifier, "empty answer in record " + describe(r));
  }
}

std::size_t index_of(const std::vector<std::string>& sorted,
                     const std::string& label) {
  auto it = std::lower_bound(sorted.begin(), sorted.end(), label);
  if (it == sorted.end() || *it != label) {
    fail(ErrorCode::bad_value, "label '" + label + "' not in category space");
  }
  return static_cast<std::size_t>(it - sorted.begin());
}

}  // namespace

const std::vector<std::string>& ReviewDataset::categories(
    const std::string& question) const {
  auto it = categories_.find(question);
  if (it == categories_.end()) {
    fail(ErrorCode::unknown_question, "unknown question '" + question + "'");
  }
  return it->second;
}

bool ReviewDataset::has_question(const std::string& question) const {
  return categories_.count(question) != 0;
}

bool ReviewDataset::has_teams() const {
  return std::any_of(records_.begin(), records_.end(),
                     [](const ReviewRecord& r) { return r.team.has_value(); });
}

std::vector<const ReviewRecord*> ReviewDataset::cell(
    const std::string& product, const std::string& question) const {
  std::vector<const ReviewRecord*> out;
  auto it = cells_.find({product, question});
  if (it == cells_.end()) return out;
  for (std::size_t i = it->second.first; i < it->second.second; ++i) {
    out.push_back(&records_[i]);
  }
  return out;
}

ReviewDataset validate_dataset(std::vector<ReviewRecord> records,
                               const ValidationOptions& options) {
  if (records.empty()) fail(ErrorCode::empty_input, "no review records");
  for (const auto& r : records) check_identifiers(r);

  std::sort(records.begin(), records.end(), canonical_less);
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (same_key(records[i - 1], records[i])) {
      fail(ErrorCode::duplicate_record,
           "duplicate record " + describe(records[i]));
    }
  }

  std::set<std::string> reviewers;
  std::set<std::string> questions;
  for (const auto& r : records) {
    reviewers.insert(r.reviewer_id);
    questions.insert(r.question_id);
  }
  const std::size_t n = options.raters_per_cell.value_or(reviewers.size());
  if (n == 0) fail(ErrorCode::invalid_argument, "raters_per_cell must be >= 1");

  ReviewDataset ds;
  ds.summary_.input_records = records.size();
  ds.raters_per_cell_ = n;
  ds.reviewers_.assign(reviewers.begin(), reviewers.end());
  ds.questions_.assign(questions.begin(), questions.end());

  std::set<std::string> products;
  std::map<std::string, std::set<std::string>> observed;
  for (std::size_t first = 0; first < records.size();) {
    std::size_t last = first + 1;
    while (last < records.size() &&
           records[last].product_id == records[first].product_id &&
           records[last].question_id == records[first].question_id) {
      ++last;
    }
    const std::size_t size = last - first;
    const auto& head = records[first];
    if (size != n) {
      if (options.policy == IncompletePolicy::strict) {
        fail(ErrorCode::incomplete_cell,
             "cell (product=" + head.product_id + ", question=" +
                 head.question_id + ") has " + std::to_string(size) +
                 " ratings, expected " + std::to_string(n));
      }
      ds.summary_.dropped_cells.push_back(
          {head.product_id, head.question_id, size});
      ds.summary_.dropped_records += size;
    } else {
      const std::size_t begin = ds.records_.size();
      for (std::size_t i = first; i < last; ++i) {
        observed[records[i].question_id].insert(records[i].answer);
        ds.records_.push_back(std::move(records[i]));
      }
      const auto& kept = ds.records_[begin];
      ds.cells_[{kept.product_id, kept.question_id}] = {begin, ds.records_.size()};
      products.insert(kept.product_id);
    }
    first = last;
  }
  ds.summary_.kept_records = ds.records_.size();
  ds.products_.assign(products.begin(), products.end());

  for (const auto& q : ds.questions_) {
    const auto& seen = observed[q];
    ds.categories_[q].assign(seen.begin(), seen.end());
  }
  for (const auto& [q, declared] : options.declared_categories) {
    if (!questions.count(q)) {
      fail(ErrorCode::unknown_question,
           "declared categories for unknown question '" + q + "'");
    }
    std::set<std::string> labels(declared.begin(), declared.end());
    for (const auto& label : observed[q]) {
      if (!labels.count(label)) {
        fail(ErrorCode::bad_value, "answer '" + label + "' for question '" + q +
                                       "' is not a declared category");
      }
    }
    ds.categories_[q].assign(labels.begin(), labels.end());
  }
  return ds;
}

RatingMatrix make_rating_matrix(std::vector<std::vector<std::size_t>> counts) {
  if (counts.empty()) fail(ErrorCode::empty_matrix, "rating matrix has no subjects");
  const std::size_t k = counts.front().size();
  if (k < 2) fail(ErrorCode::too_few_categories, "rating matrix needs K >= 2");
  const std::size_t n =
      std::accumulate(counts.front().begin(), counts.front().end(), std::size_t{0});
  if (n < 2) fail(ErrorCode::too_few_raters, "rating matrix needs n >= 2 raters");
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i].size() != k) {
      fail(ErrorCode::invalid_argument, "ragged rating matrix at row " + std::to_string(i));
    }
    if (std::accumulate(counts[i].begin(), counts[i].end(), std::size_t{0}) != n) {
      fail(ErrorCode::invalid_argument,
           "row " + std::to_string(i) + " does not sum to " + std::to_string(n));
    }
  }
  RatingMatrix m;
  m.raters = n;
  for (std::size_t j = 0; j < k; ++j) m.categories.push_back(std::to_string(j));
  for (std::size_t i = 0; i < counts.size(); ++i) m.subjects.push_back(std::to_string(i));
  m.counts = std::move(counts);
  return m;
}

RatingMatrix rating_matrix(const ReviewDataset& dataset,
                           const std::string& question) {
  const auto& cats = dataset.categories(question);
  if (dataset.raters_per_cell() < 2) {
    fail(ErrorCode::too_few_raters,
         "question '" + question + "' has fewer than 2 raters per product");
  }
  RatingMatrix m;
  m.raters = dataset.raters_per_cell();
  m.categories = cats;
  for (const auto& product : dataset.products()) {
    auto ratings = dataset.cell(product, question);
    if (ratings.empty()) continue;
    std::vector<std::size_t> row(cats.size(), 0);
    for (const auto* r : ratings) ++row[index_of(cats, r->answer)];
    m.counts.push_back(std::move(row));
    m.subjects.push_back(product);
  }
  if (m.counts.empty()) {
    fail(ErrorCode::empty_matrix,
         "question '" + question + "' has no complete products");
  }
  if (cats.size() < 2) {
    fail(ErrorCode::too_few_categories,
         "question '" + question + "' has fewer than 2 categories");
  }
  return m;
}

RatingMatrix pooled_rating_matrix(const ReviewDataset& dataset) {
  if (dataset.raters_per_cell() < 2) {
    fail(ErrorCode::too_few_raters, "fewer than 2 raters per product");
  }
  std::set<std::string> labels;
  for (const auto& q : dataset.questions()) {
    const auto& cats = dataset.categories(q);
    labels.insert(cats.begin(), cats.end());
  }
  RatingMatrix m;
  m.raters = dataset.raters_per_cell();
  m.categories.assign(labels.begin(), labels.end());
  if (m.categories.size() < 2) {
    fail(ErrorCode::too_few_categories, "fewer than 2 categories across questions");
  }
  for (const auto& product : dataset.products()) {
    for (const auto& q : dataset.questions()) {
      auto ratings = dataset.cell(product, q);
      if (ratings.empty()) continue;
      std::vector<std::size_t> row(m.categories.size(), 0);
      for (const auto* r : ratings) ++row[index_of(m.categories, r->answer)];
      m.counts.push_back(std::move(row));
      m.subjects.push_back(product + "/" + q);
    }
  }
  if (m.counts.empty()) fail(ErrorCode::empty_matrix, "no complete cells");
  return m;
}

double ContingencyTable::grand_total() const {
  double total = 0.0;
  for (const auto& row : observed) {
    for (auto v : row) total += static_cast<double>(v);
  }
  return total;
}

ContingencyTable make_contingency_table(
    std::vector<std::vector<std::size_t>> observed,
    std::vector<std::string> row_labels,
    std::vector<std::string> column_labels) {
  const std::size_t rows = observed.size();
  const std::size_t cols = rows == 0 ? 0 : observed.front().size();
  for (const auto& row : observed) {
    if (row.size() != cols) fail(ErrorCode::invalid_argument, "ragged contingency table");
  }
  if (row_labels.empty()) {
    for (std::size_t r = 0; r < rows; ++r) row_labels.push_back(std::to_string(r));
  }
  if (column_labels.empty()) {
    for (std::size_t c = 0; c < cols; ++c) column_labels.push_back(std::to_string(c));
  }
  if (row_labels.size() != rows || column_labels.size() != cols) {
    fail(ErrorCode::invalid_argument, "contingency labels do not match table shape");
  }
  if (rows < 2 || cols < 2) {
    fail(ErrorCode::degenerate_table,
         "contingency table is " + std::to_string(rows) + "x" +
             std::to_string(cols) + "; need at least 2x2");
  }

  std::vector<double> row_total(rows, 0.0);
  std::vector<double> col_total(cols, 0.0);
  double grand = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const auto v = static_cast<double>(observed[r][c]);
      row_total[r] += v;
      col_total[c] += v;
      grand += v;
    }
  }
  for (std::size_t r = 0; r < rows; ++r) {
    if (row_total[r] == 0.0) {
      fail(ErrorCode::degenerate_table, "zero margin for row '" + row_labels[r] + "'");
    }
  }
  for (std::size_t c = 0; c < cols; ++c) {
    if (col_total[c] == 0.0) {
      fail(ErrorCode::degenerate_table,
           "zero margin for column '" + column_labels[c] + "'");
    }
  }

  ContingencyTable t;
  t.expected.assign(rows, std::vector<double>(cols, 0.0));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      t.expected[r][c] = row_total[r] * col_total[c] / grand;
    }
  }
  t.observed = std::move(observed);
  t.row_labels = std::move(row_labels);
  t.column_labels = std::move(column_labels);
  return t;
}

ContingencyTable contingency_from(const ReviewDataset& dataset,
                                  const std::string& question) {
  const auto& answers = dataset.categories(question);
  std::set<std::string> classes;
  for (const auto& r : dataset.records()) {
    if (r.question_id != question) continue;
    if (r.final_classification.empty()) {
      fail(ErrorCode::bad_value,
           "record " + describe(r) + " has no final_classification");
    }
    classes.insert(r.final_classification);
  }
  std::vector<std::string> columns(classes.begin(), classes.end());
  std::vector<std::vector<std::size_t>> observed(
      answers.size(), std::vector<std::size_t>(columns.size(), 0));
  for (const auto& r : dataset.records()) {
    if (r.question_id != question) continue;
    ++observed[index_of(answers, r.answer)][index_of(columns, r.final_classification)];
  }
  return make_contingency_table(std::move(observed), answers, std::move(columns));
}

}  // namespace auditstat
