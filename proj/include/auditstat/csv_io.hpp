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


#ifndef AUDITSTAT_CSV_IO_HPP_
#define AUDITSTAT_CSV_IO_HPP_

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "auditstat/core_model.hpp"
#include "auditstat/did.hpp"

namespace auditstat {

// Comma-delimited text with a header row. Quoted fields may contain commas,
// doubled quotes and line breaks.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  // File line on which each row starts; the header is line 1.
  std::vector<std::size_t> lines;

  std::optional<std::size_t> find(const std::string& name) const;
  // Throws missing_column naming the column.
  std::size_t column(const std::string& name) const;
};

// Throws empty_input on an empty stream and bad_value (citing the line) on a
// row whose field count differs from the header.
CsvTable read_csv(std::istream& in);

// Required columns product_id, reviewer_id, question_id, answer,
// final_classification; optional team and period. Other columns are ignored.
std::vector<ReviewRecord> ingest_csv(std::istream& in);
std::vector<ReviewRecord> ingest_csv_file(const std::string& path);

// Writes the required columns, plus team and period when any record has them.
void write_csv(std::ostream& out, const std::vector<ReviewRecord>& records);

// Columns product_id, ground_truth.
std::map<std::string, std::string> ingest_ground_truth(std::istream& in);

// Columns group (treated|control), period, outcome.
DidPanel ingest_did_panel(std::istream& in, std::int64_t change_period);

// Review rows with an extra group column (treated|control); period required.
struct GroupedReviews {
  std::vector<ReviewRecord> treated;
  std::vector<ReviewRecord> control;
};
GroupedReviews ingest_grouped_reviews(std::istream& in);

// Inverse of ingest_grouped_reviews: treated rows first, then control.
void write_grouped_csv(std::ostream& out, const GroupedReviews& reviews);

// Columns product_id, ground_truth in key order.
void write_ground_truth(std::ostream& out, const std::map<std::string, std::string>& truth);

}  // namespace auditstat

#endif  // AUDITSTAT_CSV_IO_HPP_
