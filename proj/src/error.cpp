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


#include "auditstat/error.hpp"

namespace auditstat {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::empty_input: return "empty_input";
    case ErrorCode::empty_identifier: return "empty_identifier";
    case ErrorCode::duplicate_record: return "duplicate_record";
    case ErrorCode::incomplete_cell: return "incomplete_cell";
    case ErrorCode::unknown_question: return "unknown_question";
    case ErrorCode::too_few_raters: return "too_few_raters";
    case ErrorCode::too_few_categories: return "too_few_categories";
    case ErrorCode::empty_matrix: return "empty_matrix";
    case ErrorCode::degenerate_table: return "degenerate_table";
    case ErrorCode::kappa_undefined: return "kappa_undefined";
    case ErrorCode::zero_variance: return "zero_variance";
    case ErrorCode::non_convergence: return "non_convergence";
    case ErrorCode::rank_deficient: return "rank_deficient";
    case ErrorCode::separation: return "separation";
    case ErrorCode::missing_ground_truth: return "missing_ground_truth";
    case ErrorCode::missing_group: return "missing_group";
    case ErrorCode::missing_column: return "missing_column";
    case ErrorCode::bad_value: return "bad_value";
    case ErrorCode::invalid_config: return "invalid_config";
    case ErrorCode::missing_treatment: return "missing_treatment";
  }
  return "unknown";
}

}  // namespace auditstat
