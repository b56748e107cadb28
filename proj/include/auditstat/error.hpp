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

#ifndef AUDITSTAT_ERROR_HPP_
#define AUDITSTAT_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace auditstat {

enum class ErrorCode {
  invalid_argument,
  empty_input,
  empty_identifier,
  duplicate_record,
  incomplete_cell,
  unknown_question,
  too_few_raters,
  too_few_categories,
  empty_matrix,
  degenerate_table,
  kappa_undefined,
  zero_variance,
  non_convergence,
  rank_deficient,
  separation,
  missing_ground_truth,
  missing_group,
  missing_column,
  bad_value,
  invalid_config,
  missing_treatment,
};

const char* to_string(ErrorCode code);

// Every failure the library reports carries a machine-readable code so that
// callers (notably the audit pipeline) can record it as a structured section
// error instead of a bare message.
class AuditError : public std::runtime_error {
 public:
  AuditError(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw AuditError(code, message);
}

}  // namespace auditstat

#endif  // AUDITSTAT_ERROR_HPP_
