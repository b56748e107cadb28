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


#ifndef AUDITSTAT_REPORT_HPP_
#define AUDITSTAT_REPORT_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "auditstat/agreement.hpp"
#include "auditstat/core_model.hpp"
#include "auditstat/did.hpp"
#include "auditstat/estimation.hpp"
#include "auditstat/hypothesis_tests.hpp"

namespace auditstat {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolkitVersion = "0.1.0";

struct SectionError {
  std::string code;  // ErrorCode name
  std::string message;

  bool operator==(const SectionError&) const = default;
};

// Exactly one of value / error is set.
template <typename T>
struct Section {
  std::optional<T> value;
  std::optional<SectionError> error;

  bool ok() const { return value.has_value(); }
  bool operator==(const Section&) const = default;
};

struct DatasetSummary {
  std::size_t input_records = 0;
  std::size_t kept_records = 0;
  std::size_t dropped_records = 0;
  std::size_t products = 0;
  std::size_t reviewers = 0;
  std::size_t questions = 0;
  std::size_t raters_per_cell = 0;
  std::vector<DroppedCell> dropped_cells;

  bool operator==(const DatasetSummary&) const = default;
};

// Per-unit audit metric: with ground truth, 1 when a (product, reviewer)
// classification is wrong; without it, the share of the unit's answers that
// differ from the modal answer of their cell.
enum class ErrorMetric { misclassification, disagreement };

const char* to_string(ErrorMetric metric);

struct TeamComparison {
  // "two_sample_t", "anova" or "skipped".
  std::string method;
  std::optional<std::string> skip_reason;
  ErrorMetric metric = ErrorMetric::disagreement;
  std::map<std::string, double> team_means;
  std::map<std::string, std::size_t> team_units;
  std::optional<TestResult> test;
  std::optional<AnovaDecomposition> anova;

  bool operator==(const TeamComparison&) const = default;
};

struct ErrorExtrapolation {
  ErrorMetric metric = ErrorMetric::disagreement;
  BinomialInterval overall;
  std::map<std::string, BinomialInterval> per_reviewer;

  bool operator==(const ErrorExtrapolation&) const = default;
};

struct AuditConfigEcho {
  double alpha = kDefaultAlpha;
  OverallKappaMode overall_kappa = OverallKappaMode::pooled;
  CiMethod ci_method = CiMethod::clopper_pearson;
  double ci_level = 0.95;
  bool yates = false;
  bool ground_truth = false;
  std::vector<std::string> factors;
  std::optional<std::string> positive_class;
  std::optional<std::int64_t> change_period;

  bool operator==(const AuditConfigEcho&) const = default;
};

struct AuditReport {
  int schema_version = kSchemaVersion;
  std::string toolkit_version = kToolkitVersion;
  AuditConfigEcho config;
  DatasetSummary dataset;
  Section<AgreementReport> agreement;
  std::map<std::string, Section<TestResult>> chi_square;
  Section<TeamComparison> teams;
  Section<ErrorExtrapolation> error_rates;
  Section<BiasFactorReport> bias_factors;
  std::optional<Section<DidResult>> did;

  // True when any section (or chi-square question) errored.
  bool has_errors() const;
  bool operator==(const AuditReport&) const = default;
};

struct AuditOptions {
  double alpha = kDefaultAlpha;
  OverallKappaMode overall_kappa = OverallKappaMode::pooled;
  CiMethod ci_method = CiMethod::clopper_pearson;
  double ci_level = 0.95;
  bool yates = false;
  std::optional<std::map<std::string, std::string>> ground_truth;
  // Empty means every question.
  std::vector<Factor> factors;
  std::optional<std::string> positive_class;
  std::optional<DidPanel> did;
  DidOptions did_options;
};

// Runs every section independently; a failing section carries its error and
// the rest still run. Throws only when all sections fail. The result is
// canonical: floating-point values are already rounded to 12 significant
// digits, so it survives a JSON round trip unchanged.
AuditReport run_audit(const ReviewDataset& dataset, const AuditOptions& options = {});

// Welch t for two teams, ANOVA for more (or for two when force_anova).
TeamComparison compare_teams(const ReviewDataset& dataset,
                             const std::optional<std::map<std::string, std::string>>& ground_truth,
                             double alpha = kDefaultAlpha, bool force_anova = false);

ErrorExtrapolation extrapolate_errors(
    const ReviewDataset& dataset,
    const std::optional<std::map<std::string, std::string>>& ground_truth,
    double level = 0.95, CiMethod method = CiMethod::clopper_pearson);

enum class ReportFormat { json, text };

// JSON keys are sorted and numbers carry at most 12 significant digits;
// non-finite values are written as the strings "NaN", "Infinity",
// "-Infinity".
std::string emit_report(const AuditReport& report, ReportFormat format);

// Single-section documents for the standalone CLI subcommands, using the
// same number formatting as the full report.
std::string emit(const AgreementReport& value, ReportFormat format);
std::string emit(const std::map<std::string, Section<TestResult>>& value, ReportFormat format);
std::string emit(const TestResult& value, ReportFormat format);
std::string emit(const TeamComparison& value, ReportFormat format);
std::string emit(const BinomialInterval& value, ReportFormat format);
std::string emit(const ErrorExtrapolation& value, ReportFormat format);
std::string emit(const BiasFactorReport& value, ReportFormat format);
std::string emit(const DidResult& value, ReportFormat format);

// Strict inverse of the JSON emitter: unknown or missing keys, wrong types
// and a foreign schema_version throw bad_value naming the JSON path.
AuditReport parse_report(const std::string& json_text);

// Empty when the document conforms to the report schema.
std::vector<std::string> validate_report_json(const std::string& json_text);

}  // namespace auditstat

#endif  // AUDITSTAT_REPORT_HPP_
