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


#ifndef AUDITSTAT_ESTIMATION_HPP_
#define AUDITSTAT_ESTIMATION_HPP_

#include <Eigen/Dense>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "auditstat/core_model.hpp"

namespace auditstat {

enum class CiMethod { clopper_pearson, wilson };

const char* to_string(CiMethod method);

struct BinomialInterval {
  std::size_t x = 0;
  std::size_t n = 0;
  double level = 0.95;
  double lower = 0.0;
  double upper = 1.0;
  CiMethod method = CiMethod::clopper_pearson;

  bool operator==(const BinomialInterval&) const = default;
};

// Clopper-Pearson inverts the exact binomial tails by bisection; Wilson is
// the closed-form score interval.
BinomialInterval binomial_ci(std::size_t x, std::size_t n, double level = 0.95,
                             CiMethod method = CiMethod::clopper_pearson);

// Regressors without the intercept; fits prepend a column of ones.
struct DesignMatrix {
  std::vector<std::string> column_names;
  Eigen::MatrixXd values;

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t columns() const { return static_cast<std::size_t>(values.cols()); }
};

enum class ModelKind { ols, logistic };

const char* to_string(ModelKind kind);

struct RegressionFit {
  ModelKind model = ModelKind::ols;
  std::vector<std::string> design_column_names;
  // Intercept first, then one entry per design column.
  std::vector<double> coefficients;
  // NaN for OLS when there are no residual degrees of freedom.
  std::vector<double> standard_errors;
  bool converged = true;
  std::size_t iterations = 0;
  // Residual sum of squares for OLS, log-likelihood for logistic.
  double objective = 0.0;

  bool operator==(const RegressionFit&) const = default;
};

// Least squares through a Householder QR of [1 X]. Throws rank_deficient
// naming the first design column that is a combination of earlier ones.
RegressionFit ols_fit(const DesignMatrix& design, std::span<const double> response);

struct LogisticOptions {
  std::size_t max_iter = 100;
  double tol = 1e-10;
  // Any |coefficient| beyond this is treated as separation.
  double separation_bound = 30.0;
};

// Maximum likelihood by iteratively reweighted least squares. Converged when
// the largest coefficient step falls below tol.
RegressionFit logistic_fit(const DesignMatrix& design, std::span<const int> labels,
                           const LogisticOptions& options = {});

struct Factor {
  enum class Kind { question, team };
  Kind kind = Kind::question;
  std::string name;
};

struct FactorCoefficient {
  std::string column;  // e.g. "Q3=yes"
  std::string factor;  // e.g. "Q3"
  std::optional<double> ols;
  std::optional<double> ols_se;
  std::optional<double> logistic;
  std::optional<double> logistic_se;

  bool operator==(const FactorCoefficient&) const = default;
};

struct BiasFactorReport {
  std::string positive_class;
  std::vector<std::string> factors;
  std::size_t units = 0;
  // Sorted by |logistic coefficient| (OLS when logistic failed), descending.
  std::vector<FactorCoefficient> ranked;
  std::optional<double> ols_intercept;
  std::optional<double> logistic_intercept;
  std::map<std::string, std::string> model_errors;

  bool operator==(const BiasFactorReport&) const = default;
};

// One row per (product, reviewer) with the reviewer's final classification as
// a 0/1 target and one-hot factor columns (reference level = first label).
// With more than two classification labels positive_class must be given.
BiasFactorReport bias_factor_report(const ReviewDataset& dataset,
                                    const std::vector<Factor>& factors,
                                    std::optional<std::string> positive_class = {});

}  // namespace auditstat

#endif  // AUDITSTAT_ESTIMATION_HPP_
