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


#include "auditstat/hypothesis_tests.hpp"

#include <cmath>
#include <numeric>

#include "auditstat/error.hpp"

namespace auditstat {
namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    fail(ErrorCode::invalid_argument, "alpha must lie in (0, 1)");
  }
}

double mean_of(std::span<const double> xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

// Sum of squared deviations from the sample mean.
double centered_ss(std::span<const double> xs, double mean) {
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return ss;
}

void check_finite(std::span<const double> xs) {
  for (double x : xs) {
    if (!std::isfinite(x)) fail(ErrorCode::bad_value, "sample contains a non-finite value");
  }
}

TestResult finish(TestKind kind, double statistic, std::vector<double> df,
                  const Distribution& dist, Tail tail, double alpha) {
  TestResult r;
  r.kind = kind;
  r.statistic = statistic;
  r.df = std::move(df);
  r.tail = tail;
  r.alpha = alpha;
  r.p_value = tail_probability({dist, statistic, tail});
  r.reject_null = r.p_value < alpha;
  return r;
}

}  // namespace

const char* to_string(TestKind kind) {
  switch (kind) {
    case TestKind::chi_square: return "chi_square";
    case TestKind::z: return "z";
    case TestKind::t_one_sample: return "t_one_sample";
    case TestKind::t_two_sample: return "t_two_sample";
    case TestKind::anova_f: return "anova_f";
  }
  return "unknown";
}

const char* to_string(TwoSampleVariant variant) {
  return variant == TwoSampleVariant::pooled ? "pooled" : "welch";
}

TestResult chi_square_independence(const ContingencyTable& table,
                                   const ChiSquareOptions& options) {
  check_alpha(options.alpha);
  const std::size_t rows = table.observed.size();
  const std::size_t cols = rows == 0 ? 0 : table.observed.front().size();
  if (rows < 2 || cols < 2) {
    fail(ErrorCode::degenerate_table, "chi-square test needs at least a 2x2 table");
  }
  if (table.expected.size() != rows) {
    fail(ErrorCode::invalid_argument, "expected counts do not match the table");
  }

  const bool yates = options.yates && rows == 2 && cols == 2;
  double statistic = 0.0;
  std::size_t sparse_cells = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (table.observed[r].size() != cols || table.expected[r].size() != cols) {
      fail(ErrorCode::invalid_argument, "ragged contingency table");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      const double e = table.expected[r][c];
      if (!(e > 0.0)) fail(ErrorCode::degenerate_table, "expected count of zero");
      if (e < 5.0) ++sparse_cells;
      double diff = std::fabs(static_cast<double>(table.observed[r][c]) - e);
      if (yates) diff = std::max(0.0, diff - 0.5);
      statistic += diff * diff / e;
    }
  }
  const double df = static_cast<double>((rows - 1) * (cols - 1));
  auto result = finish(TestKind::chi_square, statistic, {df}, ChiSquare{df}, Tail::upper,
                       options.alpha);
  if (sparse_cells > 0) {
    result.warnings.push_back("expected count below 5 in " + std::to_string(sparse_cells) +
                              " of " + std::to_string(rows * cols) + " cells");
  }
  if (options.yates && !yates) {
    result.warnings.push_back("Yates correction applies to 2x2 tables only; not applied");
  }
  if (yates) result.warnings.push_back("Yates continuity correction applied");
  return result;
}

TestResult one_sample_location_test(std::span<const double> sample, double mu0,
                                    Tail tail, std::optional<double> sigma,
                                    double alpha) {
  check_alpha(alpha);
  check_finite(sample);
  if (sample.empty()) fail(ErrorCode::empty_input, "empty sample");
  const double n = static_cast<double>(sample.size());
  const double mean = mean_of(sample);

  if (sigma) {
    if (!(*sigma > 0.0) || !std::isfinite(*sigma)) {
      fail(ErrorCode::invalid_argument, "known sigma must be positive");
    }
    const double z = (mean - mu0) / (*sigma / std::sqrt(n));
    return finish(TestKind::z, z, {}, StandardNormal{}, tail, alpha);
  }

  if (sample.size() < 2) {
    fail(ErrorCode::invalid_argument, "t test needs at least 2 observations");
  }
  const double s = std::sqrt(centered_ss(sample, mean) / (n - 1.0));
  if (s == 0.0) {
    fail(ErrorCode::zero_variance, "sample standard deviation is zero");
  }
  const double t = (mean - mu0) / (s / std::sqrt(n));
  return finish(TestKind::t_one_sample, t, {n - 1.0}, StudentT{n - 1.0}, tail, alpha);
}

TestResult two_sample_t(std::span<const double> a, std::span<const double> b,
                        TwoSampleVariant variant, Tail tail, double alpha) {
  check_alpha(alpha);
  check_finite(a);
  check_finite(b);
  if (a.size() < 2 || b.size() < 2) {
    fail(ErrorCode::invalid_argument, "two-sample t test needs at least 2 observations per sample");
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double mean_a = mean_of(a);
  const double mean_b = mean_of(b);
  const double ss_a = centered_ss(a, mean_a);
  const double ss_b = centered_ss(b, mean_b);
  if (ss_a == 0.0 && ss_b == 0.0) {
    fail(ErrorCode::zero_variance, "both samples are constant; t statistic undefined");
  }

  double t = 0.0;
  double df = 0.0;
  if (variant == TwoSampleVariant::pooled) {
    df = na + nb - 2.0;
    const double pooled_var = (ss_a + ss_b) / df;
    t = (mean_a - mean_b) / std::sqrt(pooled_var * (1.0 / na + 1.0 / nb));
  } else {
    const double va = ss_a / (na - 1.0) / na;
    const double vb = ss_b / (nb - 1.0) / nb;
    t = (mean_a - mean_b) / std::sqrt(va + vb);
    df = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  }
  return finish(TestKind::t_two_sample, t, {df}, StudentT{df}, tail, alpha);
}

AnovaResult one_way_anova(const std::vector<std::vector<double>>& groups, double alpha) {
  check_alpha(alpha);
  const std::size_t k = groups.size();
  if (k < 2) fail(ErrorCode::invalid_argument, "ANOVA needs at least 2 groups");
  std::size_t n = 0;
  double total = 0.0;
  for (const auto& g : groups) {
    if (g.empty()) fail(ErrorCode::invalid_argument, "ANOVA group is empty");
    check_finite(g);
    n += g.size();
    total += std::accumulate(g.begin(), g.end(), 0.0);
  }
  if (n <= k) fail(ErrorCode::invalid_argument, "ANOVA needs more observations than groups");

  AnovaDecomposition d;
  d.grand_mean = total / static_cast<double>(n);
  for (const auto& g : groups) {
    const double m = mean_of(g);
    d.group_means.push_back(m);
    d.ss_treatment += static_cast<double>(g.size()) * (m - d.grand_mean) * (m - d.grand_mean);
    d.ss_error += centered_ss(g, m);
  }
  d.v1 = static_cast<double>(k - 1);
  d.v2 = static_cast<double>(n - k);
  d.ms_treatment = d.ss_treatment / d.v1;
  d.ms_error = d.ss_error / d.v2;
  if (d.ms_error == 0.0) {
    fail(ErrorCode::zero_variance, "every group is internally constant (MSE = 0)");
  }
  d.f_obs = d.ms_treatment / d.ms_error;

  AnovaResult out;
  out.test = finish(TestKind::anova_f, d.f_obs, {d.v1, d.v2}, FDist{d.v1, d.v2},
                    Tail::upper, alpha);
  out.decomposition = std::move(d);
  return out;
}

}  // namespace auditstat
