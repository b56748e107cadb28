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


#ifndef AUDITSTAT_SPECIAL_FUNCTIONS_HPP_
#define AUDITSTAT_SPECIAL_FUNCTIONS_HPP_

#include <variant>

namespace auditstat {

enum class Tail { upper, lower, two_sided };

const char* to_string(Tail tail);

struct ChiSquare {
  double df;
};
struct StudentT {
  double df;
};
struct FDist {
  double df1;
  double df2;
};
struct StandardNormal {};

using Distribution = std::variant<ChiSquare, StudentT, FDist, StandardNormal>;

struct TailProbabilityQuery {
  Distribution distribution;
  double statistic;
  Tail tail;
};

// Natural log of the gamma function for x > 0. Lanczos (g = 7, 9 terms)
// below 10, Stirling series with seven correction terms above.
double log_gamma(double x);

// Regularized incomplete gamma P(s, x) and its complement Q(s, x).
double regularized_gamma_lower(double s, double x);
double regularized_gamma_upper(double s, double x);

// Regularized incomplete beta I_x(a, b).
double regularized_incomplete_beta(double x, double a, double b);

// Tail area of the statistic under the distribution. two_sided is defined for
// the symmetric distributions (t, normal) only and doubles the smaller tail.
double tail_probability(const TailProbabilityQuery& query);

}  // namespace auditstat

#endif  // AUDITSTAT_SPECIAL_FUNCTIONS_HPP_
