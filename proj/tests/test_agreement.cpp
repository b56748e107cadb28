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


#include <algorithm>
#include <chrono>
#include <numeric>
#include <cmath>
#include <random>

#include "auditstat/agreement.hpp"
#include "auditstat/error.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace auditstat;

namespace {

ReviewRecord rec(std::string product, std::string reviewer, std::string question,
                 std::string answer) {
  return {std::move(product), std::move(reviewer), std::move(question),
          std::move(answer), "approve", std::nullopt, std::nullopt};
}

// ratings[i][r] = category chosen by rater r for subject i.
RatingMatrix matrix_of(const std::vector<std::vector<int>>& ratings, int k) {
  std::vector<std::vector<std::size_t>> counts;
  for (const auto& subject : ratings) {
    std::vector<std::size_t> row(static_cast<std::size_t>(k), 0);
    for (int c : subject) ++row[static_cast<std::size_t>(c)];
    counts.push_back(row);
  }
  return make_rating_matrix(counts);
}

std::vector<ReviewRecord> panel_from(const std::vector<std::vector<std::vector<int>>>& answers) {
  // answers[p][q][r]
  std::vector<ReviewRecord> rs;
  for (std::size_t p = 0; p < answers.size(); ++p) {
    for (std::size_t q = 0; q < answers[p].size(); ++q) {
      for (std::size_t r = 0; r < answers[p][q].size(); ++r) {
        rs.push_back(rec("P" + std::to_string(p), "R" + std::to_string(r),
                         "Q" + std::to_string(q), "c" + std::to_string(answers[p][q][r])));
      }
    }
  }
  return rs;
}

}  // namespace

TEST_SUITE("agreement") {

TEST_CASE("golden kappa for {(3,0),(2,1)}") {
  const std::vector<std::vector<int>> ratings = {{0, 0, 0}, {0, 0, 1}};
  const double p_bar = oracle::pairwise_agreement(ratings);
  const double p_e = oracle::chance_agreement(ratings, 2);
  CHECK(std::fabs(p_bar - 2.0 / 3.0) < 1e-15);
  CHECK(std::fabs(p_e - 13.0 / 18.0) < 1e-15);

  const auto start = std::chrono::steady_clock::now();
  auto k = fleiss_kappa(make_rating_matrix({{3, 0}, {2, 1}}));
  const auto elapsed = std::chrono::steady_clock::now() - start;
  CHECK(std::fabs(k.kappa - (-0.2)) <= 1e-12);
  CHECK(std::fabs(k.kappa - (p_bar - p_e) / (1.0 - p_e)) <= 1e-12);
  CHECK(std::fabs(k.p_bar - p_bar) <= 1e-15);
  CHECK(std::fabs(k.p_e_bar - p_e) <= 1e-15);
  CHECK(k.n_subjects == 2);
  CHECK(k.n_raters == 3);
  CHECK(k.n_categories == 2);
  CHECK(elapsed < std::chrono::milliseconds(1));
}

TEST_CASE("unanimous subjects give kappa exactly 1") {
  auto k = fleiss_kappa(make_rating_matrix({{3, 0}, {0, 3}, {3, 0}}));
  CHECK(k.p_bar == 1.0);
  CHECK(k.kappa == 1.0);
}

TEST_CASE("single-category ratings leave kappa undefined") {
  try {
    fleiss_kappa(make_rating_matrix({{3, 0}, {3, 0}}));
    FAIL("expected kappa_undefined");
  } catch (const AuditError& e) {
    CHECK(e.code() == ErrorCode::kappa_undefined);
  }
}

TEST_CASE("pair-enumeration oracle agrees with the count formula") {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 3000; ++trial) {
    const int n_subjects = 1 + static_cast<int>(gen() % 6);
    const int n = 2 + static_cast<int>(gen() % 3);
    const int k = 2 + static_cast<int>(gen() % 2);
    std::vector<std::vector<int>> ratings(static_cast<std::size_t>(n_subjects));
    for (auto& s : ratings) {
      for (int r = 0; r < n; ++r) s.push_back(static_cast<int>(gen() % k));
    }
    const auto m = matrix_of(ratings, k);
    const double p_bar = oracle::pairwise_agreement(ratings);
    const double p_e = oracle::chance_agreement(ratings, k);
    if (std::fabs(p_e - 1.0) < 1e-15) {
      CHECK_THROWS_AS(fleiss_kappa(m), AuditError);
      continue;
    }
    const auto res = fleiss_kappa(m);
    CHECK(std::fabs(res.p_bar - p_bar) <= 1e-14);
    CHECK(std::fabs(res.p_e_bar - p_e) <= 1e-14);
    CHECK(res.kappa <= 1.0);
    CHECK(std::fabs(res.kappa - (res.p_bar - res.p_e_bar) / (1.0 - res.p_e_bar)) <= 1e-12);
  }
}

TEST_CASE("kappa is invariant to subject order, category labels and duplication") {
  std::mt19937_64 gen(32);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 2 + gen() % 4;
    const std::size_t n = 2 + gen() % 5;
    std::vector<std::vector<std::size_t>> counts(3 + gen() % 20, std::vector<std::size_t>(k, 0));
    for (auto& row : counts) {
      for (std::size_t r = 0; r < n; ++r) ++row[gen() % k];
    }
    const auto base = fleiss_kappa(make_rating_matrix(counts));

    auto shuffled = counts;
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    CHECK(std::fabs(fleiss_kappa(make_rating_matrix(shuffled)).kappa - base.kappa) <= 1e-12);

    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), gen);
    auto relabeled = counts;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      for (std::size_t j = 0; j < k; ++j) relabeled[i][perm[j]] = counts[i][j];
    }
    CHECK(std::fabs(fleiss_kappa(make_rating_matrix(relabeled)).kappa - base.kappa) <= 1e-12);

    auto doubled = counts;
    doubled.insert(doubled.end(), counts.begin(), counts.end());
    CHECK(std::fabs(fleiss_kappa(make_rating_matrix(doubled)).kappa - base.kappa) <= 1e-12);
  }
}

TEST_CASE("kappa is invariant to rater identities") {
  std::mt19937_64 gen(33);
  std::vector<std::vector<std::vector<int>>> answers(30, std::vector<std::vector<int>>(1));
  for (auto& p : answers) {
    for (int r = 0; r < 4; ++r) p[0].push_back(static_cast<int>(gen() % 3));
  }
  const double base = fleiss_kappa(rating_matrix(validate_dataset(panel_from(answers)), "Q0")).kappa;
  auto rs = panel_from(answers);
  // Reassign who rated what independently per product.
  for (std::size_t p = 0; p < answers.size(); ++p) {
    std::vector<std::string> names = {"R0", "R1", "R2", "R3"};
    std::shuffle(names.begin(), names.end(), gen);
    for (std::size_t r = 0; r < 4; ++r) rs[p * 4 + r].reviewer_id = names[r];
  }
  CHECK(std::fabs(fleiss_kappa(rating_matrix(validate_dataset(rs), "Q0")).kappa - base) <= 1e-12);
}

TEST_CASE("agreement rate") {
  // Full consensus everywhere.
  CHECK(agreement_rate(validate_dataset(panel_from({{{1, 1, 1}, {0, 0, 0}},
                                                    {{0, 0, 0}, {1, 1, 1}}}))) == 1.0);
  // Every product has a disagreement somewhere.
  CHECK(agreement_rate(validate_dataset(panel_from({{{1, 1, 0}, {0, 0, 0}},
                                                    {{0, 0, 0}, {1, 0, 1}}}))) == 0.0);
  // Four products, two in full consensus.
  const std::vector<std::vector<std::vector<int>>> toy = {
      {{1, 1, 1}, {0, 0, 0}},
      {{1, 0, 1}, {0, 0, 0}},
      {{0, 0, 0}, {1, 1, 1}},
      {{0, 0, 0}, {1, 1, 0}},
  };
  std::size_t consensus = 0;
  for (const auto& product : toy) {
    bool all_same = true;
    for (const auto& q : product) {
      all_same = all_same && std::all_of(q.begin(), q.end(), [&](int a) { return a == q[0]; });
    }
    if (all_same) ++consensus;
  }
  CHECK(static_cast<double>(consensus) / toy.size() == 0.5);
  CHECK(agreement_rate(validate_dataset(panel_from(toy))) == 0.5);
}

TEST_CASE("agreement rate ignores products incomplete on some question") {
  auto rs = panel_from({{{1, 1, 1}, {0, 0, 0}}, {{1, 0, 1}, {0, 0, 0}}});
  rs.pop_back();  // product P1 loses a rating on Q1
  auto ds = validate_dataset(rs);
  CHECK(agreement_rate(ds) == 1.0);
}

TEST_CASE("single question: overall equals that question's kappa in both modes") {
  std::mt19937_64 gen(34);
  std::vector<std::vector<std::vector<int>>> answers(25, std::vector<std::vector<int>>(1));
  for (auto& p : answers) {
    for (int r = 0; r < 3; ++r) p[0].push_back(static_cast<int>(gen() % 2));
  }
  auto ds = validate_dataset(panel_from(answers));
  auto pooled = analyze_agreement(ds, OverallKappaMode::pooled);
  auto mean = analyze_agreement(ds, OverallKappaMode::mean_of_questions);
  const double q = pooled.per_question.at("Q0").kappa;
  CHECK(std::fabs(pooled.overall.kappa - q) <= 1e-12);
  CHECK(std::fabs(mean.overall.kappa - q) <= 1e-12);
  CHECK(pooled.overall.pooled.has_value());
  CHECK_FALSE(mean.overall.pooled.has_value());
}

TEST_CASE("mean_of_questions averages per-question kappas") {
  // Q0 rows (3,0),(0,3),(3,0),(1,2): kappa by hand.
  const std::vector<std::vector<std::vector<int>>> answers = {
      {{0, 0, 0}, {0, 0, 1}},
      {{1, 1, 1}, {0, 0, 0}},
      {{0, 0, 0}, {1, 1, 1}},
      {{0, 1, 1}, {1, 1, 0}},
  };
  auto ds = validate_dataset(panel_from(answers));
  auto report = analyze_agreement(ds, OverallKappaMode::mean_of_questions);
  const double k0 = report.per_question.at("Q0").kappa;
  const double k1 = report.per_question.at("Q1").kappa;
  CHECK(std::fabs(report.overall.kappa - 0.5 * (k0 + k1)) <= 1e-15);

  std::vector<std::vector<int>> q0, q1;
  for (const auto& p : answers) {
    q0.push_back(p[0]);
    q1.push_back(p[1]);
  }
  auto brute = [](const std::vector<std::vector<int>>& r) {
    const double pb = oracle::pairwise_agreement(r);
    const double pe = oracle::chance_agreement(r, 2);
    return (pb - pe) / (1.0 - pe);
  };
  CHECK(std::fabs(k0 - brute(q0)) <= 1e-12);
  CHECK(std::fabs(k1 - brute(q1)) <= 1e-12);
}

TEST_CASE("disagreement ranking: ascending kappa, lexicographic ties, failures last") {
  // Qb and Qc identical patterns (tie), Qa perfect, Qd constant (undefined).
  std::vector<ReviewRecord> rs;
  const std::vector<std::vector<int>> noisy = {{0, 1, 1}, {1, 1, 1}, {0, 0, 1}, {0, 0, 0}};
  for (std::size_t p = 0; p < noisy.size(); ++p) {
    for (std::size_t r = 0; r < 3; ++r) {
      const std::string pid = "P" + std::to_string(p);
      const std::string rid = "R" + std::to_string(r);
      rs.push_back(rec(pid, rid, "Qc", std::to_string(noisy[p][r])));
      rs.push_back(rec(pid, rid, "Qb", std::to_string(noisy[p][r])));
      rs.push_back(rec(pid, rid, "Qa", std::to_string(p % 2)));
      rs.push_back(rec(pid, rid, "Qd", "same"));
    }
  }
  auto report = analyze_agreement(validate_dataset(rs));
  CHECK(report.disagreement_ranking == std::vector<std::string>{"Qb", "Qc", "Qa", "Qd"});
  CHECK(report.question_errors.count("Qd") == 1);
  CHECK(report.per_question.at("Qa").kappa == 1.0);
  auto sorted = report.disagreement_ranking;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == validate_dataset(rs).questions());
}

TEST_CASE("analyze_agreement fails only when no question is computable") {
  auto ds = validate_dataset({rec("A", "r1", "q1", "x"), rec("A", "r2", "q1", "x")});
  CHECK_THROWS_AS(analyze_agreement(ds), AuditError);
}

TEST_CASE("reviewer agreement averages to pooled p_bar") {
  std::mt19937_64 gen(35);
  std::vector<std::vector<std::vector<int>>> answers(40, std::vector<std::vector<int>>(3));
  for (auto& p : answers) {
    for (auto& q : p) {
      for (int r = 0; r < 3; ++r) q.push_back(static_cast<int>(gen() % 3));
    }
  }
  // Reviewer R0 answers at random; the others mostly agree with each other.
  for (auto& p : answers) {
    for (auto& q : p) q[2] = q[1];
  }
  auto report = analyze_agreement(validate_dataset(panel_from(answers)));
  double mean = 0.0;
  for (const auto& [r, a] : report.reviewer_agreement) mean += a;
  mean /= static_cast<double>(report.reviewer_agreement.size());
  CHECK(std::fabs(mean - report.overall.pooled->p_bar) <= 1e-12);
  CHECK(report.reviewer_agreement.at("R0") < report.reviewer_agreement.at("R1"));
}

}
