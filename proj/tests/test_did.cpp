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


#include <cmath>
#include <functional>
#include <random>

#include "auditstat/did.hpp"
#include "auditstat/error.hpp"
#include "doctest.h"

using namespace auditstat;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const AuditError& e) {
    return e.code();
  }
  FAIL("expected an AuditError");
  return ErrorCode::invalid_argument;
}

DidPanel two_by_two(double c_pre, double c_post, double t_pre, double t_post) {
  return {{{DidGroup::control, 0, c_pre},
           {DidGroup::control, 1, c_post},
           {DidGroup::treated, 0, t_pre},
           {DidGroup::treated, 1, t_post}},
          1};
}

// Random multi-period panel with several observations per cell.
DidPanel random_panel(std::mt19937_64& gen) {
  std::uniform_int_distribution<int> periods(2, 6), per_cell(1, 4);
  std::normal_distribution<double> noise(0.0, 3.0);
  DidPanel p;
  const int n = periods(gen);
  p.change_period = std::uniform_int_distribution<int>(1, n - 1)(gen);
  for (auto g : {DidGroup::treated, DidGroup::control}) {
    for (int t = 0; t < n; ++t) {
      const int k = per_cell(gen);
      for (int i = 0; i < k; ++i) p.observations.push_back({g, t, noise(gen)});
    }
  }
  return p;
}

}  // namespace

TEST_SUITE("did") {
  TEST_CASE("parallel trends give zero effect") {
    const auto r = did_estimate(two_by_two(10, 14, 20, 24));
    CHECK(r.effect == 0.0);
    REQUIRE(r.counterfactual.size() == 1);
    CHECK(r.counterfactual[0].period == 1);
    CHECK(r.counterfactual[0].value == doctest::Approx(24.0).epsilon(1e-15));
  }

  TEST_CASE("two by two arithmetic") {
    const auto r = did_estimate(two_by_two(10, 14, 20, 30));
    CHECK(r.effect == 6.0);
    CHECK(r.treated_pre_mean == 20.0);
    CHECK(r.treated_post_mean == 30.0);
    CHECK(r.control_pre_mean == 10.0);
    CHECK(r.control_post_mean == 14.0);
    CHECK(r.counterfactual == std::vector<PeriodValue>{{1, 24.0}});
    CHECK(r.treated_series == std::vector<PeriodValue>{{0, 20.0}, {1, 30.0}});
    CHECK(r.control_series == std::vector<PeriodValue>{{0, 10.0}, {1, 14.0}});
    CHECK_FALSE(r.bootstrap_se.has_value());
  }

  TEST_CASE("era means are over raw observations") {
    // Treated pre: period 0 has {1, 3}, period 1 has {8}. Raw mean 4,
    // period-balanced mean (2 + 8) / 2 = 5.
    DidPanel p{{{DidGroup::treated, 0, 1},
                {DidGroup::treated, 0, 3},
                {DidGroup::treated, 1, 8},
                {DidGroup::treated, 2, 10},
                {DidGroup::control, 0, 0},
                {DidGroup::control, 2, 0}},
               2};
    CHECK(did_estimate(p).treated_pre_mean == 4.0);
    CHECK(did_estimate(p).effect == 6.0);
    DidOptions balanced;
    balanced.period_balanced = true;
    CHECK(did_estimate(p, balanced).treated_pre_mean == 5.0);
    CHECK(did_estimate(p, balanced).effect == 5.0);
  }

  TEST_CASE("effect identity and counterfactual formula on random panels") {
    std::mt19937_64 gen(11);
    for (int rep = 0; rep < 300; ++rep) {
      const auto p = random_panel(gen);
      const auto r = did_estimate(p);
      const double expect = (r.treated_post_mean - r.treated_pre_mean) -
                            (r.control_post_mean - r.control_pre_mean);
      CHECK(std::fabs(r.effect - expect) <= 1e-12);
      for (const auto& cf : r.counterfactual) {
        CHECK(cf.period >= p.change_period);
        double control_t = NAN;
        for (const auto& pv : r.control_series) {
          if (pv.period == cf.period) control_t = pv.value;
        }
        CHECK(std::fabs(cf.value - (r.treated_pre_mean + control_t - r.control_pre_mean)) <= 1e-12);
      }
    }
  }

  TEST_CASE("constant shift and common shocks cancel") {
    std::mt19937_64 gen(12);
    std::normal_distribution<double> shock(0.0, 50.0);
    for (int rep = 0; rep < 300; ++rep) {
      const auto p = random_panel(gen);
      const double base = did_estimate(p).effect;
      const double c = shock(gen);
      std::map<std::int64_t, double> per_period;
      for (std::int64_t t = 0; t < 6; ++t) per_period[t] = shock(gen);

      auto shifted = p;
      for (auto& o : shifted.observations) o.outcome += c;
      CHECK(std::fabs(did_estimate(shifted).effect - base) <= 1e-9);

      // A per-period shock cancels exactly only when both groups weight the
      // periods alike, which the balanced estimator guarantees.
      DidOptions balanced;
      balanced.period_balanced = true;
      const double base_b = did_estimate(p, balanced).effect;
      auto shocked = p;
      for (auto& o : shocked.observations) o.outcome += per_period[o.period];
      CHECK(std::fabs(did_estimate(shocked, balanced).effect - base_b) <= 1e-9);
    }
  }

  TEST_CASE("common shocks cancel under raw means on balanced designs") {
    std::mt19937_64 gen(13);
    std::normal_distribution<double> v(0.0, 5.0);
    for (int rep = 0; rep < 100; ++rep) {
      DidPanel p;
      p.change_period = 2;
      for (auto g : {DidGroup::treated, DidGroup::control}) {
        for (int t = 0; t < 4; ++t) {
          for (int i = 0; i < 3; ++i) p.observations.push_back({g, t, v(gen)});
        }
      }
      const double base = did_estimate(p).effect;
      double shocks[4];
      for (double& s : shocks) s = v(gen) * 10.0;
      for (auto& o : p.observations) o.outcome += shocks[o.period];
      CHECK(std::fabs(did_estimate(p).effect - base) <= 1e-9);
    }
  }

  TEST_CASE("swapping group labels negates the effect") {
    std::mt19937_64 gen(14);
    for (int rep = 0; rep < 200; ++rep) {
      auto p = random_panel(gen);
      const double e = did_estimate(p).effect;
      for (auto& o : p.observations) {
        o.group = o.group == DidGroup::treated ? DidGroup::control : DidGroup::treated;
      }
      CHECK(std::fabs(did_estimate(p).effect + e) <= 1e-12);
    }
  }

  TEST_CASE("counterfactual tracks treated series under exact parallel trends") {
    std::mt19937_64 gen(15);
    std::normal_distribution<double> v(0.0, 10.0);
    for (int rep = 0; rep < 100; ++rep) {
      const double gap = v(gen);
      DidPanel p;
      p.change_period = 3;
      for (int t = 0; t < 7; ++t) {
        const double level = v(gen);
        p.observations.push_back({DidGroup::control, t, level});
        p.observations.push_back({DidGroup::treated, t, level + gap});
      }
      const auto r = did_estimate(p, {true, 0, 0});
      CHECK(std::fabs(r.effect) <= 1e-9);
      REQUIRE(r.counterfactual.size() == 4);
      for (std::size_t i = 0; i < r.counterfactual.size(); ++i) {
        const auto& actual = r.treated_series[3 + i];
        CHECK(r.counterfactual[i].period == actual.period);
        CHECK(std::fabs(r.counterfactual[i].value - actual.value) <= 1e-9);
      }
    }
  }

  TEST_CASE("bootstrap standard error is deterministic and opt-in") {
    std::mt19937_64 gen(16);
    const auto p = random_panel(gen);
    DidOptions opt;
    opt.bootstrap_replicates = 200;
    opt.bootstrap_seed = 7;
    const auto a = did_estimate(p, opt);
    const auto b = did_estimate(p, opt);
    REQUIRE(a.bootstrap_se.has_value());
    CHECK(*a.bootstrap_se == *b.bootstrap_se);
    CHECK(*a.bootstrap_se >= 0.0);
    CHECK(a.effect == did_estimate(p).effect);

    // Constant cells have nothing to resample.
    DidOptions flat = opt;
    CHECK(*did_estimate(two_by_two(1, 2, 3, 9), flat).bootstrap_se == 0.0);
  }

  TEST_CASE("panel errors") {
    CHECK(code_of([] { did_estimate({}); }) == ErrorCode::empty_input);
    CHECK(code_of([] {
            did_estimate({{{DidGroup::treated, 0, 1}, {DidGroup::treated, 1, 1}}, 1});
          }) == ErrorCode::missing_group);
    CHECK(code_of([] {
            auto p = two_by_two(1, 2, 3, 4);
            p.observations.pop_back();  // treated post
            did_estimate(p);
          }) == ErrorCode::missing_group);
    CHECK(code_of([] {
            auto p = two_by_two(1, 2, 3, 4);
            p.change_period = 5;  // no post era
            did_estimate(p);
          }) == ErrorCode::missing_group);
    CHECK(code_of([] { did_estimate(two_by_two(1, NAN, 3, 4)); }) == ErrorCode::bad_value);
  }

  TEST_CASE("error rates from review datasets") {
    auto rec = [](std::string product, std::string reviewer, std::string cls, std::int64_t period) {
      return ReviewRecord{product, reviewer, "Q1", "a", cls, std::nullopt, period};
    };
    // Treated: pre all correct, post one of two reviewers wrong on p3.
    const auto treated = validate_dataset({rec("p1", "R1", "bad", 0), rec("p1", "R2", "bad", 0),
                                           rec("p3", "R1", "good", 1), rec("p3", "R2", "bad", 1)});
    // Control: constant 50% error in both eras.
    const auto control = validate_dataset({rec("p2", "R1", "good", 0), rec("p2", "R2", "bad", 0),
                                           rec("p4", "R1", "good", 1), rec("p4", "R2", "bad", 1)});
    const std::map<std::string, std::string> truth{
        {"p1", "bad"}, {"p2", "bad"}, {"p3", "bad"}, {"p4", "bad"}};
    const auto panel = error_rate_panel(treated, control, 1, truth);
    CHECK(panel.observations.size() == 4);
    const auto r = did_with_error_rates(treated, control, 1, truth);
    CHECK(r.treated_pre_mean == 0.0);
    CHECK(r.treated_post_mean == 0.5);
    CHECK(r.control_pre_mean == 0.5);
    CHECK(r.effect == 0.5);

    // Identical review quality across groups and eras.
    CHECK(did_with_error_rates(control, control, 1, truth).effect == 0.0);

    CHECK(code_of([&] { did_with_error_rates(treated, control, 1, {}); }) ==
          ErrorCode::missing_ground_truth);
    CHECK(code_of([&] {
            did_with_error_rates(treated, control, 1, {{"p1", "bad"}, {"p2", "bad"}});
          }) == ErrorCode::missing_ground_truth);
    const auto no_period =
        validate_dataset({ReviewRecord{"p1", "R1", "Q1", "a", "bad", std::nullopt, std::nullopt}});
    CHECK(code_of([&] { error_rate_panel(no_period, control, 1, truth); }) ==
          ErrorCode::bad_value);
  }
}
