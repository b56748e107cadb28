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


#include "auditstat/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "auditstat/error.hpp"
#include "auditstat/random.hpp"
#include "json.hpp"

namespace auditstat {
namespace {

using nlohmann::json;

std::string padded(char prefix, std::size_t value, std::size_t count) {
  int width = 1;
  for (std::size_t m = count > 0 ? count - 1 : 0; m >= 10; m /= 10) ++width;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%0*zu", prefix, width, value);
  return buf;
}

bool unit_interval(double p) { return p >= 0.0 && p <= 1.0; }

// Majority over category indices; ties go to the lowest index.
std::size_t majority(const std::vector<std::size_t>& votes, std::size_t n_classes) {
  std::vector<std::size_t> tally(n_classes, 0);
  for (auto v : votes) ++tally[v];
  return static_cast<std::size_t>(std::max_element(tally.begin(), tally.end()) - tally.begin());
}

struct Plan {
  std::vector<std::size_t> drivers;  // indices into questions
  std::size_t n_classes = 0;
  std::vector<std::string> reviewers;
  std::vector<std::vector<std::vector<double>>> weights;  // reviewer, question
};

Plan plan_for(const SimulationConfig& c) {
  Plan p;
  if (c.classification_questions.empty()) {
    for (std::size_t q = 0; q < c.questions.size(); ++q) p.drivers.push_back(q);
  } else {
    for (const auto& id : c.classification_questions) {
      for (std::size_t q = 0; q < c.questions.size(); ++q) {
        if (c.questions[q].id == id) p.drivers.push_back(q);
      }
    }
  }
  for (auto q : p.drivers) p.n_classes = std::max(p.n_classes, c.questions[q].n_categories);
  for (std::size_t r = 0; r < c.n_reviewers; ++r) {
    p.reviewers.push_back(reviewer_name(r));
    auto bias = c.reviewer_bias.find(p.reviewers.back());
    std::vector<std::vector<double>> per_q;
    for (const auto& q : c.questions) {
      std::vector<double> w(q.n_categories, 1.0);
      if (bias != c.reviewer_bias.end()) {
        std::copy_n(bias->second.begin(), q.n_categories, w.begin());
        double total = 0.0;
        for (double x : w) total += x;
        if (total == 0.0) std::fill(w.begin(), w.end(), 1.0);
      }
      per_q.push_back(std::move(w));
    }
    p.weights.push_back(std::move(per_q));
  }
  return p;
}

std::string class_label(std::size_t index, std::size_t n_classes) {
  return padded('c', index, n_classes);
}

std::string product_name(const std::string& prefix, std::size_t period, std::size_t index,
                         std::size_t n_products) {
  int width = 6;
  for (std::size_t m = n_products / 1000000; m > 0; m /= 10) ++width;
  char buf[64];
  std::snprintf(buf, sizeof buf, "p%zu-%0*zu", period, width, index);
  return prefix + buf;
}

template <typename T>
T field(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::invalid_config, std::string("config field '") + key + "' has the wrong type");
  }
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
  if (!j.is_object()) fail(ErrorCode::invalid_config, std::string(where) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      fail(ErrorCode::invalid_config, "unknown field '" + key + "' in " + where);
    }
  }
}

}  // namespace

std::string reviewer_name(std::size_t index) { return "R" + std::to_string(index + 1); }

void validate_config(const SimulationConfig& c) {
  auto bad = [](const std::string& msg) { fail(ErrorCode::invalid_config, msg); };
  if (c.n_products == 0) bad("n_products must be positive");
  if (c.n_reviewers == 0) bad("n_reviewers must be positive");
  if (c.questions.empty()) bad("questions must not be empty");
  if (c.n_periods == 0) bad("n_periods must be positive");
  if (!unit_interval(c.anchoring)) bad("anchoring must lie in [0, 1]");
  std::set<std::string> ids;
  std::size_t widest = 0;
  for (const auto& q : c.questions) {
    if (q.id.empty()) bad("question id must not be empty");
    if (!ids.insert(q.id).second) bad("duplicate question id '" + q.id + "'");
    if (q.n_categories < 2) bad("question '" + q.id + "' needs at least 2 categories");
    if (!unit_interval(q.difficulty)) bad("difficulty of '" + q.id + "' must lie in [0, 1]");
    widest = std::max(widest, q.n_categories);
  }
  for (const auto& id : c.classification_questions) {
    if (!ids.count(id)) bad("classification question '" + id + "' is not a configured question");
  }
  std::set<std::string> reviewers;
  for (std::size_t r = 0; r < c.n_reviewers; ++r) reviewers.insert(reviewer_name(r));
  for (const auto& [reviewer, w] : c.reviewer_bias) {
    if (!reviewers.count(reviewer)) bad("reviewer_bias names unknown reviewer '" + reviewer + "'");
    if (w.size() != widest) {
      bad("reviewer_bias for '" + reviewer + "' needs " + std::to_string(widest) + " weights");
    }
    double total = 0.0;
    for (double x : w) {
      if (!(x >= 0.0) || !std::isfinite(x)) bad("reviewer_bias weights must be non-negative");
      total += x;
    }
    if (total == 0.0) bad("reviewer_bias weights for '" + reviewer + "' are all zero");
  }
  if (!c.teams.empty()) {
    for (const auto& [reviewer, team] : c.teams) {
      if (!reviewers.count(reviewer)) bad("teams names unknown reviewer '" + reviewer + "'");
      if (team.empty()) bad("team of '" + reviewer + "' must not be empty");
    }
    if (c.teams.size() != reviewers.size()) bad("teams must assign every reviewer");
  }
  if (c.treatment) {
    const auto& t = *c.treatment;
    if (t.change_period < 1 || t.change_period >= static_cast<std::int64_t>(c.n_periods)) {
      bad("treatment.change_period must leave non-empty pre and post periods");
    }
    if (!(std::fabs(t.error_rate_delta) <= 1.0)) bad("treatment.error_rate_delta must lie in [-1, 1]");
  }
}

SimulationConfig parse_simulation_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::invalid_config, std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j,
             {"n_products", "n_reviewers", "questions", "reviewer_bias", "anchoring", "teams",
              "classification_questions", "n_periods", "treatment", "seed"},
             "config");
  SimulationConfig c;
  c.n_products = field<std::size_t>(j, "n_products", c.n_products);
  c.n_reviewers = field<std::size_t>(j, "n_reviewers", c.n_reviewers);
  c.anchoring = field<double>(j, "anchoring", c.anchoring);
  c.n_periods = field<std::size_t>(j, "n_periods", c.n_periods);
  c.seed = field<std::uint64_t>(j, "seed", c.seed);
  c.reviewer_bias = field<std::map<std::string, std::vector<double>>>(j, "reviewer_bias", {});
  c.teams = field<std::map<std::string, std::string>>(j, "teams", {});
  c.classification_questions =
      field<std::vector<std::string>>(j, "classification_questions", {});
  if (auto it = j.find("questions"); it != j.end()) {
    if (!it->is_array()) fail(ErrorCode::invalid_config, "questions must be an array");
    for (const auto& q : *it) {
      check_keys(q, {"id", "n_categories", "difficulty"}, "question");
      QuestionSpec spec;
      spec.id = field<std::string>(q, "id", "");
      spec.n_categories = field<std::size_t>(q, "n_categories", spec.n_categories);
      spec.difficulty = field<double>(q, "difficulty", spec.difficulty);
      c.questions.push_back(std::move(spec));
    }
  }
  if (auto it = j.find("treatment"); it != j.end() && !it->is_null()) {
    check_keys(*it, {"change_period", "error_rate_delta"}, "treatment");
    TreatmentSpec t;
    t.change_period = field<std::int64_t>(*it, "change_period", t.change_period);
    t.error_rate_delta = field<double>(*it, "error_rate_delta", t.error_rate_delta);
    c.treatment = t;
  }
  validate_config(c);
  return c;
}

std::string to_json(const SimulationConfig& c) {
  json j;
  j["n_products"] = c.n_products;
  j["n_reviewers"] = c.n_reviewers;
  j["anchoring"] = c.anchoring;
  j["n_periods"] = c.n_periods;
  j["seed"] = c.seed;
  j["reviewer_bias"] = c.reviewer_bias;
  j["teams"] = c.teams;
  j["classification_questions"] = c.classification_questions;
  j["questions"] = json::array();
  for (const auto& q : c.questions) {
    j["questions"].push_back(
        {{"id", q.id}, {"n_categories", q.n_categories}, {"difficulty", q.difficulty}});
  }
  if (c.treatment) {
    j["treatment"] = {{"change_period", c.treatment->change_period},
                      {"error_rate_delta", c.treatment->error_rate_delta}};
  }
  return j.dump(2);
}

std::vector<ReviewRecord> simulate_records(const SimulationConfig& c,
                                           std::map<std::string, std::string>& ground_truth,
                                           const std::string& prefix, std::uint64_t stream) {
  validate_config(c);
  const Plan plan = plan_for(c);
  const std::size_t nq = c.questions.size(), nr = c.n_reviewers;

  // Sorted question order for canonical output.
  std::vector<std::size_t> q_order(nq);
  for (std::size_t q = 0; q < nq; ++q) q_order[q] = q;
  std::sort(q_order.begin(), q_order.end(),
            [&](auto a, auto b) { return c.questions[a].id < c.questions[b].id; });
  std::vector<std::size_t> r_order(nr);
  for (std::size_t r = 0; r < nr; ++r) r_order[r] = r;
  std::sort(r_order.begin(), r_order.end(),
            [&](auto a, auto b) { return plan.reviewers[a] < plan.reviewers[b]; });

  std::vector<std::vector<std::string>> labels(nq);
  for (std::size_t q = 0; q < nq; ++q) {
    for (std::size_t k = 0; k < c.questions[q].n_categories; ++k) {
      labels[q].push_back(padded('a', k, c.questions[q].n_categories));
    }
  }

  std::vector<ReviewRecord> out;
  out.reserve(c.n_periods * c.n_products * nq * nr);
  std::vector<std::size_t> truth(nq);
  std::vector<std::vector<std::size_t>> answers(nr, std::vector<std::size_t>(nq));
  std::vector<std::size_t> votes;

  // Products sort by period then zero-padded index, so this loop already
  // emits canonical order.
  for (std::size_t period = 0; period < c.n_periods; ++period) {
    for (std::size_t i = 0; i < c.n_products; ++i) {
      auto rng = SplitMix64::substream(c.seed, stream, period, i);
      for (std::size_t q = 0; q < nq; ++q) truth[q] = rng.below(c.questions[q].n_categories);
      for (std::size_t r = 0; r < nr; ++r) {
        for (std::size_t q = 0; q < nq; ++q) {
          // Fixed draw count per answer keeps streams aligned across configs.
          const double copy_u = rng.uniform();
          const double err_u = rng.uniform();
          const std::size_t noisy = rng.categorical(plan.weights[r][q]);
          if (r > 0 && copy_u < c.anchoring) {
            answers[r][q] = answers[r - 1][q];
          } else if (err_u < c.questions[q].difficulty) {
            answers[r][q] = noisy;
          } else {
            answers[r][q] = truth[q];
          }
        }
      }
      std::vector<std::size_t> verdicts(nr);
      for (std::size_t r = 0; r < nr; ++r) {
        votes.clear();
        for (auto q : plan.drivers) votes.push_back(answers[r][q]);
        verdicts[r] = majority(votes, plan.n_classes);
      }
      votes.clear();
      for (auto q : plan.drivers) votes.push_back(truth[q]);

      const std::string product = product_name(prefix, period, i, c.n_products);
      const std::string consensus = class_label(majority(verdicts, plan.n_classes), plan.n_classes);
      ground_truth[product] = class_label(majority(votes, plan.n_classes), plan.n_classes);
      for (auto q : q_order) {
        for (auto r : r_order) {
          ReviewRecord rec;
          rec.product_id = product;
          rec.reviewer_id = plan.reviewers[r];
          rec.question_id = c.questions[q].id;
          rec.answer = labels[q][answers[r][q]];
          rec.final_classification = consensus;
          if (!c.teams.empty()) rec.team = c.teams.at(plan.reviewers[r]);
          rec.period = static_cast<std::int64_t>(period);
          out.push_back(std::move(rec));
        }
      }
    }
  }
  return out;
}

SimulatedPanel simulate_panel(const SimulationConfig& config) {
  SimulatedPanel p;
  auto records = simulate_records(config, p.ground_truth);
  p.dataset = validate_dataset(std::move(records));
  return p;
}

ChangePanel inject_review_change(const SimulationConfig& treated_cfg,
                                 const SimulationConfig& control_cfg) {
  if (!treated_cfg.treatment) {
    fail(ErrorCode::missing_treatment, "treated config has no treatment block");
  }
  const auto& t = *treated_cfg.treatment;
  if (control_cfg.n_periods != treated_cfg.n_periods) {
    fail(ErrorCode::invalid_config, "treated and control configs need the same n_periods");
  }
  ChangePanel out;
  out.change_period = t.change_period;
  auto treated = simulate_records(treated_cfg, out.ground_truth, "T-", 1);
  auto control = simulate_records(control_cfg, out.ground_truth, "C-", 2);

  // Post-period products of the treated group, as record ranges.
  struct Span {
    std::size_t first, last, index;
  };
  std::vector<Span> post;
  for (std::size_t i = 0, k = 0; i < treated.size(); ++k) {
    std::size_t j = i;
    while (j < treated.size() && treated[j].product_id == treated[i].product_id) ++j;
    if (*treated[i].period >= t.change_period) post.push_back({i, j, k % treated_cfg.n_products});
    i = j;
  }
  double wrong = 0.0;
  for (const auto& s : post) {
    const auto& r = treated[s.first];
    if (r.final_classification != out.ground_truth.at(r.product_id)) wrong += 1.0;
  }
  const double base = wrong / static_cast<double>(post.size());
  const double delta = t.error_rate_delta;
  double p_flip = 0.0;
  if (delta > 0.0) {
    if (delta > 1.0 - base) {
      fail(ErrorCode::invalid_config, "error_rate_delta exceeds the attainable error increase");
    }
    p_flip = delta / (1.0 - base);
  } else if (delta < 0.0) {
    if (-delta > base) {
      fail(ErrorCode::invalid_config, "error_rate_delta exceeds the attainable error decrease");
    }
    p_flip = -delta / base;
  }

  const Plan plan = plan_for(treated_cfg);
  for (const auto& s : post) {
    auto& head = treated[s.first];
    const std::string truth = out.ground_truth.at(head.product_id);
    const bool correct = head.final_classification == truth;
    if (delta == 0.0 || correct != (delta > 0.0)) continue;
    auto rng = SplitMix64::substream(treated_cfg.seed, 3, static_cast<std::uint64_t>(*head.period),
                                     s.index);
    if (!rng.bernoulli(p_flip)) continue;
    std::string relabel = truth;
    if (delta > 0.0) {
      std::size_t truth_index = 0;
      while (class_label(truth_index, plan.n_classes) != truth) ++truth_index;
      std::size_t k = rng.below(plan.n_classes - 1);
      if (k >= truth_index) ++k;
      relabel = class_label(k, plan.n_classes);
    }
    for (std::size_t i = s.first; i < s.last; ++i) treated[i].final_classification = relabel;
  }
  out.treated = validate_dataset(std::move(treated));
  out.control = validate_dataset(std::move(control));
  return out;
}

}  // namespace auditstat
