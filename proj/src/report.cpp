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


#include "auditstat/report.hpp"

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <sstream>
#include <utility>

#include "auditstat/error.hpp"
#include "json.hpp"

namespace auditstat {
namespace {

using nlohmann::json;

[[noreturn]] void schema_fail(const std::string& path, const std::string& msg) {
  fail(ErrorCode::bad_value, "report schema: " + path + ": " + msg);
}

double quantize(double v) {
  if (!std::isfinite(v)) return v;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

// ---- scalar conversions ----

json to_j(double v) {
  if (std::isnan(v)) return "NaN";
  if (std::isinf(v)) return v > 0 ? "Infinity" : "-Infinity";
  return quantize(v);
}
json to_j(std::size_t v) { return v; }
json to_j(std::int64_t v) { return v; }
json to_j(int v) { return v; }
json to_j(bool v) { return v; }
json to_j(const std::string& v) { return v; }

void from_j(const json& j, const std::string& path, double& out) {
  if (j.is_number()) {
    out = j.get<double>();
  } else if (j == "NaN") {
    out = NAN;
  } else if (j == "Infinity") {
    out = INFINITY;
  } else if (j == "-Infinity") {
    out = -INFINITY;
  } else {
    schema_fail(path, "expected a number");
  }
}
void from_j(const json& j, const std::string& path, std::size_t& out) {
  if (!j.is_number_unsigned()) schema_fail(path, "expected a non-negative integer");
  out = j.get<std::size_t>();
}
void from_j(const json& j, const std::string& path, std::int64_t& out) {
  if (!j.is_number_integer()) schema_fail(path, "expected an integer");
  out = j.get<std::int64_t>();
}
void from_j(const json& j, const std::string& path, int& out) {
  if (!j.is_number_integer()) schema_fail(path, "expected an integer");
  out = j.get<int>();
}
void from_j(const json& j, const std::string& path, bool& out) {
  if (!j.is_boolean()) schema_fail(path, "expected a boolean");
  out = j.get<bool>();
}
void from_j(const json& j, const std::string& path, std::string& out) {
  if (!j.is_string()) schema_fail(path, "expected a string");
  out = j.get<std::string>();
}

// ---- enums ----

template <typename E, std::size_t N>
void enum_from(const json& j, const std::string& path, E& out, const E (&all)[N]) {
  std::string s;
  from_j(j, path, s);
  for (E e : all) {
    if (s == to_string(e)) {
      out = e;
      return;
    }
  }
  schema_fail(path, "unknown value '" + s + "'");
}

#define AUDITSTAT_ENUM_JSON(Type, ...)                                          \
  json to_j(Type v) { return to_string(v); }                                    \
  void from_j(const json& j, const std::string& path, Type& out) {              \
    static const Type all[] = {__VA_ARGS__};                                    \
    enum_from(j, path, out, all);                                               \
  }

AUDITSTAT_ENUM_JSON(TestKind, TestKind::chi_square, TestKind::z, TestKind::t_one_sample,
                    TestKind::t_two_sample, TestKind::anova_f)
AUDITSTAT_ENUM_JSON(Tail, Tail::upper, Tail::lower, Tail::two_sided)
AUDITSTAT_ENUM_JSON(CiMethod, CiMethod::clopper_pearson, CiMethod::wilson)
AUDITSTAT_ENUM_JSON(OverallKappaMode, OverallKappaMode::pooled,
                    OverallKappaMode::mean_of_questions)
AUDITSTAT_ENUM_JSON(ErrorMetric, ErrorMetric::misclassification, ErrorMetric::disagreement)

#undef AUDITSTAT_ENUM_JSON

// ---- struct field lists ----

template <typename V>
void fields(KappaResult& s, V&& v) {
  v("kappa", s.kappa);
  v("p_bar", s.p_bar);
  v("p_e_bar", s.p_e_bar);
  v("n_subjects", s.n_subjects);
  v("n_raters", s.n_raters);
  v("n_categories", s.n_categories);
}
template <typename V>
void fields(OverallKappa& s, V&& v) {
  v("mode", s.mode);
  v("kappa", s.kappa);
  v("pooled", s.pooled);
}
template <typename V>
void fields(AgreementReport& s, V&& v) {
  v("per_question", s.per_question);
  v("question_errors", s.question_errors);
  v("overall", s.overall);
  v("agreement_rate", s.agreement_rate);
  v("reviewer_agreement", s.reviewer_agreement);
  v("disagreement_ranking", s.disagreement_ranking);
}
template <typename V>
void fields(TestResult& s, V&& v) {
  v("kind", s.kind);
  v("statistic", s.statistic);
  v("df", s.df);
  v("p_value", s.p_value);
  v("tail", s.tail);
  v("alpha", s.alpha);
  v("reject_null", s.reject_null);
  v("warnings", s.warnings);
}
template <typename V>
void fields(AnovaDecomposition& s, V&& v) {
  v("ss_treatment", s.ss_treatment);
  v("ss_error", s.ss_error);
  v("ms_treatment", s.ms_treatment);
  v("ms_error", s.ms_error);
  v("f_obs", s.f_obs);
  v("v1", s.v1);
  v("v2", s.v2);
  v("group_means", s.group_means);
  v("grand_mean", s.grand_mean);
}
template <typename V>
void fields(BinomialInterval& s, V&& v) {
  v("x", s.x);
  v("n", s.n);
  v("level", s.level);
  v("lower", s.lower);
  v("upper", s.upper);
  v("method", s.method);
}
template <typename V>
void fields(FactorCoefficient& s, V&& v) {
  v("column", s.column);
  v("factor", s.factor);
  v("ols", s.ols);
  v("ols_se", s.ols_se);
  v("logistic", s.logistic);
  v("logistic_se", s.logistic_se);
}
template <typename V>
void fields(BiasFactorReport& s, V&& v) {
  v("positive_class", s.positive_class);
  v("factors", s.factors);
  v("units", s.units);
  v("ranked", s.ranked);
  v("ols_intercept", s.ols_intercept);
  v("logistic_intercept", s.logistic_intercept);
  v("model_errors", s.model_errors);
}
template <typename V>
void fields(PeriodValue& s, V&& v) {
  v("period", s.period);
  v("value", s.value);
}
template <typename V>
void fields(DidResult& s, V&& v) {
  v("effect", s.effect);
  v("treated_pre_mean", s.treated_pre_mean);
  v("treated_post_mean", s.treated_post_mean);
  v("control_pre_mean", s.control_pre_mean);
  v("control_post_mean", s.control_post_mean);
  v("counterfactual", s.counterfactual);
  v("treated_series", s.treated_series);
  v("control_series", s.control_series);
  v("bootstrap_se", s.bootstrap_se);
}
template <typename V>
void fields(DroppedCell& s, V&& v) {
  v("product_id", s.product_id);
  v("question_id", s.question_id);
  v("ratings", s.ratings);
}
template <typename V>
void fields(DatasetSummary& s, V&& v) {
  v("input_records", s.input_records);
  v("kept_records", s.kept_records);
  v("dropped_records", s.dropped_records);
  v("products", s.products);
  v("reviewers", s.reviewers);
  v("questions", s.questions);
  v("raters_per_cell", s.raters_per_cell);
  v("dropped_cells", s.dropped_cells);
}
template <typename V>
void fields(TeamComparison& s, V&& v) {
  v("method", s.method);
  v("skip_reason", s.skip_reason);
  v("metric", s.metric);
  v("team_means", s.team_means);
  v("team_units", s.team_units);
  v("test", s.test);
  v("anova", s.anova);
}
template <typename V>
void fields(ErrorExtrapolation& s, V&& v) {
  v("metric", s.metric);
  v("overall", s.overall);
  v("per_reviewer", s.per_reviewer);
}
template <typename V>
void fields(AuditConfigEcho& s, V&& v) {
  v("alpha", s.alpha);
  v("overall_kappa", s.overall_kappa);
  v("ci_method", s.ci_method);
  v("ci_level", s.ci_level);
  v("yates", s.yates);
  v("ground_truth", s.ground_truth);
  v("factors", s.factors);
  v("positive_class", s.positive_class);
  v("change_period", s.change_period);
}
template <typename V>
void fields(SectionError& s, V&& v) {
  v("code", s.code);
  v("message", s.message);
}
template <typename V>
void fields(AuditReport& s, V&& v) {
  v("schema_version", s.schema_version);
  v("toolkit_version", s.toolkit_version);
  v("config", s.config);
  v("dataset", s.dataset);
  v("agreement", s.agreement);
  v("chi_square", s.chi_square);
  v("teams", s.teams);
  v("error_rates", s.error_rates);
  v("bias_factors", s.bias_factors);
  v("did", s.did);
}

template <typename T>
concept Record = requires(T& t) { fields(t, [](const char*, auto&) {}); };

// ---- generic containers ----

template <typename T> json to_j(const std::optional<T>& v);
template <typename T> json to_j(const std::vector<T>& v);
template <typename T> json to_j(const std::map<std::string, T>& v);
template <typename T> json to_j(const Section<T>& v);
template <Record T> json to_j(const T& v);

template <typename T> void from_j(const json& j, const std::string& path, std::optional<T>& out);
template <typename T> void from_j(const json& j, const std::string& path, std::vector<T>& out);
template <typename T>
void from_j(const json& j, const std::string& path, std::map<std::string, T>& out);
template <typename T> void from_j(const json& j, const std::string& path, Section<T>& out);
template <Record T> void from_j(const json& j, const std::string& path, T& out);

template <typename T>
json to_j(const std::optional<T>& v) {
  return v ? to_j(*v) : json(nullptr);
}
template <typename T>
json to_j(const std::vector<T>& v) {
  json a = json::array();
  for (const auto& x : v) a.push_back(to_j(x));
  return a;
}
template <typename T>
json to_j(const std::map<std::string, T>& v) {
  json o = json::object();
  for (const auto& [k, x] : v) o[k] = to_j(x);
  return o;
}
template <typename T>
json to_j(const Section<T>& v) {
  if (v.value) return {{"status", "ok"}, {"result", to_j(*v.value)}};
  return {{"status", "error"}, {"error", to_j(*v.error)}};
}
template <Record T>
json to_j(const T& v) {
  json o = json::object();
  fields(const_cast<T&>(v), [&](const char* key, const auto& member) { o[key] = to_j(member); });
  return o;
}

template <typename T>
void from_j(const json& j, const std::string& path, std::optional<T>& out) {
  if (j.is_null()) {
    out.reset();
  } else {
    out.emplace();
    from_j(j, path, *out);
  }
}
template <typename T>
void from_j(const json& j, const std::string& path, std::vector<T>& out) {
  if (!j.is_array()) schema_fail(path, "expected an array");
  out.assign(j.size(), T{});
  for (std::size_t i = 0; i < j.size(); ++i) {
    from_j(j[i], path + "[" + std::to_string(i) + "]", out[i]);
  }
}
template <typename T>
void from_j(const json& j, const std::string& path, std::map<std::string, T>& out) {
  if (!j.is_object()) schema_fail(path, "expected an object");
  out.clear();
  for (const auto& [k, x] : j.items()) from_j(x, path + "." + k, out[k]);
}

void require_keys(const json& j, const std::string& path, std::initializer_list<std::string> keys) {
  if (!j.is_object()) schema_fail(path, "expected an object");
  for (const auto& k : keys) {
    if (!j.contains(k)) schema_fail(path + "." + k, "missing");
  }
  for (const auto& [k, x] : j.items()) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
      schema_fail(path + "." + k, "unexpected key");
    }
  }
}

template <typename T>
void from_j(const json& j, const std::string& path, Section<T>& out) {
  if (!j.is_object() || !j.contains("status")) schema_fail(path + ".status", "missing");
  std::string status;
  from_j(j["status"], path + ".status", status);
  out = {};
  if (status == "ok") {
    require_keys(j, path, {"status", "result"});
    out.value.emplace();
    from_j(j["result"], path + ".result", *out.value);
  } else if (status == "error") {
    require_keys(j, path, {"status", "error"});
    out.error.emplace();
    from_j(j["error"], path + ".error", *out.error);
  } else {
    schema_fail(path + ".status", "must be 'ok' or 'error'");
  }
}
template <Record T>
void from_j(const json& j, const std::string& path, T& out) {
  if (!j.is_object()) schema_fail(path, "expected an object");
  std::set<std::string> seen;
  fields(out, [&](const char* key, auto& member) {
    auto it = j.find(key);
    if (it == j.end()) schema_fail(path + "." + key, "missing");
    from_j(*it, path + "." + key, member);
    seen.insert(key);
  });
  for (const auto& [k, x] : j.items()) {
    if (!seen.count(k)) schema_fail(path + "." + k, "unexpected key");
  }
}

// ---- audit metrics ----

struct UnitScore {
  std::optional<std::string> team;
  std::string classification;
  double errors = 0.0;
  double trials = 0.0;
  bool seen = false;
};

using UnitKey = std::pair<std::string, std::string>;  // product, reviewer

std::map<UnitKey, UnitScore> unit_scores(
    const ReviewDataset& ds, const std::optional<std::map<std::string, std::string>>& truth) {
  std::map<UnitKey, UnitScore> units;
  for (const auto& r : ds.records()) {
    auto& u = units[{r.product_id, r.reviewer_id}];
    if (!u.seen) {
      u.seen = true;
      u.team = r.team;
      u.classification = r.final_classification;
    } else if (u.classification != r.final_classification) {
      fail(ErrorCode::bad_value, "reviewer " + r.reviewer_id +
                                     " has conflicting classifications for product " +
                                     r.product_id);
    } else if (u.team != r.team) {
      fail(ErrorCode::bad_value, "reviewer " + r.reviewer_id +
                                     " has conflicting teams for product " + r.product_id);
    }
  }
  if (truth) {
    if (truth->empty()) fail(ErrorCode::missing_ground_truth, "ground truth map is empty");
    for (auto& [key, u] : units) {
      auto it = truth->find(key.first);
      if (it == truth->end()) {
        fail(ErrorCode::missing_ground_truth, "no ground truth for product " + key.first);
      }
      u.errors = u.classification != it->second ? 1.0 : 0.0;
      u.trials = 1.0;
    }
    return units;
  }
  // Records are grouped by (product, question), so each cell is contiguous.
  const auto& recs = ds.records();
  for (std::size_t i = 0; i < recs.size();) {
    std::size_t j = i;
    std::map<std::string, std::size_t> tally;
    while (j < recs.size() && recs[j].product_id == recs[i].product_id &&
           recs[j].question_id == recs[i].question_id) {
      ++tally[recs[j].answer];
      ++j;
    }
    // Ties go to the lexicographically first answer.
    std::string mode;
    std::size_t best = 0;
    for (const auto& [answer, count] : tally) {
      if (count > best) {
        best = count;
        mode = answer;
      }
    }
    for (std::size_t k = i; k < j; ++k) {
      auto& u = units[{recs[k].product_id, recs[k].reviewer_id}];
      u.errors += recs[k].answer != mode ? 1.0 : 0.0;
      u.trials += 1.0;
    }
    i = j;
  }
  return units;
}

template <typename T, typename F>
Section<T> guarded(F&& f, std::optional<ErrorCode>& first_error) {
  try {
    return {f(), std::nullopt};
  } catch (const AuditError& e) {
    if (!first_error) first_error = e.code();
    return {std::nullopt, SectionError{to_string(e.code()), e.what()}};
  }
}

// ---- text rendering ----

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt(*v) : "-"; }

void put_test(std::ostringstream& out, const TestResult& t, const std::string& indent) {
  out << indent << to_string(t.kind) << " statistic=" << fmt(t.statistic);
  if (!t.df.empty()) {
    out << " df=";
    for (std::size_t i = 0; i < t.df.size(); ++i) out << (i ? "," : "") << fmt(t.df[i]);
  }
  out << " p=" << fmt(t.p_value) << " (" << to_string(t.tail) << ")"
      << (t.reject_null ? " reject H0" : " retain H0") << " at alpha=" << fmt(t.alpha) << '\n';
  for (const auto& w : t.warnings) out << indent << "  warning: " << w << '\n';
}

void put_error(std::ostringstream& out, const SectionError& e, const std::string& indent) {
  out << indent << "error [" << e.code << "]: " << e.message << '\n';
}

void put_series(std::ostringstream& out, const char* name, const std::vector<PeriodValue>& s) {
  out << "  " << name << " series (period, value):\n";
  for (const auto& pv : s) out << "    " << pv.period << ", " << fmt(pv.value) << '\n';
}

void put_ranking(std::ostringstream& out, const AgreementReport& a) {
  out << "Disagreement ranking (highest disagreement first)\n";
  std::size_t rank = 1;
  for (const auto& q : a.disagreement_ranking) {
    out << "  " << rank++ << ". " << q;
    if (auto it = a.per_question.find(q); it != a.per_question.end()) {
      out << "  kappa=" << fmt(it->second.kappa) << '\n';
    } else {
      out << "  kappa undefined: " << a.question_errors.at(q) << '\n';
    }
  }
}

void put_agreement(std::ostringstream& out, const AgreementReport& a) {
  out << "Agreement\n";
  out << "  overall kappa (" << to_string(a.overall.mode) << ") = " << fmt(a.overall.kappa)
      << '\n';
  out << "  agreement rate = " << fmt_opt(a.agreement_rate) << '\n';
  for (const auto& [rev, v] : a.reviewer_agreement) {
    out << "  reviewer " << rev << " pairwise agreement = " << fmt(v) << '\n';
  }
}

void put_chi_square(std::ostringstream& out,
                    const std::map<std::string, Section<TestResult>>& tests) {
  out << "Chi-square independence (answer x classification)\n";
  for (const auto& [q, s] : tests) {
    out << "  " << q << '\n';
    if (s.ok()) {
      put_test(out, *s.value, "    ");
    } else {
      put_error(out, *s.error, "    ");
    }
  }
}

void put_teams(std::ostringstream& out, const TeamComparison& t) {
  out << "Team comparison\n";
  if (t.method == "skipped") {
    out << "  skipped: " << t.skip_reason.value_or("") << '\n';
    return;
  }
  out << "  method " << t.method << ", metric " << to_string(t.metric) << '\n';
  for (const auto& [team, m] : t.team_means) {
    out << "  team " << team << " mean=" << fmt(m) << " units=" << t.team_units.at(team) << '\n';
  }
  if (t.test) put_test(out, *t.test, "  ");
  if (t.anova) {
    out << "  SSTr=" << fmt(t.anova->ss_treatment) << " SSE=" << fmt(t.anova->ss_error)
        << " MSTr=" << fmt(t.anova->ms_treatment) << " MSE=" << fmt(t.anova->ms_error) << '\n';
  }
}

void put_interval(std::ostringstream& out, const std::string& name, const BinomialInterval& b) {
  out << "  " << name << ": " << b.x << "/" << b.n << " [" << fmt(b.lower) << ", "
      << fmt(b.upper) << "] " << to_string(b.method) << " " << fmt(b.level) << '\n';
}

void put_errors(std::ostringstream& out, const ErrorExtrapolation& e) {
  out << "Error extrapolation\n";
  out << "  metric " << to_string(e.metric) << '\n';
  put_interval(out, "overall", e.overall);
  for (const auto& [rev, b] : e.per_reviewer) put_interval(out, "reviewer " + rev, b);
}

void put_bias(std::ostringstream& out, const BiasFactorReport& b) {
  out << "Bias factors\n";
  out << "  positive class " << b.positive_class << ", units " << b.units << '\n';
  for (const auto& [model, msg] : b.model_errors) {
    out << "  " << model << " failed: " << msg << '\n';
  }
  out << "  column  logistic  ols\n";
  for (const auto& c : b.ranked) {
    out << "  " << c.column << "  " << fmt_opt(c.logistic) << "  " << fmt_opt(c.ols) << '\n';
  }
}

void put_did(std::ostringstream& out, const DidResult& d) {
  out << "Difference-in-differences\n";
  out << "  effect = " << fmt(d.effect) << '\n'
      << "  treated pre/post = " << fmt(d.treated_pre_mean) << " / " << fmt(d.treated_post_mean)
      << '\n'
      << "  control pre/post = " << fmt(d.control_pre_mean) << " / " << fmt(d.control_post_mean)
      << '\n';
  if (d.bootstrap_se) out << "  bootstrap se = " << fmt(*d.bootstrap_se) << '\n';
  put_series(out, "treated", d.treated_series);
  put_series(out, "control", d.control_series);
  put_series(out, "counterfactual", d.counterfactual);
}

template <typename T, typename F>
void put_section(std::ostringstream& out, const char* title, const Section<T>& s, F&& render) {
  out << '\n';
  if (s.ok()) {
    render(out, *s.value);
  } else {
    out << title << '\n';
    put_error(out, *s.error, "  ");
  }
}

std::string render_text(const AuditReport& r) {
  std::ostringstream out;
  out << "auditstat " << r.toolkit_version << " audit report (schema " << r.schema_version
      << ")\n\n";
  if (r.agreement.ok()) {
    put_ranking(out, *r.agreement.value);
  } else {
    out << "Disagreement ranking (highest disagreement first)\n";
    put_error(out, *r.agreement.error, "  ");
  }

  const auto& d = r.dataset;
  out << "\nDataset\n  records " << d.input_records << " (kept " << d.kept_records
      << ", dropped " << d.dropped_records << "), products " << d.products << ", reviewers "
      << d.reviewers << ", questions " << d.questions << ", raters per cell "
      << d.raters_per_cell << '\n';
  for (const auto& c : d.dropped_cells) {
    out << "  dropped cell " << c.product_id << "/" << c.question_id << " with " << c.ratings
        << " ratings\n";
  }

  put_section(out, "Agreement", r.agreement, put_agreement);
  out << '\n';
  put_chi_square(out, r.chi_square);
  put_section(out, "Team comparison", r.teams, put_teams);
  put_section(out, "Error extrapolation", r.error_rates, put_errors);
  put_section(out, "Bias factors", r.bias_factors, put_bias);
  if (r.did) put_section(out, "Difference-in-differences", *r.did, put_did);
  return out.str();
}

template <typename T, typename F>
std::string text_of(const T& v, F&& render) {
  std::ostringstream out;
  render(out, v);
  return out.str();
}

}  // namespace

const char* to_string(ErrorMetric metric) {
  return metric == ErrorMetric::misclassification ? "misclassification" : "disagreement";
}

bool AuditReport::has_errors() const {
  if (!agreement.ok() || !teams.ok() || !error_rates.ok() || !bias_factors.ok()) return true;
  if (did && !did->ok()) return true;
  return std::any_of(chi_square.begin(), chi_square.end(),
                     [](const auto& kv) { return !kv.second.ok(); });
}

TeamComparison compare_teams(const ReviewDataset& ds,
                             const std::optional<std::map<std::string, std::string>>& truth,
                             double alpha, bool force_anova) {
  TeamComparison t;
  t.metric = truth ? ErrorMetric::misclassification : ErrorMetric::disagreement;
  if (!ds.has_teams()) {
    t.method = "skipped";
    t.skip_reason = "no team data";
    return t;
  }
  std::map<std::string, std::vector<double>> groups;
  for (const auto& [key, u] : unit_scores(ds, truth)) {
    if (!u.team) {
      fail(ErrorCode::missing_group,
           "reviewer " + key.second + " has no team for product " + key.first);
    }
    groups[*u.team].push_back(u.errors / u.trials);
  }
  for (const auto& [team, v] : groups) {
    double s = 0.0;
    for (double x : v) s += x;
    t.team_means[team] = s / static_cast<double>(v.size());
    t.team_units[team] = v.size();
  }
  if (groups.size() < 2) {
    t.method = "skipped";
    t.skip_reason = "only one team";
  } else if (groups.size() == 2 && !force_anova) {
    t.method = "two_sample_t";
    t.test = two_sample_t(groups.begin()->second, groups.rbegin()->second,
                          TwoSampleVariant::welch, Tail::two_sided, alpha);
  } else {
    std::vector<std::vector<double>> g;
    for (auto& [team, v] : groups) g.push_back(std::move(v));
    auto res = one_way_anova(g, alpha);
    t.method = "anova";
    t.test = res.test;
    t.anova = res.decomposition;
  }
  return t;
}

ErrorExtrapolation extrapolate_errors(
    const ReviewDataset& ds, const std::optional<std::map<std::string, std::string>>& truth,
    double level, CiMethod method) {
  ErrorExtrapolation e;
  e.metric = truth ? ErrorMetric::misclassification : ErrorMetric::disagreement;
  std::map<std::string, std::pair<std::size_t, std::size_t>> per;
  std::size_t x = 0, n = 0;
  for (const auto& [key, u] : unit_scores(ds, truth)) {
    const auto ex = static_cast<std::size_t>(u.errors), en = static_cast<std::size_t>(u.trials);
    per[key.second].first += ex;
    per[key.second].second += en;
    x += ex;
    n += en;
  }
  e.overall = binomial_ci(x, n, level, method);
  for (const auto& [rev, c] : per) e.per_reviewer[rev] = binomial_ci(c.first, c.second, level, method);
  return e;
}

AuditReport run_audit(const ReviewDataset& ds, const AuditOptions& opt) {
  AuditReport r;
  auto& cfg = r.config;
  cfg.alpha = opt.alpha;
  cfg.overall_kappa = opt.overall_kappa;
  cfg.ci_method = opt.ci_method;
  cfg.ci_level = opt.ci_level;
  cfg.yates = opt.yates;
  cfg.ground_truth = opt.ground_truth.has_value();
  cfg.positive_class = opt.positive_class;
  if (opt.did) cfg.change_period = opt.did->change_period;

  std::vector<Factor> factors = opt.factors;
  if (factors.empty()) {
    for (const auto& q : ds.questions()) factors.push_back({Factor::Kind::question, q});
  }
  for (const auto& f : factors) {
    cfg.factors.push_back(f.kind == Factor::Kind::team ? "team" : f.name);
  }

  const auto& s = ds.summary();
  r.dataset = {s.input_records, s.kept_records, s.dropped_records, ds.products().size(),
               ds.reviewers().size(), ds.questions().size(), ds.raters_per_cell(),
               s.dropped_cells};

  std::optional<ErrorCode> first;
  r.agreement = guarded<AgreementReport>([&] { return analyze_agreement(ds, opt.overall_kappa); },
                                         first);
  bool any_chi_ok = false;
  for (const auto& q : ds.questions()) {
    r.chi_square[q] = guarded<TestResult>(
        [&] { return chi_square_independence(contingency_from(ds, q), {opt.alpha, opt.yates}); },
        first);
    any_chi_ok = any_chi_ok || r.chi_square[q].ok();
  }
  r.teams = guarded<TeamComparison>([&] { return compare_teams(ds, opt.ground_truth, opt.alpha); },
                                    first);
  r.error_rates = guarded<ErrorExtrapolation>(
      [&] { return extrapolate_errors(ds, opt.ground_truth, opt.ci_level, opt.ci_method); },
      first);
  r.bias_factors = guarded<BiasFactorReport>(
      [&] { return bias_factor_report(ds, factors, opt.positive_class); }, first);
  if (opt.did) {
    r.did = guarded<DidResult>([&] { return did_estimate(*opt.did, opt.did_options); }, first);
  }

  const bool all_failed = !r.agreement.ok() && !any_chi_ok && !r.teams.ok() &&
                          !r.error_rates.ok() && !r.bias_factors.ok() &&
                          (!r.did || !r.did->ok());
  if (all_failed) fail(*first, "every audit section failed");
  return parse_report(emit_report(r, ReportFormat::json));
}

std::string emit(const AgreementReport& v, ReportFormat f) {
  if (f == ReportFormat::json) return to_j(v).dump(2) + "\n";
  std::ostringstream out;
  put_ranking(out, v);
  out << '\n';
  put_agreement(out, v);
  return out.str();
}
std::string emit(const std::map<std::string, Section<TestResult>>& v, ReportFormat f) {
  return f == ReportFormat::json ? to_j(v).dump(2) + "\n" : text_of(v, put_chi_square);
}
std::string emit(const TestResult& v, ReportFormat f) {
  if (f == ReportFormat::json) return to_j(v).dump(2) + "\n";
  std::ostringstream out;
  put_test(out, v, "");
  return out.str();
}
std::string emit(const TeamComparison& v, ReportFormat f) {
  return f == ReportFormat::json ? to_j(v).dump(2) + "\n" : text_of(v, put_teams);
}
std::string emit(const BinomialInterval& v, ReportFormat f) {
  if (f == ReportFormat::json) return to_j(v).dump(2) + "\n";
  std::ostringstream out;
  put_interval(out, "interval", v);
  return out.str();
}
std::string emit(const ErrorExtrapolation& v, ReportFormat f) {
  return f == ReportFormat::json ? to_j(v).dump(2) + "\n" : text_of(v, put_errors);
}
std::string emit(const BiasFactorReport& v, ReportFormat f) {
  return f == ReportFormat::json ? to_j(v).dump(2) + "\n" : text_of(v, put_bias);
}
std::string emit(const DidResult& v, ReportFormat f) {
  return f == ReportFormat::json ? to_j(v).dump(2) + "\n" : text_of(v, put_did);
}

std::string emit_report(const AuditReport& report, ReportFormat format) {
  if (format == ReportFormat::text) return render_text(report);
  return to_j(report).dump(2) + "\n";
}

AuditReport parse_report(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::bad_value, std::string("report is not valid JSON: ") + e.what());
  }
  AuditReport r;
  from_j(j, "$", r);
  if (r.schema_version != kSchemaVersion) {
    schema_fail("$.schema_version", "unsupported version " + std::to_string(r.schema_version));
  }
  return r;
}

std::vector<std::string> validate_report_json(const std::string& text) {
  try {
    parse_report(text);
  } catch (const AuditError& e) {
    return {e.what()};
  }
  return {};
}

}  // namespace auditstat
