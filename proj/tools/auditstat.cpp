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


// auditstat: reviewer audit statistics from the command line.
//
// Exit status: 0 success, 1 some analysis section failed, 2 invalid input or
// usage.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "auditstat/agreement.hpp"
#include "auditstat/core_model.hpp"
#include "auditstat/csv_io.hpp"
#include "auditstat/did.hpp"
#include "auditstat/error.hpp"
#include "auditstat/estimation.hpp"
#include "auditstat/hypothesis_tests.hpp"
#include "auditstat/report.hpp"
#include "auditstat/simulator.hpp"

namespace {

using namespace auditstat;

constexpr int kOk = 0;
constexpr int kPartial = 1;
constexpr int kInvalid = 2;

struct Flags {
  std::string input;
  std::string output;
  std::string ground_truth;
  std::string did_input;
  std::string config;
  std::string values;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> change_period;
  double alpha = kDefaultAlpha;
  double level = 0.95;
  OverallKappaMode overall_kappa = OverallKappaMode::pooled;
  CiMethod ci_method = CiMethod::clopper_pearson;
  ReportFormat format = ReportFormat::json;
  bool strict = false;
  bool yates = false;
  bool pooled_t = false;
  bool balanced = false;
  std::size_t bootstrap = 0;
  std::vector<std::string> questions;
  std::vector<std::string> factors;
  std::optional<std::string> positive_class;
  std::optional<std::size_t> x;
  std::optional<std::size_t> n;
  std::string ground_truth_out;
};

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::invalid_argument, "cannot open '" + path + "'");
  return in;
}

void write_out(const Flags& f, const std::string& text) {
  if (f.output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(f.output, std::ios::binary);
  if (!out) fail(ErrorCode::invalid_argument, "cannot write '" + f.output + "'");
  out << text;
}

ReviewDataset load(const Flags& f) {
  ValidationOptions opt;
  opt.policy = f.strict ? IncompletePolicy::strict : IncompletePolicy::drop;
  return validate_dataset(ingest_csv_file(f.input), opt);
}

std::optional<std::map<std::string, std::string>> load_truth(const Flags& f) {
  if (f.ground_truth.empty()) return std::nullopt;
  auto in = open_in(f.ground_truth);
  return ingest_ground_truth(in);
}

std::vector<Factor> parse_factors(const std::vector<std::string>& names, const ReviewDataset& ds) {
  std::vector<Factor> out;
  for (const auto& name : names) {
    if (name == "team" && !ds.has_question("team")) {
      out.push_back({Factor::Kind::team, name});
    } else if (ds.has_question(name)) {
      out.push_back({Factor::Kind::question, name});
    } else {
      fail(ErrorCode::unknown_question, "unknown factor '" + name + "'");
    }
  }
  return out;
}

// group,value CSV as groups in label order.
std::map<std::string, std::vector<double>> load_values(const std::string& path) {
  auto in = open_in(path);
  const auto t = read_csv(in);
  const auto g = t.column("group"), v = t.column("value");
  std::map<std::string, std::vector<double>> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(t.rows[r][v], &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != t.rows[r][v].size()) {
      fail(ErrorCode::bad_value, "row " + std::to_string(t.lines[r]) + ": value '" +
                                     t.rows[r][v] + "' is not a number");
    }
    out[t.rows[r][g]].push_back(x);
  }
  return out;
}

int cmd_agreement(const Flags& f) {
  write_out(f, emit(analyze_agreement(load(f), f.overall_kappa), f.format));
  return kOk;
}

int cmd_chisq(const Flags& f) {
  const auto ds = load(f);
  auto questions = f.questions.empty() ? ds.questions() : f.questions;
  std::map<std::string, Section<TestResult>> out;
  bool failed = false;
  for (const auto& q : questions) {
    try {
      out[q].value = chi_square_independence(contingency_from(ds, q), {f.alpha, f.yates});
    } catch (const AuditError& e) {
      out[q].error = SectionError{to_string(e.code()), e.what()};
      failed = true;
    }
  }
  write_out(f, emit(out, f.format));
  return failed ? kPartial : kOk;
}

int cmd_group_test(const Flags& f, bool anova) {
  if (f.values.empty()) {
    if (f.input.empty()) fail(ErrorCode::invalid_argument, "--input or --values is required");
    const auto t = compare_teams(load(f), load_truth(f), f.alpha, anova);
    if (t.method == "skipped") fail(ErrorCode::missing_group, "team test skipped: " + *t.skip_reason);
    if (!anova && t.method != "two_sample_t") {
      fail(ErrorCode::invalid_argument, "ttest needs exactly two teams; use anova");
    }
    write_out(f, emit(t, f.format));
    return kOk;
  }
  const auto groups = load_values(f.values);
  if (anova) {
    std::vector<std::vector<double>> g;
    for (const auto& [name, v] : groups) g.push_back(v);
    write_out(f, emit(one_way_anova(g, f.alpha).test, f.format));
  } else {
    if (groups.size() != 2) fail(ErrorCode::invalid_argument, "ttest needs exactly two groups");
    const auto variant = f.pooled_t ? TwoSampleVariant::pooled : TwoSampleVariant::welch;
    write_out(f, emit(two_sample_t(groups.begin()->second, groups.rbegin()->second, variant,
                                   Tail::two_sided, f.alpha),
                      f.format));
  }
  return kOk;
}

int cmd_ci(const Flags& f) {
  if (f.x && f.n) {
    write_out(f, emit(binomial_ci(*f.x, *f.n, f.level, f.ci_method), f.format));
    return kOk;
  }
  if (f.input.empty()) fail(ErrorCode::invalid_argument, "give --x and --n, or --input");
  write_out(f, emit(extrapolate_errors(load(f), load_truth(f), f.level, f.ci_method), f.format));
  return kOk;
}

int cmd_regress(const Flags& f) {
  const auto ds = load(f);
  auto factors = parse_factors(f.factors.empty() ? ds.questions() : f.factors, ds);
  const auto r = bias_factor_report(ds, factors, f.positive_class);
  write_out(f, emit(r, f.format));
  return r.model_errors.empty() ? kOk : kPartial;
}

DidPanel load_did(const std::string& path, std::int64_t change, const Flags& f) {
  auto in = open_in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  const auto header = read_csv(buf);
  buf.clear();
  buf.seekg(0);
  if (header.find("outcome")) return ingest_did_panel(buf, change);
  const auto truth = load_truth(f);
  if (!truth) fail(ErrorCode::missing_ground_truth, "review-level DiD input needs --ground-truth");
  auto grouped = ingest_grouped_reviews(buf);
  return error_rate_panel(validate_dataset(std::move(grouped.treated)),
                          validate_dataset(std::move(grouped.control)), change, *truth);
}

int cmd_did(const Flags& f) {
  DidOptions opt;
  opt.period_balanced = f.balanced;
  opt.bootstrap_replicates = f.bootstrap;
  opt.bootstrap_seed = f.seed.value_or(0);
  write_out(f, emit(did_estimate(load_did(f.input, *f.change_period, f), opt), f.format));
  return kOk;
}

int cmd_simulate(const Flags& f) {
  SimulationConfig cfg;
  if (!f.config.empty()) {
    auto in = open_in(f.config);
    std::stringstream buf;
    buf << in.rdbuf();
    cfg = parse_simulation_config(buf.str());
  } else {
    cfg.questions = {{"Q1", 2, 0.2}, {"Q2", 2, 0.4}, {"Q3", 3, 0.6}};
  }
  if (f.seed) cfg.seed = *f.seed;
  std::ostringstream out;
  std::map<std::string, std::string> truth;
  if (cfg.treatment) {
    auto control = cfg;
    control.treatment.reset();
    auto panel = inject_review_change(cfg, control);
    truth = std::move(panel.ground_truth);
    write_grouped_csv(out, {panel.treated.records(), panel.control.records()});
  } else {
    write_csv(out, simulate_records(cfg, truth));
  }
  write_out(f, out.str());
  if (!f.ground_truth_out.empty()) {
    std::ofstream gt(f.ground_truth_out, std::ios::binary);
    if (!gt) fail(ErrorCode::invalid_argument, "cannot write '" + f.ground_truth_out + "'");
    write_ground_truth(gt, truth);
  }
  return kOk;
}

int cmd_audit(const Flags& f) {
  const auto ds = load(f);
  AuditOptions opt;
  opt.alpha = f.alpha;
  opt.overall_kappa = f.overall_kappa;
  opt.ci_method = f.ci_method;
  opt.ci_level = f.level;
  opt.yates = f.yates;
  opt.ground_truth = load_truth(f);
  opt.factors = parse_factors(f.factors, ds);
  opt.positive_class = f.positive_class;
  if (!f.did_input.empty()) {
    if (!f.change_period) fail(ErrorCode::invalid_argument, "--did-input needs --change-period");
    opt.did = load_did(f.did_input, *f.change_period, f);
  }
  opt.did_options.period_balanced = f.balanced;
  opt.did_options.bootstrap_replicates = f.bootstrap;
  opt.did_options.bootstrap_seed = f.seed.value_or(0);
  const auto report = run_audit(ds, opt);
  write_out(f, emit_report(report, f.format));
  return report.has_errors() ? kPartial : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reviewer audit statistics: agreement, tests, intervals, bias factors, DiD"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(auditstat::kToolkitVersion));
  Flags f;

  const std::map<std::string, OverallKappaMode> kappa_modes{
      {"pooled", OverallKappaMode::pooled}, {"mean", OverallKappaMode::mean_of_questions}};
  const std::map<std::string, CiMethod> ci_methods{{"clopper-pearson", CiMethod::clopper_pearson},
                                                   {"wilson", CiMethod::wilson}};
  const std::map<std::string, ReportFormat> formats{{"json", ReportFormat::json},
                                                    {"text", ReportFormat::text}};

  auto common = [&](CLI::App* sub) {
    sub->add_option("--format", f.format, "json or text")
        ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
    sub->add_option("--output,-o", f.output, "write to a file instead of stdout");
  };
  auto input = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--input,-i", f.input, "long-format review CSV")
                    ->check(CLI::ExistingFile);
    if (required) opt->required();
    sub->add_flag("--strict", f.strict, "reject incomplete cells instead of dropping them");
  };
  auto alpha = [&](CLI::App* sub) {
    sub->add_option("--alpha", f.alpha, "significance level")->check(CLI::Range(0.0, 1.0));
  };
  auto truth = [&](CLI::App* sub) {
    sub->add_option("--ground-truth", f.ground_truth, "CSV with product_id,ground_truth")
        ->check(CLI::ExistingFile);
  };
  auto ci = [&](CLI::App* sub) {
    sub->add_option("--ci-method", f.ci_method, "clopper-pearson or wilson")
        ->transform(CLI::CheckedTransformer(ci_methods, CLI::ignore_case));
    sub->add_option("--level", f.level, "confidence level")->check(CLI::Range(0.0, 1.0));
  };
  auto kappa = [&](CLI::App* sub) {
    sub->add_option("--overall-kappa", f.overall_kappa, "pooled or mean")
        ->transform(CLI::CheckedTransformer(kappa_modes, CLI::ignore_case));
  };
  auto factors = [&](CLI::App* sub) {
    sub->add_option("--factors", f.factors, "questions (or 'team') to model; default all questions")
        ->delimiter(',');
    sub->add_option("--positive-class", f.positive_class, "classification label coded as 1");
  };
  auto did_flags = [&](CLI::App* sub) {
    sub->add_flag("--balanced", f.balanced, "era means as means of period means");
    sub->add_option("--bootstrap", f.bootstrap, "bootstrap replicates for the effect SE");
    sub->add_option("--seed", f.seed, "bootstrap seed");
  };

  auto* agreement = app.add_subcommand("agreement", "Fleiss kappa per question and overall");
  input(agreement, true);
  kappa(agreement);
  common(agreement);

  auto* chisq = app.add_subcommand("chisq", "chi-square test of answer vs classification");
  input(chisq, true);
  alpha(chisq);
  chisq->add_flag("--yates", f.yates, "continuity correction for 2x2 tables");
  chisq->add_option("--question,-q", f.questions, "question to test (repeatable)");
  common(chisq);

  auto* ttest = app.add_subcommand("ttest", "two-sample t test between two teams or groups");
  input(ttest, false);
  truth(ttest);
  alpha(ttest);
  ttest->add_option("--values", f.values, "CSV with group,value columns")->check(CLI::ExistingFile);
  ttest->add_flag("--pooled", f.pooled_t, "pooled variance instead of Welch (with --values)");
  common(ttest);

  auto* anova = app.add_subcommand("anova", "one-way ANOVA across teams or groups");
  input(anova, false);
  truth(anova);
  alpha(anova);
  anova->add_option("--values", f.values, "CSV with group,value columns")->check(CLI::ExistingFile);
  common(anova);

  auto* cic = app.add_subcommand("ci", "binomial interval for x of n, or for audit error rates");
  input(cic, false);
  truth(cic);
  ci(cic);
  cic->add_option("--x", f.x, "successes");
  cic->add_option("--n", f.n, "trials");
  common(cic);

  auto* regress = app.add_subcommand("regress", "OLS and logistic bias-factor models");
  input(regress, true);
  factors(regress);
  common(regress);

  auto* did = app.add_subcommand("did", "difference-in-differences with counterfactual series");
  did->add_option("--input,-i", f.input, "group,period,outcome CSV or grouped review CSV")
      ->required()
      ->check(CLI::ExistingFile);
  did->add_option("--change-period", f.change_period, "first post period")->required();
  truth(did);
  did_flags(did);
  common(did);

  auto* simulate = app.add_subcommand("simulate", "generate a synthetic review panel as CSV");
  simulate->add_option("--config", f.config, "JSON simulation config")->check(CLI::ExistingFile);
  simulate->add_option("--seed", f.seed, "override the config seed");
  simulate->add_option("--output,-o", f.output, "write to a file instead of stdout");
  simulate->add_option("--ground-truth-out", f.ground_truth_out, "write product ground truth CSV");

  auto* audit = app.add_subcommand("audit", "full audit report");
  input(audit, true);
  truth(audit);
  alpha(audit);
  kappa(audit);
  ci(audit);
  factors(audit);
  audit->add_flag("--yates", f.yates, "continuity correction for 2x2 tables");
  audit->add_option("--did-input", f.did_input, "DiD input CSV")->check(CLI::ExistingFile);
  audit->add_option("--change-period", f.change_period, "first post period for --did-input");
  did_flags(audit);
  common(audit);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalid;
  }

  try {
    if (*agreement) return cmd_agreement(f);
    if (*chisq) return cmd_chisq(f);
    if (*ttest) return cmd_group_test(f, false);
    if (*anova) return cmd_group_test(f, true);
    if (*cic) return cmd_ci(f);
    if (*regress) return cmd_regress(f);
    if (*did) return cmd_did(f);
    if (*simulate) return cmd_simulate(f);
    if (*audit) return cmd_audit(f);
  } catch (const AuditError& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return kInvalid;
  }
  return kInvalid;
}
