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


#include "auditstat/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "auditstat/error.hpp"
#include "auditstat/special_functions.hpp"

namespace auditstat {
namespace {

constexpr double kBisectionTolerance = 1e-12;
constexpr double kRankTolerance = 1e-9;

// Solves f(p) = target for f increasing on [lo, hi].
template <typename F>
double bisect_increasing(F f, double target, double lo, double hi) {
  while (hi - lo > kBisectionTolerance) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Upper normal quantile z with P(Z > z) = tail, by bisection on the normal
// tail kernel.
double normal_upper_quantile(double tail) {
  return bisect_increasing(
      [](double z) { return -tail_probability({StandardNormal{}, z, Tail::upper}); }, -tail,
      -40.0, 40.0);
}

Eigen::MatrixXd with_intercept(const DesignMatrix& design) {
  Eigen::MatrixXd x(design.values.rows(), design.values.cols() + 1);
  x.col(0).setOnes();
  x.rightCols(design.values.cols()) = design.values;
  return x;
}

void check_design(const DesignMatrix& design, std::size_t targets) {
  if (design.column_names.size() != design.columns()) {
    fail(ErrorCode::invalid_argument, "design column names do not match the matrix");
  }
  if (targets != design.rows()) {
    fail(ErrorCode::invalid_argument, "response length does not match design rows");
  }
  if (design.rows() < design.columns() + 1) {
    fail(ErrorCode::invalid_argument, "need at least columns + 1 rows to fit");
  }
  if (!design.values.allFinite()) {
    fail(ErrorCode::bad_value, "design matrix contains non-finite values");
  }
}

// Unpivoted QR: a column that adds nothing beyond the earlier ones shows up
// as a negligible diagonal entry of R.
Eigen::HouseholderQR<Eigen::MatrixXd> checked_qr(const Eigen::MatrixXd& x,
                                                 const DesignMatrix& design) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
  const Eigen::MatrixXd& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double norm = x.col(j).norm();
    if (norm == 0.0 || std::fabs(r(j, j)) <= kRankTolerance * norm) {
      if (j == 0) fail(ErrorCode::rank_deficient, "intercept column is degenerate");
      const auto idx = static_cast<std::size_t>(j - 1);
      fail(ErrorCode::rank_deficient,
           "design column " + std::to_string(idx) + " ('" + design.column_names[idx] +
               "') is constant or a linear combination of earlier columns");
    }
  }
  return qr;
}

std::vector<double> to_vector(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

double sigmoid(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

}  // namespace

const char* to_string(CiMethod method) {
  return method == CiMethod::clopper_pearson ? "clopper_pearson" : "wilson";
}

const char* to_string(ModelKind kind) {
  return kind == ModelKind::ols ? "ols" : "logistic";
}

BinomialInterval binomial_ci(std::size_t x, std::size_t n, double level, CiMethod method) {
  if (n == 0) fail(ErrorCode::invalid_argument, "binomial interval needs n >= 1");
  if (x > n) fail(ErrorCode::invalid_argument, "error count exceeds sample size");
  if (!(level > 0.0 && level < 1.0)) {
    fail(ErrorCode::invalid_argument, "confidence level must lie in (0, 1)");
  }
  BinomialInterval ci;
  ci.x = x;
  ci.n = n;
  ci.level = level;
  ci.method = method;
  const double alpha = 1.0 - level;
  const double xs = static_cast<double>(x);
  const double ns = static_cast<double>(n);

  if (method == CiMethod::clopper_pearson) {
    // P(X >= x; p) = I_p(x, n - x + 1) and P(X <= x; p) = 1 - I_p(x + 1, n - x),
    // both monotone in p.
    ci.lower = x == 0 ? 0.0
                      : bisect_increasing(
                            [&](double p) {
                              return regularized_incomplete_beta(p, xs, ns - xs + 1.0);
                            },
                            0.5 * alpha, 0.0, 1.0);
    ci.upper = x == n ? 1.0
                      : bisect_increasing(
                            [&](double p) {
                              return regularized_incomplete_beta(p, xs + 1.0, ns - xs);
                            },
                            1.0 - 0.5 * alpha, 0.0, 1.0);
    return ci;
  }

  const double z = normal_upper_quantile(0.5 * alpha);
  const double p_hat = xs / ns;
  const double z2n = z * z / ns;
  const double center = (p_hat + 0.5 * z2n) / (1.0 + z2n);
  const double half =
      z / (1.0 + z2n) * std::sqrt(p_hat * (1.0 - p_hat) / ns + z * z / (4.0 * ns * ns));
  ci.lower = x == 0 ? 0.0 : std::clamp(center - half, 0.0, p_hat);
  ci.upper = x == n ? 1.0 : std::clamp(center + half, p_hat, 1.0);
  return ci;
}

RegressionFit ols_fit(const DesignMatrix& design, std::span<const double> response) {
  check_design(design, response.size());
  const Eigen::MatrixXd x = with_intercept(design);
  const Eigen::Map<const Eigen::VectorXd> y(response.data(),
                                            static_cast<Eigen::Index>(response.size()));
  if (!y.allFinite()) fail(ErrorCode::bad_value, "response contains non-finite values");
  const auto qr = checked_qr(x, design);

  const Eigen::VectorXd beta = qr.solve(y);
  const Eigen::VectorXd residual = y - x * beta;
  const auto p = x.cols();
  const Eigen::MatrixXd r =
      qr.matrixQR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  // (X'X)^-1 = R^-1 R^-T
  const Eigen::VectorXd diag = (r_inv * r_inv.transpose()).diagonal();

  RegressionFit fit;
  fit.model = ModelKind::ols;
  fit.design_column_names = design.column_names;
  fit.coefficients = to_vector(beta);
  fit.objective = residual.squaredNorm();
  fit.iterations = 1;
  fit.converged = true;
  const double dof = static_cast<double>(x.rows() - p);
  const double sigma2 =
      dof > 0 ? fit.objective / dof : std::numeric_limits<double>::quiet_NaN();
  for (Eigen::Index j = 0; j < p; ++j) {
    fit.standard_errors.push_back(std::sqrt(sigma2 * diag(j)));
  }
  return fit;
}

RegressionFit logistic_fit(const DesignMatrix& design, std::span<const int> labels,
                           const LogisticOptions& options) {
  check_design(design, labels.size());
  if (options.max_iter == 0 || !(options.tol > 0.0)) {
    fail(ErrorCode::invalid_argument, "logistic fit needs max_iter >= 1 and tol > 0");
  }
  Eigen::VectorXd y(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      fail(ErrorCode::bad_value, "logistic labels must be 0 or 1");
    }
    y(static_cast<Eigen::Index>(i)) = labels[i];
  }
  const Eigen::MatrixXd x = with_intercept(design);
  checked_qr(x, design);

  const auto p = x.cols();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd prob(x.rows());
  Eigen::VectorXd weight(x.rows());
  auto refresh = [&] {
    const Eigen::VectorXd eta = x * beta;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      prob(i) = sigmoid(eta(i));
      weight(i) = prob(i) * (1.0 - prob(i));
    }
  };

  RegressionFit fit;
  fit.model = ModelKind::logistic;
  fit.design_column_names = design.column_names;
  fit.converged = false;
  refresh();
  for (std::size_t it = 1; it <= options.max_iter; ++it) {
    const Eigen::MatrixXd hessian = x.transpose() * weight.asDiagonal() * x;
    const Eigen::VectorXd gradient = x.transpose() * (y - prob);
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(hessian);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
      fail(ErrorCode::separation, "information matrix is singular; labels look separable");
    }
    const Eigen::VectorXd step = ldlt.solve(gradient);
    if (!step.allFinite()) {
      fail(ErrorCode::separation, "Newton step is not finite; labels look separable");
    }
    beta += step;
    fit.iterations = it;
    if (beta.lpNorm<Eigen::Infinity>() > options.separation_bound) {
      fail(ErrorCode::separation,
           "coefficients diverge past " + std::to_string(options.separation_bound) +
               " after " + std::to_string(it) +
               " iterations; the labels are (quasi-)completely separated");
    }
    refresh();
    if (step.lpNorm<Eigen::Infinity>() < options.tol) {
      fit.converged = true;
      break;
    }
  }

  const Eigen::MatrixXd hessian = x.transpose() * weight.asDiagonal() * x;
  const Eigen::MatrixXd cov = hessian.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  fit.coefficients = to_vector(beta);
  for (Eigen::Index j = 0; j < p; ++j) fit.standard_errors.push_back(std::sqrt(cov(j, j)));
  double loglik = 0.0;
  const Eigen::VectorXd eta = x * beta;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    // log(1 + e^eta) computed without overflow.
    const double softplus =
        eta(i) > 0 ? eta(i) + std::log1p(std::exp(-eta(i))) : std::log1p(std::exp(eta(i)));
    loglik += y(i) * eta(i) - softplus;
  }
  fit.objective = loglik;
  return fit;
}

BiasFactorReport bias_factor_report(const ReviewDataset& dataset,
                                    const std::vector<Factor>& factors,
                                    std::optional<std::string> positive_class) {
  if (factors.empty()) fail(ErrorCode::invalid_argument, "no factors requested");

  struct Unit {
    std::string classification;
    std::optional<std::string> team;
    std::map<std::string, std::string> answers;
  };
  std::map<std::pair<std::string, std::string>, Unit> units;
  for (const auto& r : dataset.records()) {
    auto& u = units[{r.product_id, r.reviewer_id}];
    if (u.answers.empty()) {
      u.classification = r.final_classification;
      u.team = r.team;
    } else if (u.classification != r.final_classification) {
      fail(ErrorCode::bad_value, "reviewer " + r.reviewer_id + " has conflicting classifications for product " +
                                     r.product_id);
    }
    u.answers[r.question_id] = r.answer;
  }

  std::set<std::string> classes;
  for (const auto& [key, u] : units) classes.insert(u.classification);
  if (classes.count("")) fail(ErrorCode::bad_value, "records without final_classification");
  if (!positive_class) {
    if (classes.size() != 2) {
      fail(ErrorCode::bad_value, "target has " + std::to_string(classes.size()) +
                                     " labels; name a positive class to binarize it");
    }
    positive_class = *classes.rbegin();
  }

  // Factor levels: reference level is the first label and gets no column.
  std::vector<std::string> columns;
  std::vector<std::string> column_factor;
  std::vector<std::pair<const Factor*, std::string>> column_level;
  std::set<std::string> team_set;
  for (const auto& [key, u] : units) {
    if (u.team) team_set.insert(*u.team);
  }
  BiasFactorReport report;
  for (const auto& f : factors) {
    std::vector<std::string> levels;
    std::string prefix;
    if (f.kind == Factor::Kind::question) {
      levels = dataset.categories(f.name);
      prefix = f.name;
    } else {
      if (team_set.empty()) fail(ErrorCode::missing_column, "no team data for team factor");
      levels.assign(team_set.begin(), team_set.end());
      prefix = "team";
    }
    report.factors.push_back(prefix);
    for (std::size_t l = 1; l < levels.size(); ++l) {
      columns.push_back(prefix + "=" + levels[l]);
      column_factor.push_back(prefix);
      column_level.emplace_back(&f, levels[l]);
    }
  }
  if (columns.empty()) {
    fail(ErrorCode::invalid_argument, "factors have a single level; nothing to fit");
  }

  std::vector<std::vector<double>> rows;
  std::vector<int> target;
  for (const auto& [key, u] : units) {
    std::vector<double> row;
    bool complete = true;
    for (const auto& f : factors) {
      if (f.kind == Factor::Kind::question && !u.answers.count(f.name)) complete = false;
      if (f.kind == Factor::Kind::team && !u.team) complete = false;
    }
    if (!complete) continue;
    for (const auto& [f, level] : column_level) {
      const std::string& value =
          f->kind == Factor::Kind::question ? u.answers.at(f->name) : *u.team;
      row.push_back(value == level ? 1.0 : 0.0);
    }
    rows.push_back(std::move(row));
    target.push_back(u.classification == *positive_class ? 1 : 0);
  }

  DesignMatrix design;
  design.column_names = columns;
  design.values.resize(static_cast<Eigen::Index>(rows.size()),
                       static_cast<Eigen::Index>(columns.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) {
      design.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  std::vector<double> response(target.begin(), target.end());

  report.positive_class = *positive_class;
  report.units = rows.size();
  std::optional<RegressionFit> ols, logit;
  try {
    ols = ols_fit(design, response);
  } catch (const AuditError& e) {
    report.model_errors["ols"] = std::string(to_string(e.code())) + ": " + e.what();
  }
  try {
    logit = logistic_fit(design, target);
    if (!logit->converged) {
      report.model_errors["logistic"] = "non_convergence: iteration limit reached";
      logit.reset();
    }
  } catch (const AuditError& e) {
    report.model_errors["logistic"] = std::string(to_string(e.code())) + ": " + e.what();
  }
  if (!ols && !logit) {
    fail(ErrorCode::non_convergence, "neither model could be fitted: " +
                                         report.model_errors["ols"] + "; " +
                                         report.model_errors["logistic"]);
  }

  for (std::size_t j = 0; j < columns.size(); ++j) {
    FactorCoefficient c;
    c.column = columns[j];
    c.factor = column_factor[j];
    if (ols) {
      c.ols = ols->coefficients[j + 1];
      c.ols_se = ols->standard_errors[j + 1];
    }
    if (logit) {
      c.logistic = logit->coefficients[j + 1];
      c.logistic_se = logit->standard_errors[j + 1];
    }
    report.ranked.push_back(std::move(c));
  }
  if (ols) report.ols_intercept = ols->coefficients[0];
  if (logit) report.logistic_intercept = logit->coefficients[0];
  const bool by_logistic = logit.has_value();
  std::stable_sort(report.ranked.begin(), report.ranked.end(),
                   [&](const FactorCoefficient& a, const FactorCoefficient& b) {
                     const double ka = std::fabs(by_logistic ? *a.logistic : *a.ols);
                     const double kb = std::fabs(by_logistic ? *b.logistic : *b.ols);
                     if (ka != kb) return ka > kb;
                     return a.column < b.column;
                   });
  return report;
}

}  // namespace auditstat
