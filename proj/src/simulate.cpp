#include "hazfit/simulate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "hazfit/errors.hpp"
#include "hazfit/stats.hpp"

namespace hazfit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// smallest t in [0, hi] with f(t) <= u for a nonincreasing survival f;
// +inf when even f(hi) > u
double invert_survival(const std::function<double(double)>& f, double u, double hi) {
  if (f(hi) > u) return kInf;
  double lo = 0.0, h = hi;
  for (int it = 0; it < 200 && h - lo > 1e-13 * (1.0 + h); ++it) {
    const double mid = 0.5 * (lo + h);
    if (f(mid) > u)
      lo = mid;
    else
      h = mid;
  }
  return 0.5 * (lo + h);
}

// smallest t in [0, hi] with A0(t) >= e; +inf when A0(hi) < e
double invert_cumulative(const std::function<double(double)>& a0, double e, double hi) {
  if (a0(hi) < e) return kInf;
  double lo = 0.0, h = hi;
  for (int it = 0; it < 200 && h - lo > 1e-13 * (1.0 + h); ++it) {
    const double mid = 0.5 * (lo + h);
    if (a0(mid) < e)
      lo = mid;
    else
      h = mid;
  }
  return 0.5 * (lo + h);
}

}  // namespace

SurvivalRecord simulate_record(const TruthSpec& truth, double T, Rng& rng) {
  SurvivalRecord r;
  double scale = 1.0;
  if (truth.has_covariates()) {
    const double u = rng.uniform();
    double cum = 0.0;
    std::size_t pick = truth.covariate_points.size() - 1;
    for (std::size_t k = 0; k < truth.covariate_probs.size(); ++k) {
      cum += truth.covariate_probs[k];
      if (u <= cum) {
        pick = k;
        break;
      }
    }
    r.z = truth.covariate_points[pick];
    scale = truth.h0(r.z);
  }
  const double e = rng.exponential(1.0);
  const double lifetime = invert_cumulative(truth.A0, e / scale, T * (1.0 + 1e-12));
  const double uc = rng.uniform();
  const double censor = uc >= truth.censor_survival(0.0)
                            ? 0.0
                            : invert_survival(truth.censor_survival, uc, T * (1.0 + 1e-12));
  const double x = std::min(lifetime, censor);
  if (x > T || x == kInf) {
    r.x = T;
    r.delta = 0;
  } else {
    r.x = x;
    r.delta = lifetime <= censor ? 1 : 0;
  }
  return r;
}

SurvivalDataset simulate_sample(const TruthSpec& truth, std::size_t n, double T,
                                std::uint64_t seed) {
  if (n < 1) throw ValidationError("simulate_sample needs n >= 1");
  truth.validate(T);
  const Rng root(seed);
  std::vector<SurvivalRecord> recs(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = root.stream(i);
    recs[i] = simulate_record(truth, T, rng);
  }
  return SurvivalDataset(std::move(recs), T);
}

Vec efficiency_5B_analytic(double g, double eps, double theta0) {
  const double t2 = theta0 * theta0;
  // all three follow from n Var = theta0^2 ∫ w^2 y alpha / (∫ w y alpha)^2
  // with w = 1, 1/G, 1/y; the first reduces to t2/(1-eps) when g = 0
  const double v1 = t2 * (1.0 + g) / (1.0 - std::pow(eps, 1.0 + g));
  double v2;
  if (std::fabs(1.0 - g) < 1e-12)
    v2 = t2 * (-std::log(eps)) / ((1.0 - eps) * (1.0 - eps));
  else
    v2 = t2 / (1.0 - g) * (1.0 - std::pow(eps, 1.0 - g)) / ((1.0 - eps) * (1.0 - eps));
  const double l = std::log(1.0 / eps);
  const double v3 = t2 / (1.0 + g) * (std::pow(1.0 / eps, 1.0 + g) - 1.0) / (l * l);
  return {v1, v2, v3};
}

EfficiencyStudyResult efficiency_study_5B(double g, double eps, std::size_t n, int reps,
                                          std::uint64_t seed, double theta0, Exec exec) {
  if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("eps must lie in (0,1)");
  if (reps < 2) throw ValidationError("efficiency study needs reps >= 2");
  const double T = std::log(1.0 / eps) / theta0;
  const TruthSpec truth = with_exponential_censoring(exponential_truth(theta0), g * theta0);
  const auto fam = make_family("exponential");
  const Rng root(seed);

  std::vector<std::array<double, 3>> rows(static_cast<std::size_t>(reps),
                                          {std::nan(""), std::nan(""), std::nan("")});
  parallel_for(static_cast<std::size_t>(reps), exec, [&](std::size_t r) {
    const SurvivalDataset ds =
        simulate_sample(truth, n, T, root.stream(r).next_u64());
    try {
      rows[r][0] = fit_ml(ds, *fam, WeightPlan::unit()).theta_hat[0];
      rows[r][1] = fit_ml(ds, *fam, WeightPlan::inverse_censoring_km()).theta_hat[0];
      rows[r][2] = fit_ml(ds, *fam, WeightPlan::inverse_yhat()).theta_hat[0];
    } catch (const Error&) {
      rows[r] = {std::nan(""), std::nan(""), std::nan("")};
    }
  });

  EfficiencyStudyResult out;
  out.analytic = efficiency_5B_analytic(g, eps, theta0);
  out.empirical.assign(3, 0.0);
  for (int j = 0; j < 3; ++j) {
    std::vector<double> col;
    for (const auto& row : rows)
      if (!std::isnan(row[static_cast<std::size_t>(j)]))
        col.push_back(row[static_cast<std::size_t>(j)]);
    if (col.size() < 2) throw NumericError("too few converged replications");
    out.empirical[static_cast<std::size_t>(j)] = static_cast<double>(n) * variance(col);
    if (j == 0) out.failures = reps - static_cast<int>(col.size());
  }
  return out;
}

ScenarioResult coverage_study(const TruthSpec& truth, const HazardFamily& fam, std::size_t n,
                              int reps, const std::vector<double>& levels, std::uint64_t seed,
                              double T, const WeightPlan& weight, Exec exec) {
  if (reps < 1) throw ValidationError("coverage study needs reps >= 1");
  truth.validate(T);

  // population weight matching the plan; the oracle wants the limit w(s)
  std::function<double(double)> w_pop = [](double) { return 1.0; };
  if (weight.kind == WeightKind::inverse_censoring_km)
    w_pop = [&truth](double s) { return 1.0 / std::max(truth.censor_survival(s), kWeightFloor); };
  else if (weight.kind == WeightKind::inverse_yhat)
    w_pop = [&truth](double s) { return 1.0 / std::max(truth.y(s), kWeightFloor); };
  else if (weight.kind == WeightKind::window)
    w_pop = [a = weight.window_a, b = weight.window_b](double s) {
      return (s > a && s <= b) ? 1.0 : 0.0;
    };

  const OracleResult oracle = least_false_oracle(
      fam, truth.alpha0, [&truth](double s) { return truth.y(s); }, w_pop, T);

  ScenarioResult out;
  out.scenario = "coverage";
  out.n = n;
  out.reps = reps;
  out.seed = seed;
  out.theta0 = oracle.theta0;
  out.levels = levels;

  const std::size_t p = fam.dim();
  const Rng root(seed);
  struct Row {
    bool ok = false;
    Vec est;
    Vec robust_var, model_var;
    std::vector<bool> in_robust, in_based;
  };
  std::vector<Row> rows(static_cast<std::size_t>(reps));

  parallel_for(static_cast<std::size_t>(reps), exec, [&](std::size_t r) {
    try {
      const SurvivalDataset ds = simulate_sample(truth, n, T, root.stream(r).next_u64());
      const FitResult fr = fit_ml(ds, fam, weight);
      Row row;
      row.ok = true;
      row.est = fr.theta_hat;
      for (std::size_t j = 0; j < p; ++j) {
        row.robust_var.push_back(fr.sandwich(j, j) / static_cast<double>(n));
        row.model_var.push_back(fr.model_based_cov(j, j));
      }
      for (double lv : levels) {
        row.in_robust.push_back(
            confidence_region(fr, lv, CovMode::model_robust).contains(oracle.theta0));
        row.in_based.push_back(
            confidence_region(fr, lv, CovMode::model_based).contains(oracle.theta0));
      }
      rows[r] = std::move(row);
    } catch (const Error&) {
    }
  });

  std::vector<std::vector<double>> est_cols(p);
  out.mean_robust_variance.assign(p, 0.0);
  out.mean_model_based_variance.assign(p, 0.0);
  out.coverage_model_robust.assign(levels.size(), 0.0);
  out.coverage_model_based.assign(levels.size(), 0.0);
  int ok_count = 0;
  for (const Row& row : rows) {
    if (!row.ok) {
      ++out.failures;
      continue;
    }
    ++ok_count;
    out.estimates.push_back(row.est);
    for (std::size_t j = 0; j < p; ++j) {
      est_cols[j].push_back(row.est[j]);
      out.mean_robust_variance[j] += row.robust_var[j];
      out.mean_model_based_variance[j] += row.model_var[j];
    }
    for (std::size_t l = 0; l < levels.size(); ++l) {
      out.coverage_model_robust[l] += row.in_robust[l] ? 1.0 : 0.0;
      out.coverage_model_based[l] += row.in_based[l] ? 1.0 : 0.0;
    }
  }
  if (ok_count == 0) throw NumericError("no converged replications");
  const double inv = 1.0 / static_cast<double>(ok_count);
  for (std::size_t j = 0; j < p; ++j) {
    out.mean_robust_variance[j] *= inv;
    out.mean_model_based_variance[j] *= inv;
  }
  for (std::size_t l = 0; l < levels.size(); ++l) {
    out.coverage_model_robust[l] *= inv;
    out.coverage_model_based[l] *= inv;
  }
  out.bias.assign(p, 0.0);
  out.empirical_variance.assign(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    out.bias[j] = mean(est_cols[j]) - oracle.theta0[j];
    if (ok_count >= 2) out.empirical_variance[j] = variance(est_cols[j]);
  }
  return out;
}

}  // namespace hazfit
