#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "hazfit/distance.hpp"
#include "hazfit/quadrature.hpp"
#include "hazfit/simulate.hpp"
#include "hazfit/stats.hpp"

using namespace hazfit;
using namespace hazfit::testing;

TEST_CASE("log-likelihood hand values") {
  const auto expo = make_family("exponential");

  const SurvivalDataset all = make_dataset({1.0, 2.0, 3.0}, {1, 1, 1});
  CHECK(log_likelihood(all, *expo, {0.5}) ==
        doctest::Approx((3.0 * std::log(0.5) - 3.0) / 3.0).epsilon(1e-14));

  // no events: only the cumulative-hazard terms remain
  const SurvivalDataset cens = make_dataset({1.0, 2.0}, {0, 0});
  CHECK(log_likelihood(cens, *expo, {0.7}) ==
        doctest::Approx(-(0.7 * 1.0 + 0.7 * 2.0) / 2.0).epsilon(1e-14));

  // window weight past all data
  const WeightPlan win = WeightPlan::window(10.0, 12.0);
  CHECK(log_likelihood(all, *expo, {0.5}, win) == doctest::Approx(0.0));
}

TEST_CASE("score hand values and root") {
  const auto expo = make_family("exponential");
  const SurvivalDataset one = make_dataset({1.7}, {0});
  CHECK(score(one, *expo, {0.9})[0] == doctest::Approx(-1.7).epsilon(1e-14));

  const SurvivalDataset ds = make_dataset({1.0, 2.0, 3.0}, {1, 0, 1});
  CHECK(score(ds, *expo, {1.0 / 3.0})[0] == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("score equals the gradient of the log-likelihood") {
  const SurvivalDataset ds = random_dataset(8, 35);
  struct Case {
    std::string name;
    FamilyConfig cfg;
    Vec theta;
  };
  for (const Case& c : {Case{"exponential", {}, {0.8}},
                        Case{"weibull", {}, {1.3}},
                        Case{"weibull2", {}, {1.2, 0.9}},
                        Case{"gompertz", {}, {0.7, 0.4}},
                        Case{"piecewise_constant", FamilyConfig{{0.0, 0.9}}, {0.6, 1.1}}}) {
    const auto fam = make_family(c.name, c.cfg);
    for (const WeightPlan& plan :
         {WeightPlan::unit(), WeightPlan::inverse_yhat(), WeightPlan::window(0.2, 2.0)}) {
      const TimeWeight w = resolve_weight(plan, ds);
      const Vec sc = score(ds, *fam, c.theta, w);
      for (std::size_t j = 0; j < fam->dim(); ++j) {
        const double h = 1e-6 * (1.0 + std::fabs(c.theta[j]));
        const double fd = fd_partial(
            [&](const Vec& t) { return log_likelihood(ds, *fam, t, w); }, c.theta, j, h);
        CHECK(std::fabs(sc[j] - fd) <= 1e-6 * std::max({std::fabs(sc[j]), std::fabs(fd), 1.0}));
      }
    }
  }
}

TEST_CASE("information equals the negative hessian by finite differences") {
  const SurvivalDataset ds = random_dataset(12, 40);
  const auto fam = make_family("weibull2");
  const Vec th{1.1, 0.8};
  const Mat h = hessian(ds, *fam, th, TimeWeight());
  for (std::size_t j = 0; j < 2; ++j) {
    const double step = 1e-6;
    for (std::size_t i = 0; i < 2; ++i) {
      const double fd = fd_partial(
          [&](const Vec& t) { return score(ds, *fam, t, TimeWeight())[i]; }, th, j, step);
      CHECK(std::fabs(h(i, j) - fd) <= 1e-6 * std::max({std::fabs(fd), std::fabs(h(i, j)), 1.0}));
    }
  }
}

TEST_CASE("exponential fits reproduce the occurrence/exposure algebra") {
  const auto expo = make_family("exponential");

  const FitResult a = fit_ml(make_dataset({1.0, 2.0, 3.0}, {1, 0, 1}), *expo);
  CHECK(std::fabs(a.theta_hat[0] - 1.0 / 3.0) <= 1e-12);
  CHECK(a.converged);
  CHECK(a.gradient_norm <= 1e-9);

  const FitResult b = fit_ml(make_dataset({1.0, 2.0, 3.0}, {1, 1, 1}), *expo);
  CHECK(std::fabs(b.theta_hat[0] - 0.5) <= 1e-12);
  CHECK(std::fabs(b.J_hat(0, 0) - 4.0) <= 1e-12);
  CHECK(std::fabs(b.K_hat(0, 0) - 2.0 / 3.0) <= 1e-12);
  CHECK(std::fabs(b.sandwich(0, 0) - 1.0 / 24.0) <= 1e-12);
  CHECK(b.model_based_cov(0, 0) == doctest::Approx(0.25 / 3.0).epsilon(1e-12));

  CHECK_THROWS_AS(fit_ml(make_dataset({1.0, 2.0}, {0, 0}), *expo), ValidationError);
}

TEST_CASE("uncensored fits reduce to the classical iid formulas") {
  Rng rng(404);
  std::vector<double> x;
  for (int i = 0; i < 80; ++i) x.push_back(rng.exponential(0.7));
  const SurvivalDataset ds = make_dataset(x, std::vector<int>(x.size(), 1));
  const auto expo = make_family("exponential");
  const FitResult fr = fit_ml(ds, *expo);
  const double xbar = mean(x);
  CHECK(fr.theta_hat[0] == doctest::Approx(1.0 / xbar).epsilon(1e-10));
  CHECK(fr.J_hat(0, 0) == doctest::Approx(xbar * xbar).epsilon(1e-10));
  double s2 = 0.0;
  for (double xi : x) s2 += (xi - xbar) * (xi - xbar);
  s2 /= static_cast<double>(x.size());
  CHECK(fr.K_hat(0, 0) == doctest::Approx(s2).epsilon(1e-10));
  const double th4 = std::pow(fr.theta_hat[0], 4.0);
  CHECK(fr.sandwich(0, 0) == doctest::Approx(s2 * th4).epsilon(1e-10));
}

TEST_CASE("weighted exponential fit matches its closed form") {
  const SurvivalDataset ds = random_dataset(21, 50);
  const auto expo = make_family("exponential");
  for (const WeightPlan& plan : {WeightPlan::inverse_censoring_km(), WeightPlan::inverse_yhat(),
                                 WeightPlan::window(0.1, 1.4)}) {
    const TimeWeight w = resolve_weight(plan, ds);
    const FitResult fr = fit_ml(ds, *expo, w);
    double num = 0.0;
    for (const auto& r : ds.records()) num += w(r.x) * r.delta;
    double den = 0.0;
    for (const auto& r : ds.records())
      den += integrate_weighted(*expo, {1.0}, IntegrandKind::alpha, w, 0.0, r.x)(0, 0);
    CHECK(fr.theta_hat[0] == doctest::Approx(num / den).epsilon(1e-10));
  }
}

TEST_CASE("newton solves the curved families") {
  const SurvivalDataset ds = random_dataset(55, 120, 0.3, 1.4);
  for (const std::string name : {"weibull", "weibull2", "gompertz"}) {
    const auto fam = make_family(name);
    const FitResult fr = fit_ml(ds, *fam);
    CHECK(fr.converged);
    CHECK(fr.gradient_norm <= 1e-9);
    CHECK(norm_inf(score(ds, *fam, fr.theta_hat, TimeWeight())) <= 1e-9);
    CHECK(is_negative_definite(hessian(ds, *fam, fr.theta_hat, TimeWeight())));
  }
  const auto pw = make_family("piecewise_constant", FamilyConfig{{0.0, 0.5, 1.2}});
  const FitResult fr = fit_ml(ds, *pw);
  // piecewise MLE is per-segment occurrence/exposure
  Vec d(3, 0.0), e(3, 0.0);
  const std::vector<double> cuts{0.0, 0.5, 1.2};
  for (const auto& r : ds.records()) {
    for (std::size_t j = 0; j < 3; ++j) {
      const double hi = j + 1 < 3 ? cuts[j + 1] : 1e30;
      e[j] += std::max(0.0, std::min(r.x, hi) - cuts[j]);
      if (r.delta == 1 && r.x >= cuts[j] && (j + 1 == 3 || r.x < cuts[j + 1])) d[j] += 1.0;
    }
  }
  for (std::size_t j = 0; j < 3; ++j)
    CHECK(fr.theta_hat[j] == doctest::Approx(d[j] / e[j]).epsilon(1e-10));
}

TEST_CASE("gompertz fits recover an in-family truth") {
  const TruthSpec truth = with_exponential_censoring(gompertz_truth(0.6, 0.5), 0.3);
  const SurvivalDataset ds = simulate_sample(truth, 4000, 4.0, 321);
  const auto fam = make_family("gompertz");
  const FitResult fr = fit_ml(ds, *fam);
  CHECK(fr.converged);
  CHECK(fr.theta_hat[0] == doctest::Approx(0.6).epsilon(0.15));
  CHECK(fr.theta_hat[1] == doctest::Approx(0.5).epsilon(0.15));
}

TEST_CASE("the three K-hat routes agree for unit weights") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const SurvivalDataset ds = random_dataset(seed, 50);
    for (const std::string name : {"exponential", "weibull"}) {
      const auto fam = make_family(name);
      const FitResult fr = fit_ml(ds, *fam);
      const Mat k3 = k_hat(ds, *fam, fr.theta_hat, TimeWeight(), KFormula::per_record_form);
      const Mat k1 = k_hat(ds, *fam, fr.theta_hat, TimeWeight(), KFormula::integral_form);
      const Mat k2 = k_hat(ds, *fam, fr.theta_hat, TimeWeight(), KFormula::double_integral_form);
      const double scale = frobenius(k3);
      CHECK(frobenius(k1 - k3) <= 1e-8 * scale);
      CHECK(frobenius(k2 - k3) <= 1e-8 * scale);
      CHECK(std::fabs(k3(0, 0) - fr.K_hat(0, 0)) <= 1e-14 * scale);
    }
  }
}

TEST_CASE("K-hat edge cases") {
  const auto expo = make_family("exponential");
  // single uncensored record: perfect fit, zero variability
  const SurvivalDataset one = make_dataset({2.0}, {1});
  const FitResult fr = fit_ml(one, *expo);
  CHECK(fr.K_hat(0, 0) == doctest::Approx(0.0).epsilon(1e-14));

  // integral routes are not defined for non-unit weights
  const SurvivalDataset ds = random_dataset(3, 20);
  const TimeWeight w = resolve_weight(WeightPlan::inverse_yhat(), ds);
  CHECK_NOTHROW(k_hat(ds, *expo, {0.5}, w, KFormula::per_record_form));
  CHECK_THROWS_AS(k_hat(ds, *expo, {0.5}, w, KFormula::integral_form), ConfigError);
  CHECK_THROWS_AS(k_hat(ds, *expo, {0.5}, w, KFormula::double_integral_form), ConfigError);
}

TEST_CASE("confidence regions") {
  const SurvivalDataset ds = make_dataset({1.0, 2.0, 3.0}, {1, 1, 1});
  const auto expo = make_family("exponential");
  const FitResult fr = fit_ml(ds, *expo);

  const ConfidenceRegion robust = confidence_region(fr, 0.90, CovMode::model_robust);
  const double z = 1.6448536269514722;
  const double half = z * std::sqrt(fr.sandwich(0, 0) / 3.0);
  CHECK(robust.intervals[0].first == doctest::Approx(0.5 - half).epsilon(1e-9));
  CHECK(robust.intervals[0].second == doctest::Approx(0.5 + half).epsilon(1e-9));

  // quadratic-form membership at the exact one-dimensional radius
  const double gamma = 2.705543454095404;
  const double m = fr.J_hat(0, 0) / fr.K_hat(0, 0) * fr.J_hat(0, 0);
  const double r = std::sqrt(gamma / m / 3.0);
  CHECK(robust.contains({0.5 + 0.99 * r}));
  CHECK_FALSE(robust.contains({0.5 + 1.01 * r}));

  const ConfidenceRegion based = confidence_region(fr, 0.90, CovMode::model_based);
  CHECK(based.contains({0.5}));

  // singular K: single record has zero K-hat
  const FitResult degenerate = fit_ml(make_dataset({2.0}, {1}), *expo);
  CHECK_THROWS_AS(confidence_region(degenerate, 0.9, CovMode::model_robust),
                  SingularMatrixError);
}

TEST_CASE("robust and model-based intervals coincide under a correct model") {
  const TruthSpec truth = with_exponential_censoring(exponential_truth(1.0), 0.4);
  const SurvivalDataset ds = simulate_sample(truth, 2000, 4.0, 2718);
  const auto expo = make_family("exponential");
  const FitResult fr = fit_ml(ds, *expo);
  const ConfidenceRegion robust = confidence_region(fr, 0.90, CovMode::model_robust);
  const ConfidenceRegion based = confidence_region(fr, 0.90, CovMode::model_based);
  const double w_robust = robust.intervals[0].second - robust.intervals[0].first;
  const double w_based = based.intervals[0].second - based.intervals[0].first;
  CHECK(w_robust == doctest::Approx(w_based).epsilon(0.10));
}

TEST_CASE("least-false oracle for the exponential family") {
  // weibull(1.5) truth with exponential censoring: theta0 = ∫ y a / ∫ y
  const TruthSpec truth = with_exponential_censoring(weibull_truth(1.5), 0.4);
  const auto expo = make_family("exponential");
  const double T = 3.0;
  const auto unit = [](double) { return 1.0; };
  const auto y = [&](double s) { return truth.y(s); };
  const OracleResult res = least_false_oracle(*expo, truth.alpha0, y, unit, T);
  const double num = integrate_adaptive_scalar(
      [&](double s) { return y(s) * truth.alpha0(s); }, 0.0, T, 1e-12);
  const double den = integrate_adaptive_scalar(y, 0.0, T, 1e-12);
  CHECK(res.theta0[0] == doctest::Approx(num / den).epsilon(1e-9));
  CHECK(res.unique_ok);
  CHECK(res.distance > 0.0);

  // in-family truth: zero distance at the true parameter
  const TruthSpec in_family = exponential_truth(0.8);
  const OracleResult exact = least_false_oracle(
      *expo, in_family.alpha0, [&](double s) { return in_family.y(s); }, unit, T);
  CHECK(exact.theta0[0] == doctest::Approx(0.8).epsilon(1e-9));
  CHECK(exact.distance <= 1e-12);

  // 1/y weighting retargets to the neutrally weighted hazard ∫ a / T
  const OracleResult neutral = least_false_oracle(
      *expo, truth.alpha0, y, [&](double s) { return 1.0 / std::max(y(s), 1e-8); }, T);
  const double plain_avg = integrate_adaptive_scalar(truth.alpha0, 0.0, T, 1e-12) / T;
  CHECK(neutral.theta0[0] == doctest::Approx(plain_avg).epsilon(1e-8));
}

TEST_CASE("least-false oracle handles curved families in-family") {
  const TruthSpec truth = weibull_truth(1.5);
  const auto wb = make_family("weibull");
  const auto y = [&](double s) { return truth.y(s); };
  const OracleResult res =
      least_false_oracle(*wb, truth.alpha0, y, [](double) { return 1.0; }, 2.5);
  CHECK(res.theta0[0] == doctest::Approx(1.5).epsilon(1e-8));
  CHECK(res.distance <= 1e-10);
}

TEST_CASE("the score vanishes at the truth as n grows") {
  const TruthSpec truth = with_exponential_censoring(exponential_truth(0.9), 0.3);
  const auto expo = make_family("exponential");
  double prev = 1e30;
  for (const std::size_t n : {200u, 3200u}) {
    std::vector<double> scores;
    for (std::uint64_t rep = 0; rep < 20; ++rep) {
      const SurvivalDataset ds = simulate_sample(truth, n, 5.0, 900 + rep);
      scores.push_back(std::fabs(score(ds, *expo, {0.9})[0]));
    }
    const double m = mean(scores);
    CHECK(m < prev);
    prev = m;
  }
  // root-n scale: the mean absolute score at n = 3200 sits near
  // sqrt(2/pi) * sd(U_1)/sqrt(n); a generous band suffices
  CHECK(prev <= 0.03);
}

TEST_CASE("custom step weights flow through the fitting path") {
  const SurvivalDataset ds = random_dataset(61, 40);
  const auto expo = make_family("exponential");
  StepFn fn;
  fn.knots = {0.5, 1.5};
  fn.values = {1.0, 2.0, 0.5};
  const WeightPlan plan = WeightPlan::custom_step(fn, "piecewise emphasis");
  const TimeWeight w = resolve_weight(plan, ds);
  const FitResult fr = fit_ml(ds, *expo, w);
  double num = 0.0, den = 0.0;
  for (const auto& r : ds.records()) {
    num += w(r.x) * r.delta;
    den += integrate_weighted(*expo, {1.0}, IntegrandKind::alpha, w, 0.0, r.x)(0, 0);
  }
  CHECK(fr.theta_hat[0] == doctest::Approx(num / den).epsilon(1e-9));

  StepFn bad;
  bad.knots = {1.0};
  bad.values = {1.0, -0.5};
  CHECK_THROWS_AS(WeightPlan::custom_step(bad, "negative"), ConfigError);
}

TEST_CASE("fit result carries the convergence trace") {
  const SurvivalDataset ds = random_dataset(9, 30);
  const auto fam = make_family("gompertz");
  const FitResult fr = fit_ml(ds, *fam);
  CHECK(fr.trace.size() >= 1);
  CHECK(fr.trace.front().iter == 0);
  CHECK(fr.family == "gompertz");

  CHECK_THROWS_AS(fit_ml(ds, *fam, WeightPlan::unit(), Vec{-1.0, 0.0}), ValidationError);
}
