#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "hazfit/bootstrap.hpp"
#include "hazfit/simulate.hpp"
#include "hazfit/stats.hpp"

using namespace hazfit;
using namespace hazfit::testing;

TEST_CASE("fixed seeds reproduce runs bit for bit") {
  const SurvivalDataset ds = random_dataset(1, 60);
  const auto expo = make_family("exponential");
  const FitResult fr = fit_ml(ds, *expo);
  for (BootScheme scheme : {BootScheme::parametric_km_censoring, BootScheme::nonparametric_pairs}) {
    const BootstrapRun a = bootstrap(ds, *expo, fr, scheme, 50, 99);
    const BootstrapRun b = bootstrap(ds, *expo, fr, scheme, 50, 99);
    REQUIRE(a.replicates.size() == b.replicates.size());
    for (std::size_t i = 0; i < a.replicates.size(); ++i)
      CHECK(a.replicates[i][0] == b.replicates[i][0]);
    const BootstrapRun c = bootstrap(ds, *expo, fr, scheme, 50, 100);
    CHECK(a.replicates[0][0] != c.replicates[0][0]);
  }
}

TEST_CASE("resampling n identical records returns the base estimate") {
  std::vector<double> x(20, 1.3);
  const SurvivalDataset ds = make_dataset(x, std::vector<int>(20, 1));
  const auto expo = make_family("exponential");
  const FitResult fr = fit_ml(ds, *expo);
  const BootstrapRun run = bootstrap(ds, *expo, fr, BootScheme::nonparametric_pairs, 25, 3);
  CHECK(run.failures == 0);
  for (const Vec& rep : run.replicates)
    CHECK(rep[0] == doctest::Approx(fr.theta_hat[0]).epsilon(1e-12));
}

TEST_CASE("degenerate replicate counts") {
  const SurvivalDataset ds = random_dataset(2, 30);
  const auto expo = make_family("exponential");
  const FitResult fr = fit_ml(ds, *expo);
  const BootstrapRun run = bootstrap(ds, *expo, fr, BootScheme::nonparametric_pairs, 1, 5);
  CHECK_FALSE(run.summary.variance.has_value());
  CHECK_THROWS_AS(bootstrap(ds, *expo, fr, BootScheme::nonparametric_pairs, 0, 5),
                  ValidationError);
}

TEST_CASE("failed replicates are recorded, not redrawn") {
  // one event among censored records: many resamples carry no event
  const SurvivalDataset ds = make_dataset({0.5, 1.0, 1.5, 2.0}, {0, 1, 0, 0});
  const auto expo = make_family("exponential");
  const FitResult fr = fit_ml(ds, *expo);
  const BootstrapRun run = bootstrap(ds, *expo, fr, BootScheme::nonparametric_pairs, 200, 11);
  CHECK(run.failures > 0);
  CHECK(run.failures + static_cast<int>(run.replicates.size()) == 200);
}

TEST_CASE("censoring sampler matches the kaplan-meier masses") {
  // largest observation is an event: the estimate is defective and the
  // residual mass never censors
  const SurvivalDataset ds = make_dataset({1.0, 2.0, 3.0, 4.0}, {1, 0, 0, 1});
  const CensoringSampler sampler(ds);
  // G jumps: at 2 (risk 3): mass 1/3; at 3 (risk 2): (2/3)(1/2) = 1/3; rest inf
  Rng rng(7);
  int at2 = 0, at3 = 0, never = 0;
  const int reps = 40000;
  for (int i = 0; i < reps; ++i) {
    const double c = sampler.draw(rng);
    if (c == 2.0) ++at2;
    else if (c == 3.0) ++at3;
    else if (std::isinf(c)) ++never;
  }
  CHECK(at2 / static_cast<double>(reps) == doctest::Approx(1.0 / 3.0).epsilon(0.05));
  CHECK(at3 / static_cast<double>(reps) == doctest::Approx(1.0 / 3.0).epsilon(0.05));
  CHECK(never / static_cast<double>(reps) == doctest::Approx(1.0 / 3.0).epsilon(0.05));
}

TEST_CASE("parametric replicate variance tracks the model-based covariance") {
  // uncensored exponential data: replicate variance of theta* is close to
  // theta^2 / n, the model-based variance
  Rng rng(55);
  std::vector<double> x;
  for (int i = 0; i < 300; ++i) x.push_back(rng.exponential(1.0));
  const SurvivalDataset ds = make_dataset(x, std::vector<int>(x.size(), 1));
  const auto expo = make_family("exponential");
  const FitResult fr = fit_ml(ds, *expo);
  const BootstrapRun pb = bootstrap(ds, *expo, fr, BootScheme::parametric_km_censoring, 1500, 42);
  CHECK(pb.failures == 0);
  const double target = fr.theta_hat[0] * fr.theta_hat[0] / 300.0;
  CHECK((*pb.summary.variance)[0] == doctest::Approx(target).epsilon(0.12));

  // nonparametric replicate variance tracks the sandwich
  const BootstrapRun nb = bootstrap(ds, *expo, fr, BootScheme::nonparametric_pairs, 1500, 43);
  CHECK((*nb.summary.variance)[0] ==
        doctest::Approx(fr.sandwich(0, 0) / 300.0).epsilon(0.12));
}

TEST_CASE("fixed-censoring scheme needs known censoring times") {
  const SurvivalDataset no_c = random_dataset(4, 25);
  const auto expo = make_family("exponential");
  const FitResult fr = fit_ml(no_c, *expo);
  CHECK_THROWS_AS(bootstrap(no_c, *expo, fr, BootScheme::parametric_fixed_censoring, 10, 1),
                  ConfigError);

  std::vector<SurvivalRecord> recs(40);
  Rng rng(8);
  for (auto& r : recs) {
    const double life = rng.exponential(1.0);
    const double cens = rng.exponential(0.5);
    r.x = std::min(life, cens);
    r.delta = life <= cens ? 1 : 0;
    r.censor_time = cens;
  }
  const SurvivalDataset with_c(recs);
  const FitResult fr2 = fit_ml(with_c, *expo);
  const BootstrapRun run =
      bootstrap(with_c, *expo, fr2, BootScheme::parametric_fixed_censoring, 60, 2);
  CHECK(run.replicates.size() + run.failures == 60);
  const BootstrapRun again =
      bootstrap(with_c, *expo, fr2, BootScheme::parametric_fixed_censoring, 60, 2);
  CHECK(run.replicates[5][0] == again.replicates[5][0]);
}

TEST_CASE("weighted base fits bootstrap with the same weight plan") {
  const SurvivalDataset ds = random_dataset(31, 50);
  const auto expo = make_family("exponential");
  const WeightPlan plan = WeightPlan::inverse_censoring_km();
  const FitResult fr = fit_ml(ds, *expo, plan);
  const BootstrapRun run =
      bootstrap(ds, *expo, fr, BootScheme::nonparametric_pairs, 40, 9, plan);
  CHECK(run.replicates.size() > 30);
}

TEST_CASE("variance ratio experiment preconditions") {
  CHECK_THROWS_AS(variance_ratio_experiment(50, 20, 1, 1), ValidationError);
}
