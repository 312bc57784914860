#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hazfit/distance.hpp"
#include "hazfit/fit.hpp"
#include "hazfit/parallel.hpp"
#include "hazfit/rng.hpp"

namespace hazfit {

// Inverse-transform draw of one record from the truth on [0, T]: lifetime
// from A0 (scaled by h0(z) when covariates are present), censoring from the
// censor survival, both by monotone inversion.
SurvivalRecord simulate_record(const TruthSpec& truth, double T, Rng& rng);

SurvivalDataset simulate_sample(const TruthSpec& truth, std::size_t n, double T,
                                std::uint64_t seed);

struct EfficiencyStudyResult {
  // n * empirical variance for the plain, inverse-censoring-KM and
  // inverse-yhat estimators, with the matching analytic values
  Vec empirical;  // size 3
  Vec analytic;   // size 3
  int failures = 0;
};

// Uncensored-probability parameterization: censoring rate g * theta0 and
// horizon T with exp(-theta0 T) = eps.
EfficiencyStudyResult efficiency_study_5B(double g, double eps, std::size_t n, int reps,
                                          std::uint64_t seed, double theta0 = 1.0,
                                          Exec exec = Exec::parallel);

Vec efficiency_5B_analytic(double g, double eps, double theta0);

struct ScenarioResult {
  std::string scenario;
  std::size_t n = 0;
  int reps = 0;
  std::uint64_t seed = 0;
  Vec theta0;                     // least-false target from the oracle
  std::vector<Vec> estimates;     // per converged rep
  Vec bias;                       // mean(theta_hat) - theta0
  std::vector<double> levels;
  std::vector<double> coverage_model_robust;  // per level
  std::vector<double> coverage_model_based;
  Vec mean_robust_variance;       // mean of sandwich/n diagonals
  Vec mean_model_based_variance;
  Vec empirical_variance;
  int failures = 0;
};

ScenarioResult coverage_study(const TruthSpec& truth, const HazardFamily& fam, std::size_t n,
                              int reps, const std::vector<double>& levels, std::uint64_t seed,
                              double T, const WeightPlan& weight = {},
                              Exec exec = Exec::parallel);

}  // namespace hazfit
