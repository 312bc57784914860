#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hazfit/fit.hpp"
#include "hazfit/parallel.hpp"
#include "hazfit/rng.hpp"

namespace hazfit {

enum class BootScheme { parametric_km_censoring, parametric_fixed_censoring, nonparametric_pairs };

struct BootstrapSummary {
  Vec mean;
  std::optional<Vec> variance;  // absent when fewer than two valid replicates
  std::vector<std::pair<double, double>> percentile_90;
  std::vector<std::pair<double, double>> percentile_95;
};

struct BootstrapRun {
  BootScheme scheme;
  int B = 0;
  std::uint64_t seed = 0;
  std::vector<Vec> replicates;  // valid replicates in index order
  int failures = 0;
  BootstrapSummary summary;
};

// Discrete sampler for the censoring Kaplan-Meier estimate; any mass the
// product-limit curve leaves past the last censoring time never censors.
class CensoringSampler {
 public:
  explicit CensoringSampler(const SurvivalDataset& ds);
  double draw(Rng& rng) const;  // +inf with the residual probability

 private:
  std::vector<double> times_;
  std::vector<double> cum_probs_;  // cumulative; tail short of 1 is the residual
};

BootstrapRun bootstrap(const SurvivalDataset& ds, const HazardFamily& fam, const FitResult& fr,
                       BootScheme scheme, int B, std::uint64_t seed,
                       const WeightPlan& weight = {}, Exec exec = Exec::parallel,
                       const SolverOptions& opts = {});

BootstrapSummary summarize(const std::vector<Vec>& replicates, std::size_t p);

// Outer-simulation contrast of the variability of the two bootstrap variance
// estimators in the uncensored exponential model; both schemes run on the
// same outer datasets.
struct VarianceRatioResult {
  double ratio;  // Var(parametric variance estimate) / Var(nonparametric one)
  std::vector<double> v_pb, v_nb;
};

VarianceRatioResult variance_ratio_experiment(int n, int B, std::uint64_t seed, int reps,
                                              double theta0 = 1.0, Exec exec = Exec::parallel);

}  // namespace hazfit
