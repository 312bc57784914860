#pragma once

#include <optional>
#include <vector>

#include "hazfit/bootstrap.hpp"
#include "hazfit/fit.hpp"
#include "hazfit/influence.hpp"

namespace hazfit {

// Declared divergence when the partial-likelihood maximizer runs away
// (monotone likelihood from separated risk sets).
inline constexpr double kCoxSeparationBound = defaults::kCoxSeparationBound;

enum class CoxMode { parametric, semiparametric };

struct CoxFitResult {
  CoxMode mode = CoxMode::parametric;
  Vec theta_hat;  // empty in semiparametric mode
  Vec beta_hat;
  double loglik = 0.0;
  Mat J_hat, K_hat, sandwich, model_based_cov;
  std::vector<Vec> L_vectors;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
  std::vector<IterRecord> trace;
  std::string family;  // parametric mode
  std::size_t n = 0;

  Vec joint() const;  // (theta, beta) stacked
};

// Joint maximum likelihood for hazard alpha(s,theta) exp(beta^t z).
CoxFitResult fit_cox_parametric(const SurvivalDataset& ds, const HazardFamily& fam,
                                std::optional<Vec> init = std::nullopt,
                                const SolverOptions& opts = {});

// Cox partial likelihood with Breslow handling of ties.
CoxFitResult fit_cox_partial(const SurvivalDataset& ds, std::optional<Vec> init = std::nullopt,
                             const SolverOptions& opts = {});

// Risk-set weighted sums at one time point: Q0 = (1/n) sum Y_i e^{b z_i},
// Q1 and Q2 its z- and zz^t-weighted versions, e = Q1/Q0.
struct CoxRiskSums {
  double q0 = 0.0;
  Vec q1;
  Mat q2;
  Vec e;
};

CoxRiskSums cox_risk_sums(const SurvivalDataset& ds, const Vec& beta, double time);

// Evaluation surface for the two objectives, all (1/n)-scaled; the
// information matrices are the negative hessians.
double cox_partial_loglik(const SurvivalDataset& ds, const Vec& beta);
Vec cox_partial_score(const SurvivalDataset& ds, const Vec& beta);
Mat cox_partial_information(const SurvivalDataset& ds, const Vec& beta);
double cox_parametric_loglik(const SurvivalDataset& ds, const HazardFamily& fam,
                             const Vec& theta_beta);
Vec cox_parametric_score(const SurvivalDataset& ds, const HazardFamily& fam,
                         const Vec& theta_beta);
Mat cox_parametric_information(const SurvivalDataset& ds, const HazardFamily& fam,
                               const Vec& theta_beta);

InfluenceReport cox_influence(const CoxFitResult& fit);

enum class CoxBootScheme { scheme1_parametric, scheme2_triplets };

// scheme1 keeps each record's covariates and redraws lifetimes from the
// fitted hazard with Kaplan-Meier censoring; scheme2 resamples triplets.
BootstrapRun cox_bootstrap(const SurvivalDataset& ds, const HazardFamily* fam,
                           const CoxFitResult& fit, CoxBootScheme scheme, int B,
                           std::uint64_t seed, Exec exec = Exec::parallel,
                           const SolverOptions& opts = {});

}  // namespace hazfit
