#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "hazfit/families.hpp"
#include "hazfit/fit.hpp"

namespace hazfit {

// Analytic description of a data-generating mechanism: true hazard, its
// cumulative, the censoring survival G[s, inf), and optionally a relative
// risk function with a finite-support covariate law. Used by the oracle and
// simulation paths, never estimated from data.
struct TruthSpec {
  std::function<double(double)> alpha0;
  std::function<double(double)> A0;
  std::function<double(double)> censor_survival = [](double) { return 1.0; };
  std::function<double(const Vec&)> h0;       // relative risk, optional
  std::vector<Vec> covariate_points;          // finite support
  std::vector<double> covariate_probs;

  bool has_covariates() const { return !covariate_points.empty(); }
  double y(double s) const { return std::exp(-A0(s)) * censor_survival(s); }

  // A0 must match alpha0 by quadrature; covariate probabilities must sum to 1.
  void validate(double T) const;
};

TruthSpec exponential_truth(double rate);
TruthSpec weibull_truth(double shape, double rate = 1.0);
TruthSpec gompertz_truth(double a, double b);

// attach exponential censoring G[s,inf) = exp(-rate s)
TruthSpec with_exponential_censoring(TruthSpec t, double rate);

// d_w[alpha, alpha_theta] = ∫_0^T w y { alpha log(alpha/alpha_theta)
//                                       - (alpha - alpha_theta) } ds
double hazard_distance(const TruthSpec& truth, const HazardFamily& fam, const Vec& theta,
                       const std::function<double(double)>& w, double T, double tol = 1e-10);
double hazard_distance(const TruthSpec& truth, const HazardFamily& fam, const Vec& theta,
                       double T, double tol = 1e-10);  // unit weight

// |d[alpha, alpha_theta] - { ∫ f log(f/f_theta) - e^{-A(T)} (A(T)-A_theta(T)) }|
// for uncensored truths, both sides by independent quadratures.
double kl_identity_check(const TruthSpec& truth, const HazardFamily& fam, const Vec& theta,
                         double T, double tol = 1e-9);

// z-weighted distance: sum_z D(z) d_z[alpha0 h0(z), alpha_theta h_beta(z)]
double cox_distance_parametric(const TruthSpec& truth, const HazardFamily& fam, const Vec& theta,
                               const std::function<double(const Vec&)>& h_beta, double T,
                               double tol = 1e-10);

// partial-likelihood distance: lambda(h0, h0) - lambda(h0, h_beta), with the
// log-ratio-of-expectations correction that absorbs multiplicative scale
double cox_distance_partial(const TruthSpec& truth,
                            const std::function<double(const Vec&)>& h_beta, double T,
                            double tol = 1e-10);

}  // namespace hazfit
