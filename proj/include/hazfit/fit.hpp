#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hazfit/dataset.hpp"
#include "hazfit/defaults.hpp"
#include "hazfit/families.hpp"
#include "hazfit/linalg.hpp"
#include "hazfit/weights.hpp"

namespace hazfit {

struct SolverOptions {
  double tol = defaults::kSolverTol;  // convergence: ||score||_inf below this
  int max_iter = defaults::kSolverMaxIter;
  double quad_tol = defaults::kQuadTol;  // quadrature for smooth-weight integrals
};

struct IterRecord {
  int iter;
  double loglik;
  double grad_norm;
  double step;
};

// theta_hat with the empirical information and variability matrices.
// sandwich = J^-1 K J^-1 estimates the covariance of sqrt(n)(theta_hat -
// theta_0); the covariance of theta_hat itself is sandwich / n, and the
// model-based counterpart is J^-1 / n (model_based_cov).
struct FitResult {
  Vec theta_hat;
  double loglik = 0.0;  // (1/n) log L_n at theta_hat
  Mat J_hat, K_hat, sandwich, model_based_cov;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
  std::vector<IterRecord> trace;
  std::string family;
  std::string weight;
  std::size_t n = 0;
};

double log_likelihood(const SurvivalDataset& ds, const HazardFamily& fam, const Vec& theta,
                      const TimeWeight& w);
Vec score(const SurvivalDataset& ds, const HazardFamily& fam, const Vec& theta,
          const TimeWeight& w);
Mat hessian(const SurvivalDataset& ds, const HazardFamily& fam, const Vec& theta,
            const TimeWeight& w);

double log_likelihood(const SurvivalDataset& ds, const HazardFamily& fam, const Vec& theta,
                      const WeightPlan& plan = {});
Vec score(const SurvivalDataset& ds, const HazardFamily& fam, const Vec& theta,
          const WeightPlan& plan = {});

FitResult fit_ml(const SurvivalDataset& ds, const HazardFamily& fam, const TimeWeight& w,
                 std::optional<Vec> init = std::nullopt, const SolverOptions& opts = {});
FitResult fit_ml(const SurvivalDataset& ds, const HazardFamily& fam,
                 const WeightPlan& plan = {}, std::optional<Vec> init = std::nullopt,
                 const SolverOptions& opts = {});

// Per-record L_i = W(x_i) psi(x_i) delta_i - ∫_0^{x_i} W psi alpha ds; the
// score at theta is the average of these.
std::vector<Vec> l_vectors(const SurvivalDataset& ds, const HazardFamily& fam, const Vec& theta,
                           const TimeWeight& w);

enum class KFormula { integral_form, double_integral_form, per_record_form };

// The three K-hat routes agree for unit weights; only the per-record form
// generalizes to weighted likelihoods.
Mat k_hat(const SurvivalDataset& ds, const HazardFamily& fam, const Vec& theta,
          const TimeWeight& w, KFormula formula = KFormula::per_record_form,
          double quad_tol = 1e-10);

enum class CovMode { model_based, model_robust };

struct ConfidenceRegion {
  CovMode mode;
  double level;
  Mat quad_form;      // (theta - theta_hat)^t M (theta - theta_hat) <= radius
  double radius;      // chi-square quantile / n
  Vec center;
  std::vector<std::pair<double, double>> intervals;  // per-coordinate

  bool contains(const Vec& theta0) const;
};

ConfidenceRegion confidence_region(const FitResult& fr, double level, CovMode mode);

// ---- least-false oracle -------------------------------------------------

struct OracleOptions {
  std::optional<Vec> init;
  double tol = 1e-10;
  int max_iter = 200;
  double quad_tol = 1e-10;
};

struct OracleResult {
  Vec theta0;
  double distance;
  bool unique_ok;  // false flags a flat or indefinite minimum
  Mat j_w;
};

// Minimizes the weighted hazard distance from an analytic truth to the
// family over [0, T]; used to validate consistency in simulations.
OracleResult least_false_oracle(const HazardFamily& fam,
                                const std::function<double(double)>& alpha0,
                                const std::function<double(double)>& y,
                                const std::function<double(double)>& w, double T,
                                const OracleOptions& opts = {});

}  // namespace hazfit
