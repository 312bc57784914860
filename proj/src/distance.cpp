#include "hazfit/distance.hpp"

#include <cmath>

#include "hazfit/errors.hpp"
#include "hazfit/quadrature.hpp"

namespace hazfit {

void TruthSpec::validate(double T) const {
  if (!alpha0 || !A0) throw ValidationError("truth needs alpha0 and A0");
  if (std::fabs(A0(0.0)) > 1e-12) throw ValidationError("A0(0) must be 0");
  for (double t : {0.25 * T, 0.5 * T, T}) {
    const double quad = integrate_adaptive_scalar(alpha0, 0.0, t, 1e-10);
    if (std::fabs(quad - A0(t)) > 1e-8 * (1.0 + std::fabs(A0(t))))
      throw ValidationError("A0 disagrees with the quadrature of alpha0");
  }
  for (double s : {0.0, 0.5 * T, T}) {
    if (!(alpha0(s) >= 0.0) || !std::isfinite(alpha0(s)))
      throw ValidationError("alpha0 must be finite and nonnegative on [0,T]");
    const double g = censor_survival(s);
    if (!(g >= 0.0 && g <= 1.0)) throw ValidationError("censor survival outside [0,1]");
  }
  if (!covariate_points.empty()) {
    if (covariate_points.size() != covariate_probs.size())
      throw ValidationError("covariate points and probabilities differ in length");
    double sum = 0.0;
    for (double p : covariate_probs) {
      if (!(p >= 0.0)) throw ValidationError("negative covariate probability");
      sum += p;
    }
    if (std::fabs(sum - 1.0) > 1e-12) throw ValidationError("covariate law must sum to 1");
    if (!h0) throw ValidationError("covariate law needs h0");
  }
}

TruthSpec exponential_truth(double rate) {
  if (!(rate > 0.0)) throw ValidationError("exponential truth needs a positive rate");
  TruthSpec t;
  t.alpha0 = [rate](double) { return rate; };
  t.A0 = [rate](double s) { return rate * s; };
  return t;
}

TruthSpec weibull_truth(double shape, double rate) {
  if (!(shape > 0.0 && rate > 0.0)) throw ValidationError("weibull truth needs positive parameters");
  TruthSpec t;
  t.alpha0 = [shape, rate](double s) { return shape * rate * std::pow(rate * s, shape - 1.0); };
  t.A0 = [shape, rate](double s) { return std::pow(rate * s, shape); };
  return t;
}

TruthSpec gompertz_truth(double a, double b) {
  if (!(a > 0.0)) throw ValidationError("gompertz truth needs a > 0");
  TruthSpec t;
  t.alpha0 = [a, b](double s) { return a * std::exp(b * s); };
  t.A0 = [a, b](double s) {
    if (std::fabs(b * s) < 1e-8) return a * s * (1.0 + 0.5 * b * s);
    return a * std::expm1(b * s) / b;
  };
  return t;
}

TruthSpec with_exponential_censoring(TruthSpec t, double rate) {
  if (!(rate >= 0.0)) throw ValidationError("censoring rate must be nonnegative");
  t.censor_survival = [rate](double s) { return std::exp(-rate * s); };
  return t;
}

double hazard_distance(const TruthSpec& truth, const HazardFamily& fam, const Vec& theta,
                       const std::function<double(double)>& w, double T, double tol) {
  if (!fam.in_domain(theta)) throw ValidationError("hazard_distance: theta outside domain");
  const auto f = [&](double s) {
    const double a0 = truth.alpha0(s);
    const double at = fam.alpha(s, theta);
    const double wy = w(s) * truth.y(s);
    double log_ratio = 0.0;
    if (a0 > 0.0) log_ratio = a0 * std::log(a0 / at);
    return wy * (log_ratio - (a0 - at));
  };
  return integrate_adaptive_scalar(f, 0.0, T, tol, fam.breakpoints());
}

double hazard_distance(const TruthSpec& truth, const HazardFamily& fam, const Vec& theta,
                       double T, double tol) {
  return hazard_distance(truth, fam, theta, [](double) { return 1.0; }, T, tol);
}

double kl_identity_check(const TruthSpec& truth, const HazardFamily& fam, const Vec& theta,
                         double T, double tol) {
  for (double s : {0.0, 0.5 * T, T})
    if (truth.censor_survival(s) != 1.0)
      throw ValidationError("the Kullback-Leibler identity requires an uncensored truth");

  const double lhs = hazard_distance(truth, fam, theta, T, tol * 1e-2);

  // density route, integrated independently
  const auto f_true = [&](double t) { return truth.alpha0(t) * std::exp(-truth.A0(t)); };
  const auto f_model = [&](double t) {
    return fam.alpha(t, theta) * std::exp(-fam.cum_hazard(t, theta));
  };
  const double kl = integrate_adaptive_scalar(
      [&](double t) {
        const double ft = f_true(t);
        if (ft <= 0.0) return 0.0;
        return ft * std::log(ft / f_model(t));
      },
      0.0, T, tol * 1e-2, fam.breakpoints());
  const double tail =
      std::exp(-truth.A0(T)) * (truth.A0(T) - fam.cum_hazard(T, theta));
  return std::fabs(lhs - (kl - tail));
}

namespace {

double y_given_z(const TruthSpec& truth, double s, const Vec& z) {
  return std::exp(-truth.A0(s) * truth.h0(z)) * truth.censor_survival(s);
}

}  // namespace

double cox_distance_parametric(const TruthSpec& truth, const HazardFamily& fam, const Vec& theta,
                               const std::function<double(const Vec&)>& h_beta, double T,
                               double tol) {
  if (!truth.has_covariates()) throw ValidationError("cox distance needs a covariate law");
  double total = 0.0;
  for (std::size_t m = 0; m < truth.covariate_points.size(); ++m) {
    const Vec& z = truth.covariate_points[m];
    const double h0z = truth.h0(z);
    const double hbz = h_beta(z);
    if (!(h0z > 0.0 && hbz > 0.0))
      throw ValidationError("relative risks must be positive on the support");
    const auto f = [&](double s) {
      const double a0 = truth.alpha0(s) * h0z;
      const double at = fam.alpha(s, theta) * hbz;
      const double yz = y_given_z(truth, s, z);
      double lr = 0.0;
      if (a0 > 0.0) lr = a0 * std::log(a0 / at);
      return yz * (lr - (a0 - at));
    };
    total += truth.covariate_probs[m] *
             integrate_adaptive_scalar(f, 0.0, T, tol, fam.breakpoints());
  }
  return total;
}

double cox_distance_partial(const TruthSpec& truth,
                            const std::function<double(const Vec&)>& h_beta, double T,
                            double tol) {
  if (!truth.has_covariates()) throw ValidationError("cox distance needs a covariate law");
  const std::size_t m = truth.covariate_points.size();
  std::vector<double> h0v(m), hbv(m);
  for (std::size_t k = 0; k < m; ++k) {
    h0v[k] = truth.h0(truth.covariate_points[k]);
    hbv[k] = h_beta(truth.covariate_points[k]);
    if (!(h0v[k] > 0.0 && hbv[k] > 0.0))
      throw ValidationError("relative risks must be positive on the support");
  }
  const auto f = [&](double s) {
    double r0 = 0.0, q0_model = 0.0, point_terms = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const double yz = y_given_z(truth, s, truth.covariate_points[k]);
      const double dz = truth.covariate_probs[k];
      r0 += dz * yz * h0v[k];
      q0_model += dz * yz * hbv[k];
      point_terms += dz * yz * h0v[k] * std::log(h0v[k] / hbv[k]);
    }
    return (point_terms - r0 * std::log(r0 / q0_model)) * truth.alpha0(s);
  };
  return integrate_adaptive_scalar(f, 0.0, T, tol);
}

}  // namespace hazfit
