#pragma once

#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "hazfit/dataset.hpp"
#include "hazfit/linalg.hpp"
#include "hazfit/quadrature.hpp"

namespace hazfit {

struct FamilyConfig {
  std::vector<double> cuts;  // piecewise-constant cut points, starting at 0
};

// Parametric hazard family contract. Everything the fitting, influence and
// Cox machinery needs: the hazard alpha(s,theta), the log-hazard derivatives
// psi and Dpsi, the cumulative A(t,theta) and its theta-gradient A^d, plus
// the cumulative moments used by the information matrix. Built-ins supply
// closed forms; the quadrature fallback keeps custom families honest.
class HazardFamily {
 public:
  virtual ~HazardFamily() = default;

  virtual const std::string& name() const = 0;
  virtual std::size_t dim() const = 0;
  virtual bool in_domain(const Vec& theta) const = 0;

  virtual double alpha(double s, const Vec& theta) const = 0;
  virtual void psi(double s, const Vec& theta, double* out) const = 0;        // p
  virtual void dpsi(double s, const Vec& theta, double* out) const = 0;       // p*p
  virtual double cum_hazard(double t, const Vec& theta) const = 0;            // A
  virtual void cum_hazard_grad(double t, const Vec& theta, double* out) const = 0;  // p

  // ∫_0^t psi psi^t alpha ds and ∫_0^t Dpsi alpha ds (both p*p)
  virtual void cum_psi_outer(double t, const Vec& theta, double* out) const;
  virtual void cum_dpsi(double t, const Vec& theta, double* out) const;

  // Smallest t with A(t) = target, or +inf when target >= A(t_hi).
  virtual double invert_cum_hazard(double target, const Vec& theta, double t_hi) const;

  virtual Vec default_init(const SurvivalDataset& ds) const = 0;

  // Interior discontinuities of alpha in s (piecewise cut points); quadrature
  // panels split here.
  virtual std::vector<double> breakpoints() const;

  // convenience wrappers
  Vec psi_vec(double s, const Vec& theta) const;
  Mat dpsi_mat(double s, const Vec& theta) const;
  Vec cum_hazard_grad_vec(double t, const Vec& theta) const;
  Mat cum_psi_outer_mat(double t, const Vec& theta) const;
  Mat cum_dpsi_mat(double t, const Vec& theta) const;
};

// name: exponential | weibull (single-parameter, A = t^theta) |
//       weibull2 (shape/rate) | gompertz | piecewise_constant
std::unique_ptr<HazardFamily> make_family(const std::string& name,
                                          const FamilyConfig& config = {});

// ---- integrate_weighted -----------------------------------------------

enum class IntegrandKind { alpha, psi_alpha, psi_psi_alpha, dpsi_alpha };

class TimeWeight;  // weights.hpp

// ∫_{t0}^{t1} weight(s) * g(s, theta) ds for the selected integrand.
// Step weights with closed-form families evaluate exactly segment by
// segment; otherwise adaptive Gauss-Legendre partitioned on the weight
// breakpoints. Returns a flat matrix (1x1 for alpha, px1 for psi_alpha,
// pxp otherwise).
Mat integrate_weighted(const HazardFamily& fam, const Vec& theta, IntegrandKind g,
                       const TimeWeight& weight, double t0, double t1, double rel_tol = 1e-10);

Mat integrate_weighted_custom(const VectorIntegrand& f, int rows, int cols,
                              const TimeWeight& weight, double t0, double t1,
                              double rel_tol = 1e-10);

}  // namespace hazfit
