#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "hazfit/dataset.hpp"
#include "hazfit/defaults.hpp"

namespace hazfit {

// Floor applied to the denominators of inverse weights; late times can push
// the Kaplan-Meier and at-risk estimates to zero.
inline constexpr double kWeightFloor = defaults::kWeightFloor;

enum class WeightKind { unit, inverse_censoring_km, inverse_yhat, window, custom_step };

struct WeightPlan {
  WeightKind kind = WeightKind::unit;
  double window_a = 0.0, window_b = 0.0;  // window weight is I{s in (a, b]}
  StepFn custom;
  std::string description = "unit";

  static WeightPlan unit();
  static WeightPlan inverse_censoring_km();
  static WeightPlan inverse_yhat();
  static WeightPlan window(double a, double b);
  static WeightPlan custom_step(StepFn fn, std::string description);
};

// Data-bound weight function of time. Step weights carry their knots so
// integrals can be split exactly; smooth weights (local likelihood kernels)
// carry breakpoints as quadrature hints.
class TimeWeight {
 public:
  TimeWeight();  // unit
  explicit TimeWeight(StepFn step, std::string description = "step");
  // Smooth weight vanishing outside [support_lo, support_hi]; integrals clip
  // to the support and quadrature panels split at the breakpoints.
  TimeWeight(std::function<double(double)> fn, std::vector<double> breakpoints,
             double support_lo, double support_hi, std::string description);

  double operator()(double s) const;
  bool is_step() const { return is_step_; }
  bool is_unit() const;
  const StepFn& step() const { return step_; }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  double support_lo() const { return support_lo_; }
  double support_hi() const { return support_hi_; }
  const std::string& description() const { return description_; }

 private:
  bool is_step_ = true;
  StepFn step_;
  std::function<double(double)> fn_;
  std::vector<double> breakpoints_;
  double support_lo_ = -std::numeric_limits<double>::infinity();
  double support_hi_ = std::numeric_limits<double>::infinity();
  std::string description_;
};

TimeWeight resolve_weight(const WeightPlan& plan, const SurvivalDataset& ds);

}  // namespace hazfit
