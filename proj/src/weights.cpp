#include "hazfit/weights.hpp"

#include <algorithm>
#include <cmath>

#include "hazfit/errors.hpp"

namespace hazfit {

WeightPlan WeightPlan::unit() { return {}; }

WeightPlan WeightPlan::inverse_censoring_km() {
  WeightPlan p;
  p.kind = WeightKind::inverse_censoring_km;
  p.description = "inverse-censoring-km";
  return p;
}

WeightPlan WeightPlan::inverse_yhat() {
  WeightPlan p;
  p.kind = WeightKind::inverse_yhat;
  p.description = "inverse-yhat";
  return p;
}

WeightPlan WeightPlan::window(double a, double b) {
  if (!(a < b)) throw ConfigError("window weight needs a < b");
  WeightPlan p;
  p.kind = WeightKind::window;
  p.window_a = a;
  p.window_b = b;
  p.description = "window(" + std::to_string(a) + "," + std::to_string(b) + "]";
  return p;
}

WeightPlan WeightPlan::custom_step(StepFn fn, std::string description) {
  for (double v : fn.values)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ConfigError("custom weight values must be finite and nonnegative");
  if (!std::is_sorted(fn.knots.begin(), fn.knots.end()))
    throw ConfigError("custom weight knots must be increasing");
  WeightPlan p;
  p.kind = WeightKind::custom_step;
  p.custom = std::move(fn);
  p.description = std::move(description);
  return p;
}

TimeWeight::TimeWeight() : is_step_(true), description_("unit") {
  step_.values = {1.0};
}

TimeWeight::TimeWeight(StepFn step, std::string description)
    : is_step_(true), step_(std::move(step)), description_(std::move(description)) {}

TimeWeight::TimeWeight(std::function<double(double)> fn, std::vector<double> breakpoints,
                       double support_lo, double support_hi, std::string description)
    : is_step_(false),
      fn_(std::move(fn)),
      breakpoints_(std::move(breakpoints)),
      support_lo_(support_lo),
      support_hi_(support_hi),
      description_(std::move(description)) {}

double TimeWeight::operator()(double s) const { return is_step_ ? step_(s) : fn_(s); }

bool TimeWeight::is_unit() const {
  if (!is_step_) return false;
  for (double v : step_.values)
    if (v != 1.0) return false;
  return true;
}

TimeWeight resolve_weight(const WeightPlan& plan, const SurvivalDataset& ds) {
  switch (plan.kind) {
    case WeightKind::unit:
      return TimeWeight();
    case WeightKind::inverse_censoring_km: {
      const StepEstimate g = kaplan_meier(ds, KmTarget::censoring);
      StepFn w;
      w.knots = g.jump_times;
      w.values.resize(g.jump_times.size() + 1);
      // G[s,inf) is the left limit of the product-limit curve, so the weight
      // on (t_k, t_{k+1}] uses the level after the jump at t_k.
      w.values[0] = 1.0 / std::max(g.baseline, kWeightFloor);
      for (std::size_t k = 0; k < g.values.size(); ++k)
        w.values[k + 1] = 1.0 / std::max(g.values[k], kWeightFloor);
      return TimeWeight(std::move(w), plan.description);
    }
    case WeightKind::inverse_yhat: {
      const CountingView cv = counting_view(ds);
      StepFn w;
      w.knots = cv.yhat.knots;
      w.values.resize(cv.yhat.values.size());
      for (std::size_t k = 0; k < cv.yhat.values.size(); ++k)
        w.values[k] = 1.0 / std::max(cv.yhat.values[k], kWeightFloor);
      return TimeWeight(std::move(w), plan.description);
    }
    case WeightKind::window: {
      StepFn w;
      w.knots = {plan.window_a, plan.window_b};
      w.values = {0.0, 1.0, 0.0};
      return TimeWeight(std::move(w), plan.description);
    }
    case WeightKind::custom_step:
      return TimeWeight(plan.custom, plan.description);
  }
  throw ConfigError("unknown weight kind");
}

}  // namespace hazfit
