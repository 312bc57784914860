#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hazfit/errors.hpp"

namespace hazfit {

struct SurvivalRecord {
  double x = 0.0;               // observed time min(lifetime, censoring)
  int delta = 1;                // 1 = event, 0 = censored
  std::vector<double> z;        // covariates, possibly empty
  std::optional<double> censor_time;  // known censoring time, when supplied
};

// Records are kept sorted by x ascending; at equal x events come before
// censorings, then input order. Exact double equality defines a tie.
class SurvivalDataset {
 public:
  SurvivalDataset() = default;
  SurvivalDataset(std::vector<SurvivalRecord> records,
                  std::optional<double> horizon = std::nullopt);

  std::size_t size() const { return records_.size(); }
  std::size_t covariate_dim() const { return q_; }
  double horizon() const { return horizon_; }
  const std::vector<SurvivalRecord>& records() const { return records_; }
  const SurvivalRecord& operator[](std::size_t i) const { return records_[i]; }

  double total_events() const;
  double total_exposure() const;  // sum of x_i
  bool has_censor_times() const;

  // Observation window override. T below max(x) truncates: affected records
  // become censored at T.
  SurvivalDataset with_horizon(double T) const;
  SurvivalDataset without_record(std::size_t i) const;  // keeps the horizon

 private:
  std::vector<SurvivalRecord> records_;
  double horizon_ = 0.0;
  std::size_t q_ = 0;
};

// Left-continuous step function: value(s) is constant on (knot[k-1], knot[k]].
struct StepFn {
  std::vector<double> knots;   // strictly increasing
  std::vector<double> values;  // size knots.size() + 1

  double operator()(double s) const;
};

struct CountingView {
  std::vector<double> event_times;  // distinct, increasing
  std::vector<double> dN;           // event multiplicities
  std::vector<double> at_risk;      // Y at each event time
  StepFn yhat;                      // Y(s)/n

  double Y(double s) const;  // #{x_i >= s}
  std::size_t n = 0;
};

// Right-continuous step estimate: values are the levels just after each jump.
struct StepEstimate {
  double baseline = 0.0;
  std::vector<double> jump_times;
  std::vector<double> values;

  double at(double t) const;      // value including a jump at t
  double before(double t) const;  // left limit at t
};

enum class KmTarget { lifetime, censoring };

struct CsvSchema {
  std::string time_column = "time";
  std::string status_column = "status";
  std::vector<std::string> covariate_columns;  // empty -> auto-detect z1..zq
  std::string censor_time_column;              // optional
};

SurvivalDataset load_csv(const std::string& path, const CsvSchema& schema = {});

CountingView counting_view(const SurvivalDataset& ds);

StepEstimate nelson_aalen(const SurvivalDataset& ds);

// Product-limit estimate. target=censoring flips the roles of delta; at tied
// times events are removed from the risk set before censorings are assessed.
StepEstimate kaplan_meier(const SurvivalDataset& ds, KmTarget target = KmTarget::lifetime);

}  // namespace hazfit
