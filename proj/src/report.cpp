#include "hazfit/report.hpp"

#include <fstream>
#include <sstream>

#include "hazfit/errors.hpp"

namespace hazfit {

json to_json(const Mat& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

namespace {

json trace_json(const std::vector<IterRecord>& trace) {
  json t = json::array();
  for (const auto& r : trace)
    t.push_back({{"iter", r.iter}, {"loglik", r.loglik}, {"grad_norm", r.grad_norm},
                 {"step", r.step}});
  return t;
}

}  // namespace

json to_json(const FitResult& fr) {
  return json{{"family", fr.family},
              {"weight", fr.weight},
              {"n", fr.n},
              {"theta_hat", fr.theta_hat},
              {"loglik", fr.loglik},
              {"J_hat", to_json(fr.J_hat)},
              {"K_hat", to_json(fr.K_hat)},
              {"sandwich", to_json(fr.sandwich)},
              {"model_based_cov", to_json(fr.model_based_cov)},
              {"converged", fr.converged},
              {"iterations", fr.iterations},
              {"gradient_norm", fr.gradient_norm},
              {"trace", trace_json(fr.trace)}};
}

json to_json(const ConfidenceRegion& cr) {
  json intervals = json::array();
  for (const auto& [lo, hi] : cr.intervals) intervals.push_back({lo, hi});
  return json{{"mode", cr.mode == CovMode::model_robust ? "model_robust" : "model_based"},
              {"level", cr.level},
              {"quad_form", to_json(cr.quad_form)},
              {"radius", cr.radius},
              {"intervals", intervals}};
}

json to_json(const CoxFitResult& fr) {
  return json{{"mode", fr.mode == CoxMode::parametric ? "parametric" : "semiparametric"},
              {"family", fr.family},
              {"n", fr.n},
              {"theta_hat", fr.theta_hat},
              {"beta_hat", fr.beta_hat},
              {"loglik", fr.loglik},
              {"J_hat", to_json(fr.J_hat)},
              {"K_hat", to_json(fr.K_hat)},
              {"sandwich", to_json(fr.sandwich)},
              {"model_based_cov", to_json(fr.model_based_cov)},
              {"converged", fr.converged},
              {"iterations", fr.iterations},
              {"gradient_norm", fr.gradient_norm},
              {"trace", trace_json(fr.trace)}};
}

json to_json(const BootstrapRun& run) {
  const char* scheme = "nonparametric_pairs";
  if (run.scheme == BootScheme::parametric_km_censoring) scheme = "parametric_km_censoring";
  if (run.scheme == BootScheme::parametric_fixed_censoring) scheme = "parametric_fixed_censoring";
  json summary{{"mean", run.summary.mean}};
  if (run.summary.variance) summary["variance"] = *run.summary.variance;
  json p90 = json::array(), p95 = json::array();
  for (const auto& [lo, hi] : run.summary.percentile_90) p90.push_back({lo, hi});
  for (const auto& [lo, hi] : run.summary.percentile_95) p95.push_back({lo, hi});
  summary["percentile_90"] = p90;
  summary["percentile_95"] = p95;
  return json{{"scheme", scheme},
              {"B", run.B},
              {"seed", run.seed},
              {"valid_replicates", run.replicates.size()},
              {"failures", run.failures},
              {"summary", summary}};
}

json to_json(const ScenarioResult& sr) {
  return json{{"scenario", sr.scenario},
              {"n", sr.n},
              {"reps", sr.reps},
              {"seed", sr.seed},
              {"theta0", sr.theta0},
              {"bias", sr.bias},
              {"levels", sr.levels},
              {"coverage_model_robust", sr.coverage_model_robust},
              {"coverage_model_based", sr.coverage_model_based},
              {"mean_robust_variance", sr.mean_robust_variance},
              {"mean_model_based_variance", sr.mean_model_based_variance},
              {"empirical_variance", sr.empirical_variance},
              {"failures", sr.failures}};
}

json to_json(const EfficiencyStudyResult& es) {
  return json{{"n_times_empirical_variance", es.empirical},
              {"analytic_variance", es.analytic},
              {"failures", es.failures}};
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write file: " + path);
  out << content;
}

std::string influence_csv(const SurvivalDataset& ds, const InfluenceReport& rep,
                          double flag_threshold) {
  std::ostringstream os;
  os.precision(12);
  const std::size_t p = rep.per_record.empty() ? 0 : rep.per_record.front().size();
  os << "record,time,status";
  for (std::size_t j = 0; j < p; ++j) os << ",influence_" << j + 1;
  for (std::size_t j = 0; j < p; ++j) os << ",sphered_" << j + 1;
  os << ",flagged\n";
  for (std::size_t i = 0; i < rep.per_record.size(); ++i) {
    os << i + 1 << "," << ds[i].x << "," << ds[i].delta;
    for (std::size_t j = 0; j < p; ++j) os << "," << rep.per_record[i][j];
    for (std::size_t j = 0; j < p; ++j) os << "," << rep.sphered[i][j];
    os << "," << (norm2(rep.sphered[i]) >= flag_threshold ? 1 : 0) << "\n";
  }
  return os.str();
}

std::string replicates_csv(const BootstrapRun& run) {
  std::ostringstream os;
  os.precision(17);
  const std::size_t p = run.replicates.empty() ? 0 : run.replicates.front().size();
  os << "replicate";
  for (std::size_t j = 0; j < p; ++j) os << ",theta_" << j + 1;
  os << "\n";
  for (std::size_t i = 0; i < run.replicates.size(); ++i) {
    os << i + 1;
    for (std::size_t j = 0; j < p; ++j) os << "," << run.replicates[i][j];
    os << "\n";
  }
  return os.str();
}

std::string local_curve_csv(const LocalCurve& curve) {
  std::ostringstream os;
  os.precision(12);
  const std::size_t p = [&] {
    for (const auto& e : curve.estimates)
      if (e) return e->size();
    return std::size_t{0};
  }();
  os << "s";
  for (std::size_t j = 0; j < p; ++j) os << ",theta_" << j + 1;
  os << "\n";
  for (std::size_t g = 0; g < curve.grid.size(); ++g) {
    os << curve.grid[g];
    if (curve.estimates[g])
      for (std::size_t j = 0; j < p; ++j) os << "," << (*curve.estimates[g])[j];
    else
      for (std::size_t j = 0; j < p; ++j) os << ",";
    os << "\n";
  }
  return os.str();
}

}  // namespace hazfit
