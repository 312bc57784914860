// Command-line front end: fit, diagnose, bootstrap, local, simulate, distance.
// Exit codes: 0 success, 2 validation/configuration error, 3 numerical or
// convergence failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "hazfit/defaults.hpp"
#include "hazfit/errors.hpp"
#include "hazfit/report.hpp"

namespace {

using namespace hazfit;

struct CommonArgs {
  std::string input;
  std::string family = "exponential";
  std::vector<double> cuts;
  std::string weight = "unit";
  double window_a = 0.0, window_b = 0.0;
  double horizon = 0.0;  // 0 = default (max observed time)
  std::string mode = "homogeneous";
  std::string out;
  std::string censor_column;
};

void add_common(CLI::App* cmd, CommonArgs& a, bool needs_family = true) {
  cmd->add_option("--input", a.input, "CSV with columns time,status[,z1..zq]")->required();
  if (needs_family) {
    cmd->add_option("--family", a.family,
                    "exponential | weibull | weibull2 | gompertz | piecewise_constant");
    cmd->add_option("--cuts", a.cuts, "piecewise cut points, starting at 0")->delimiter(',');
  }
  cmd->add_option("--weight", a.weight,
                  "unit | inverse-censoring-km | inverse-yhat | window");
  cmd->add_option("--window-a", a.window_a, "window weight lower edge");
  cmd->add_option("--window-b", a.window_b, "window weight upper edge");
  cmd->add_option("--horizon", a.horizon, "observation horizon T (default: max time)");
  cmd->add_option("--mode", a.mode, "homogeneous | cox-parametric | cox-partial");
  cmd->add_option("--out", a.out, "write the JSON report here (default: stdout)");
  cmd->add_option("--censor-column", a.censor_column,
                  "column with known censoring times (fixed-censoring bootstrap)");
}

SurvivalDataset load_dataset(const CommonArgs& a) {
  CsvSchema schema;
  schema.censor_time_column = a.censor_column;
  SurvivalDataset ds = load_csv(a.input, schema);
  if (a.horizon > 0.0) ds = ds.with_horizon(a.horizon);
  return ds;
}

WeightPlan weight_plan(const CommonArgs& a) {
  if (a.weight == "unit") return WeightPlan::unit();
  if (a.weight == "inverse-censoring-km") return WeightPlan::inverse_censoring_km();
  if (a.weight == "inverse-yhat") return WeightPlan::inverse_yhat();
  if (a.weight == "window") return WeightPlan::window(a.window_a, a.window_b);
  throw ConfigError("unknown weight: " + a.weight);
}

json config_json(const CommonArgs& a) {
  return json{{"input", a.input},   {"family", a.family},     {"cuts", a.cuts},
              {"weight", a.weight}, {"window_a", a.window_a}, {"window_b", a.window_b},
              {"horizon", a.horizon}, {"mode", a.mode}};
}

void emit(const json& report, const std::string& out) {
  if (out.empty())
    std::cout << report.dump(2) << "\n";
  else
    write_text_file(out, report.dump(2) + "\n");
}

FamilyConfig family_config(const CommonArgs& a) {
  FamilyConfig cfg;
  cfg.cuts = a.cuts;
  return cfg;
}

json fit_report(const CommonArgs& a, const SurvivalDataset& ds, std::vector<double> levels) {
  json report;
  report["config"] = config_json(a);
  if (a.mode == "homogeneous") {
    const auto fam = make_family(a.family, family_config(a));
    const WeightPlan plan = weight_plan(a);
    const FitResult fr = fit_ml(ds, *fam, plan);
    report["fit"] = to_json(fr);
    report["target"] =
        plan.kind == WeightKind::unit
            ? "least false parameter of the plain likelihood"
            : "least false parameter of the " + plan.description + " weighted likelihood";
    json regions = json::array();
    for (double lv : levels) {
      regions.push_back(to_json(confidence_region(fr, lv, CovMode::model_robust)));
      regions.push_back(to_json(confidence_region(fr, lv, CovMode::model_based)));
    }
    report["confidence"] = regions;
  } else if (a.mode == "cox-parametric") {
    const auto fam = make_family(a.family, family_config(a));
    report["fit"] = to_json(fit_cox_parametric(ds, *fam));
  } else if (a.mode == "cox-partial") {
    report["fit"] = to_json(fit_cox_partial(ds));
  } else {
    throw ConfigError("unknown mode: " + a.mode);
  }
  return report;
}

int run(int argc, char** argv) {
  CLI::App app{"parametric hazard models with model-robust inference"};
  app.require_subcommand(1);
  app.set_config("--config");

  CommonArgs fit_args;
  std::vector<double> fit_levels{defaults::kConfidenceLevel};
  auto* cmd_fit = app.add_subcommand("fit", "maximum (weighted) likelihood fit");
  add_common(cmd_fit, fit_args);
  cmd_fit->add_option("--level", fit_levels, "confidence levels")->delimiter(',');

  CommonArgs diag_args;
  double diag_threshold = defaults::kInfluenceFlagThreshold;
  std::string diag_csv;
  auto* cmd_diag = app.add_subcommand("diagnose", "per-record influence screening");
  add_common(cmd_diag, diag_args);
  cmd_diag->add_option("--threshold", diag_threshold, "sphered-norm flag threshold");
  cmd_diag->add_option("--influence-csv", diag_csv, "write per-record influence CSV here");

  CommonArgs boot_args;
  std::string boot_scheme = "nonparametric";
  int boot_B = defaults::kBootstrapB;
  std::uint64_t boot_seed = 1;
  std::string boot_csv;
  auto* cmd_boot = app.add_subcommand("bootstrap", "bootstrap the fitted estimator");
  add_common(cmd_boot, boot_args);
  cmd_boot->add_option("--scheme", boot_scheme,
                       "parametric-km | parametric-fixed | nonparametric | scheme1 | scheme2");
  cmd_boot->add_option("--B", boot_B, "replicates");
  cmd_boot->add_option("--seed", boot_seed, "RNG seed");
  cmd_boot->add_option("--replicates-csv", boot_csv, "write replicate estimates CSV here");

  CommonArgs local_args;
  double local_h = 1.0;
  std::string local_kernel = "uniform";
  std::size_t local_grid = defaults::kLocalGridPoints;
  std::string local_csv;
  auto* cmd_local = app.add_subcommand("local", "local likelihood parameter curve");
  add_common(cmd_local, local_args);
  cmd_local->add_option("--bandwidth", local_h, "kernel half-width")->required();
  cmd_local->add_option("--kernel", local_kernel, "uniform | epanechnikov | gaussian");
  cmd_local->add_option("--grid-size", local_grid, "equispaced grid points");
  cmd_local->add_option("--curve-csv", local_csv, "write (s, theta(s)) CSV here");

  auto* cmd_sim = app.add_subcommand("simulate", "Monte Carlo studies");
  std::string sim_scenario = "coverage";
  std::string sim_truth = "weibull:1.5", sim_censoring = "none", sim_family = "exponential";
  std::string sim_weight = "unit";
  double sim_g = 0.5, sim_eps = 0.1, sim_T = 0.0;
  std::size_t sim_n = 500;
  int sim_reps = 200, sim_B = 500;
  std::uint64_t sim_seed = 1;
  std::vector<double> sim_levels{0.90};
  std::string sim_out;
  cmd_sim->add_option("--scenario", sim_scenario, "5B | coverage | ratio");
  cmd_sim->add_option("--truth", sim_truth, "exponential:rate | weibull:shape[:rate] | gompertz:a:b");
  cmd_sim->add_option("--censoring", sim_censoring, "none | exponential:rate");
  cmd_sim->add_option("--family", sim_family, "fitted family");
  cmd_sim->add_option("--weight", sim_weight, "unit | inverse-censoring-km | inverse-yhat");
  cmd_sim->add_option("--g", sim_g, "censoring rate multiple (scenario 5B)");
  cmd_sim->add_option("--eps", sim_eps, "tail mass exp(-theta0 T) (scenario 5B)");
  cmd_sim->add_option("--horizon", sim_T, "observation horizon T");
  cmd_sim->add_option("--n", sim_n, "sample size");
  cmd_sim->add_option("--reps", sim_reps, "replications");
  cmd_sim->add_option("--B", sim_B, "bootstrap replicates (scenario ratio)");
  cmd_sim->add_option("--seed", sim_seed, "RNG seed");
  cmd_sim->add_option("--level", sim_levels, "confidence levels")->delimiter(',');
  cmd_sim->add_option("--out", sim_out, "write the JSON report here");

  auto* cmd_dist = app.add_subcommand("distance", "distance-measure cross checks");
  std::string dist_check = "kl";
  std::string dist_family = "exponential";
  double dist_theta_star = 1.0, dist_theta = 2.0, dist_T = 5.0;
  std::string dist_out;
  cmd_dist->add_option("--check", dist_check, "kl");
  cmd_dist->add_option("--family", dist_family, "model family");
  cmd_dist->add_option("--theta-star", dist_theta_star, "true exponential rate");
  cmd_dist->add_option("--theta", dist_theta, "model parameter");
  cmd_dist->add_option("--T", dist_T, "horizon");
  cmd_dist->add_option("--out", dist_out, "write the JSON report here");

  CLI11_PARSE(app, argc, argv);

  if (cmd_fit->parsed()) {
    const SurvivalDataset ds = load_dataset(fit_args);
    emit(fit_report(fit_args, ds, fit_levels), fit_args.out);
    return 0;
  }

  if (cmd_diag->parsed()) {
    const SurvivalDataset ds = load_dataset(diag_args);
    json report;
    report["config"] = config_json(diag_args);
    report["config"]["threshold"] = diag_threshold;
    InfluenceReport rep;
    if (diag_args.mode == "homogeneous") {
      const auto fam = make_family(diag_args.family, family_config(diag_args));
      const TimeWeight w = resolve_weight(weight_plan(diag_args), ds);
      const FitResult fr = fit_ml(ds, *fam, w);
      rep = influence_empirical(ds, *fam, fr, w);
      report["fit"] = to_json(fr);
    } else if (diag_args.mode == "cox-parametric") {
      const auto fam = make_family(diag_args.family, family_config(diag_args));
      const CoxFitResult fr = fit_cox_parametric(ds, *fam);
      rep = cox_influence(fr);
      report["fit"] = to_json(fr);
    } else {
      const CoxFitResult fr = fit_cox_partial(ds);
      rep = cox_influence(fr);
      report["fit"] = to_json(fr);
    }
    int flagged = 0;
    for (const Vec& s : rep.sphered)
      if (norm2(s) >= diag_threshold) ++flagged;
    report["records"] = rep.per_record.size();
    report["flagged"] = flagged;
    report["sigma_hat"] = to_json(rep.sigma_hat);
    const std::string csv = influence_csv(ds, rep, diag_threshold);
    if (!diag_csv.empty())
      write_text_file(diag_csv, csv);
    else
      report["influence_csv"] = csv;
    emit(report, diag_args.out);
    return 0;
  }

  if (cmd_boot->parsed()) {
    const SurvivalDataset ds = load_dataset(boot_args);
    json report;
    report["config"] = config_json(boot_args);
    report["config"]["scheme"] = boot_scheme;
    report["config"]["B"] = boot_B;
    report["config"]["seed"] = boot_seed;
    BootstrapRun run;
    if (boot_scheme == "scheme1" || boot_scheme == "scheme2") {
      const auto fam = make_family(boot_args.family, family_config(boot_args));
      const CoxFitResult fr = boot_args.mode == "cox-partial"
                                  ? fit_cox_partial(ds)
                                  : fit_cox_parametric(ds, *fam);
      run = cox_bootstrap(ds, fam.get(), fr,
                          boot_scheme == "scheme1" ? CoxBootScheme::scheme1_parametric
                                                   : CoxBootScheme::scheme2_triplets,
                          boot_B, boot_seed);
      report["fit"] = to_json(fr);
    } else {
      BootScheme scheme;
      if (boot_scheme == "parametric-km")
        scheme = BootScheme::parametric_km_censoring;
      else if (boot_scheme == "parametric-fixed")
        scheme = BootScheme::parametric_fixed_censoring;
      else if (boot_scheme == "nonparametric")
        scheme = BootScheme::nonparametric_pairs;
      else
        throw ConfigError("unknown scheme: " + boot_scheme);
      const auto fam = make_family(boot_args.family, family_config(boot_args));
      const WeightPlan plan = weight_plan(boot_args);
      const FitResult fr = fit_ml(ds, *fam, plan);
      run = bootstrap(ds, *fam, fr, scheme, boot_B, boot_seed, plan);
      report["fit"] = to_json(fr);
    }
    report["bootstrap"] = to_json(run);
    if (!boot_csv.empty()) write_text_file(boot_csv, replicates_csv(run));
    emit(report, boot_args.out);
    return 0;
  }

  if (cmd_local->parsed()) {
    const SurvivalDataset ds = load_dataset(local_args);
    const auto fam = make_family(local_args.family, family_config(local_args));
    Kernel kernel = Kernel::uniform_window;
    if (local_kernel == "epanechnikov") kernel = Kernel::epanechnikov;
    else if (local_kernel == "gaussian") kernel = Kernel::gaussian_truncated;
    else if (local_kernel != "uniform") throw ConfigError("unknown kernel: " + local_kernel);
    const LocalCurve curve =
        fit_local(ds, *fam, default_grid(ds.horizon(), local_grid), local_h, kernel);
    const std::string csv = local_curve_csv(curve);
    json report;
    report["config"] = config_json(local_args);
    report["config"]["bandwidth"] = local_h;
    report["config"]["kernel"] = local_kernel;
    report["config"]["grid_size"] = local_grid;
    if (!local_csv.empty())
      write_text_file(local_csv, csv);
    else
      report["curve_csv"] = csv;
    emit(report, local_args.out);
    return 0;
  }

  if (cmd_sim->parsed()) {
    json report;
    report["config"] = json{{"scenario", sim_scenario}, {"seed", sim_seed},
                            {"n", sim_n},               {"reps", sim_reps}};
    if (sim_scenario == "5B") {
      report["config"]["g"] = sim_g;
      report["config"]["eps"] = sim_eps;
      const EfficiencyStudyResult res =
          efficiency_study_5B(sim_g, sim_eps, sim_n, sim_reps, sim_seed);
      report["result"] = to_json(res);
      json rows = json::array();
      const char* names[3] = {"plain", "inverse_censoring_km", "inverse_yhat"};
      for (int j = 0; j < 3; ++j)
        rows.push_back({{"estimator", names[j]},
                        {"n_var_empirical", res.empirical[j]},
                        {"n_var_analytic", res.analytic[j]},
                        {"ratio", res.empirical[j] / res.analytic[j]}});
      report["table"] = rows;
    } else if (sim_scenario == "ratio") {
      report["config"]["B"] = sim_B;
      const VarianceRatioResult res =
          variance_ratio_experiment(static_cast<int>(sim_n), sim_B, sim_seed, sim_reps);
      report["result"] = {{"variance_ratio_pb_over_nb", res.ratio}};
    } else if (sim_scenario == "coverage") {
      auto parse_truth = [&]() {
        std::stringstream ss(sim_truth);
        std::string kind;
        std::getline(ss, kind, ':');
        std::vector<double> params;
        std::string tok;
        while (std::getline(ss, tok, ':')) params.push_back(std::stod(tok));
        if (kind == "exponential") return exponential_truth(params.at(0));
        if (kind == "weibull")
          return params.size() > 1 ? weibull_truth(params.at(0), params.at(1))
                                   : weibull_truth(params.at(0));
        if (kind == "gompertz") return gompertz_truth(params.at(0), params.at(1));
        throw ConfigError("unknown truth: " + sim_truth);
      };
      TruthSpec truth = parse_truth();
      if (sim_censoring != "none") {
        std::stringstream ss(sim_censoring);
        std::string kind;
        std::getline(ss, kind, ':');
        std::string rate;
        std::getline(ss, rate, ':');
        if (kind != "exponential") throw ConfigError("unknown censoring: " + sim_censoring);
        truth = with_exponential_censoring(std::move(truth), std::stod(rate));
      }
      const double T = sim_T > 0.0 ? sim_T : 3.0;
      report["config"]["truth"] = sim_truth;
      report["config"]["censoring"] = sim_censoring;
      report["config"]["family"] = sim_family;
      report["config"]["horizon"] = T;
      const auto fam = make_family(sim_family);
      WeightPlan plan = WeightPlan::unit();
      if (sim_weight == "inverse-censoring-km") plan = WeightPlan::inverse_censoring_km();
      else if (sim_weight == "inverse-yhat") plan = WeightPlan::inverse_yhat();
      ScenarioResult res =
          coverage_study(truth, *fam, sim_n, sim_reps, sim_levels, sim_seed, T, plan);
      res.scenario = "coverage";
      report["result"] = to_json(res);
    } else {
      throw ConfigError("unknown scenario: " + sim_scenario);
    }
    emit(report, sim_out);
    return 0;
  }

  if (cmd_dist->parsed()) {
    if (dist_check != "kl") throw ConfigError("unknown check: " + dist_check);
    const auto fam = make_family(dist_family);
    const TruthSpec truth = exponential_truth(dist_theta_star);
    const double residual = kl_identity_check(truth, *fam, {dist_theta}, dist_T);
    json report;
    report["config"] = {{"check", dist_check},
                        {"family", dist_family},
                        {"theta_star", dist_theta_star},
                        {"theta", dist_theta},
                        {"T", dist_T}};
    report["residual"] = residual;
    std::cout << "kl identity residual: " << residual << "\n";
    emit(report, dist_out);
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const hazfit::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const hazfit::ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    for (const auto& line : e.trace()) std::cerr << "  " << line << "\n";
    return 3;
  } catch (const hazfit::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
