// Compares the serial reference path against the OpenMP kernels on the
// replicate-parallel workloads and checks they produce identical numbers.

#include <chrono>
#include <cstdio>

#include "hazfit/bootstrap.hpp"
#include "hazfit/simulate.hpp"

using namespace hazfit;

namespace {

double seconds(const std::function<void()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

bool identical(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j)
      if (a[i][j] != b[i][j]) return false;
  return true;
}

}  // namespace

int main() {
  const TruthSpec truth = with_exponential_censoring(weibull_truth(1.3), 0.4);
  const double T = 4.0;
  const auto fam = make_family("exponential");
  const SurvivalDataset ds = simulate_sample(truth, 400, T, 20240501);
  const FitResult fr = fit_ml(ds, *fam);

  std::printf("%-28s %10s %10s %8s %s\n", "workload", "serial(s)", "openmp(s)", "speedup",
              "match");

  {
    BootstrapRun serial_run, parallel_run;
    const double ts = seconds([&] {
      serial_run = bootstrap(ds, *fam, fr, BootScheme::nonparametric_pairs, 4000, 7, {},
                             Exec::serial);
    });
    const double tp = seconds([&] {
      parallel_run = bootstrap(ds, *fam, fr, BootScheme::nonparametric_pairs, 4000, 7, {},
                               Exec::parallel);
    });
    std::printf("%-28s %10.3f %10.3f %8.2f %s\n", "bootstrap B=4000", ts, tp, ts / tp,
                identical(serial_run.replicates, parallel_run.replicates) ? "yes" : "NO");
  }

  {
    ScenarioResult serial_res, parallel_res;
    const double ts = seconds([&] {
      serial_res = coverage_study(truth, *fam, 300, 300, {0.90}, 11, T, {}, Exec::serial);
    });
    const double tp = seconds([&] {
      parallel_res = coverage_study(truth, *fam, 300, 300, {0.90}, 11, T, {}, Exec::parallel);
    });
    std::printf("%-28s %10.3f %10.3f %8.2f %s\n", "coverage n=300 reps=300", ts, tp, ts / tp,
                identical(serial_res.estimates, parallel_res.estimates) ? "yes" : "NO");
  }

  {
    VarianceRatioResult serial_res, parallel_res;
    const double ts = seconds(
        [&] { serial_res = variance_ratio_experiment(100, 200, 3, 60, 1.0, Exec::serial); });
    const double tp = seconds(
        [&] { parallel_res = variance_ratio_experiment(100, 200, 3, 60, 1.0, Exec::parallel); });
    const bool match =
        serial_res.v_pb == parallel_res.v_pb && serial_res.v_nb == parallel_res.v_nb;
    std::printf("%-28s %10.3f %10.3f %8.2f %s\n", "variance ratio reps=60", ts, tp, ts / tp,
                match ? "yes" : "NO");
  }
  return 0;
}
