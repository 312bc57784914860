#include "hazfit/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hazfit/errors.hpp"
#include "hazfit/stats.hpp"

namespace hazfit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SurvivalRecord make_pair(double lifetime, double censor, double T) {
  SurvivalRecord r;
  const double x = std::min(lifetime, censor);
  if (x > T) {
    r.x = T;
    r.delta = 0;
  } else {
    r.x = x;
    r.delta = lifetime <= censor ? 1 : 0;
  }
  return r;
}

}  // namespace

CensoringSampler::CensoringSampler(const SurvivalDataset& ds) {
  const StepEstimate g = kaplan_meier(ds, KmTarget::censoring);
  double prev = 1.0;
  double cum = 0.0;
  for (std::size_t k = 0; k < g.jump_times.size(); ++k) {
    const double mass = prev - g.values[k];
    prev = g.values[k];
    if (mass <= 0.0) continue;
    times_.push_back(g.jump_times[k]);
    cum += mass;
    cum_probs_.push_back(cum);
  }
}

double CensoringSampler::draw(Rng& rng) const {
  const double u = rng.uniform();
  const auto it = std::lower_bound(cum_probs_.begin(), cum_probs_.end(), u);
  if (it == cum_probs_.end()) return kInf;  // defective mass: never censors
  return times_[static_cast<std::size_t>(it - cum_probs_.begin())];
}

BootstrapSummary summarize(const std::vector<Vec>& replicates, std::size_t p) {
  BootstrapSummary s;
  s.mean.assign(p, 0.0);
  if (replicates.empty()) return s;
  std::vector<std::vector<double>> cols(p);
  for (const Vec& r : replicates)
    for (std::size_t j = 0; j < p; ++j) cols[j].push_back(r[j]);
  for (std::size_t j = 0; j < p; ++j) s.mean[j] = mean(cols[j]);
  if (replicates.size() >= 2) {
    Vec v(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) v[j] = variance(cols[j]);
    s.variance = v;
  }
  for (std::size_t j = 0; j < p; ++j) {
    s.percentile_90.emplace_back(quantile(cols[j], 0.05), quantile(cols[j], 0.95));
    s.percentile_95.emplace_back(quantile(cols[j], 0.025), quantile(cols[j], 0.975));
  }
  return s;
}

BootstrapRun bootstrap(const SurvivalDataset& ds, const HazardFamily& fam, const FitResult& fr,
                       BootScheme scheme, int B, std::uint64_t seed, const WeightPlan& weight,
                       Exec exec, const SolverOptions& opts) {
  if (!fr.converged) throw ValidationError("bootstrap requires a converged base fit");
  if (B < 1) throw ValidationError("bootstrap needs B >= 1");
  if (scheme == BootScheme::parametric_fixed_censoring && !ds.has_censor_times())
    throw ConfigError(
        "parametric_fixed_censoring needs a censoring time on every record "
        "(supply the censoring-time column)");

  const std::size_t n = ds.size();
  const double T = ds.horizon();
  const Rng root(seed);
  const CensoringSampler censor(ds);

  std::vector<std::optional<Vec>> slots(static_cast<std::size_t>(B));

  parallel_for(static_cast<std::size_t>(B), exec, [&](std::size_t b) {
    Rng rng = root.stream(b);
    std::vector<SurvivalRecord> recs;
    recs.reserve(n);
    switch (scheme) {
      case BootScheme::parametric_km_censoring: {
        for (std::size_t i = 0; i < n; ++i) {
          const double e = rng.exponential(1.0);
          const double lifetime = fam.invert_cum_hazard(e, fr.theta_hat, T);
          const double c = censor.draw(rng);
          recs.push_back(make_pair(lifetime, c, T));
        }
        break;
      }
      case BootScheme::parametric_fixed_censoring: {
        for (std::size_t i = 0; i < n; ++i) {
          const double e = rng.exponential(1.0);
          const double lifetime = fam.invert_cum_hazard(e, fr.theta_hat, T);
          recs.push_back(make_pair(lifetime, *ds[i].censor_time, T));
        }
        break;
      }
      case BootScheme::nonparametric_pairs: {
        for (std::size_t i = 0; i < n; ++i) {
          const SurvivalRecord& src = ds[rng.uniform_int(n)];
          SurvivalRecord r;
          r.x = src.x;
          r.delta = src.delta;
          recs.push_back(r);
        }
        break;
      }
    }
    try {
      const SurvivalDataset rep_ds(std::move(recs), T);
      const FitResult rep = fit_ml(rep_ds, fam, weight, fr.theta_hat, opts);
      slots[b] = rep.theta_hat;
    } catch (const Error&) {
      // recorded as a failure; never silently redrawn
    }
  });

  BootstrapRun run;
  run.scheme = scheme;
  run.B = B;
  run.seed = seed;
  for (auto& s : slots) {
    if (s)
      run.replicates.push_back(std::move(*s));
    else
      ++run.failures;
  }
  if (run.replicates.empty())
    throw ConvergenceError("all bootstrap replicates failed", fr.theta_hat);
  run.summary = summarize(run.replicates, fam.dim());
  return run;
}

VarianceRatioResult variance_ratio_experiment(int n, int B, std::uint64_t seed, int reps,
                                              double theta0, Exec exec) {
  if (reps < 2) throw ValidationError("variance ratio needs at least two outer replications");
  if (n < 2 || B < 2) throw ValidationError("variance ratio needs n >= 2 and B >= 2");

  const auto fam = make_family("exponential");
  const Rng root(seed);
  // generous horizon: the uncensored model puts negligible mass past 50/theta
  const double T = 50.0 / theta0;

  std::vector<double> v_pb(static_cast<std::size_t>(reps), 0.0);
  std::vector<double> v_nb(static_cast<std::size_t>(reps), 0.0);

  parallel_for(static_cast<std::size_t>(reps), exec, [&](std::size_t r) {
    Rng rng = root.stream(r);
    std::vector<SurvivalRecord> recs(static_cast<std::size_t>(n));
    for (auto& rec : recs) {
      rec.x = std::min(rng.exponential(theta0), T);
      rec.delta = rec.x < T ? 1 : 0;
    }
    const SurvivalDataset ds(std::move(recs), T);
    const FitResult fr = fit_ml(ds, *fam);
    // both schemes share the outer data; replicate streams are salted by the
    // scheme so their draws stay independent of each other
    const BootstrapRun pb = bootstrap(ds, *fam, fr, BootScheme::parametric_km_censoring, B,
                                      root.stream(r).next_u64() ^ 0x9e37u, {}, Exec::serial);
    const BootstrapRun nb = bootstrap(ds, *fam, fr, BootScheme::nonparametric_pairs, B,
                                      root.stream(r).next_u64() ^ 0x79b9u, {}, Exec::serial);
    if (!pb.summary.variance || !nb.summary.variance)
      throw NumericError("bootstrap variance undefined in ratio experiment");
    v_pb[r] = (*pb.summary.variance)[0];
    v_nb[r] = (*nb.summary.variance)[0];
  });

  VarianceRatioResult out;
  out.v_pb = std::move(v_pb);
  out.v_nb = std::move(v_nb);
  out.ratio = variance(out.v_pb) / variance(out.v_nb);
  return out;
}

}  // namespace hazfit
