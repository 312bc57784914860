#include "hazfit/cox.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hazfit/errors.hpp"
#include "hazfit/stats.hpp"

namespace hazfit {

namespace {

void check_covariates(const SurvivalDataset& ds) {
  const std::size_t q = ds.covariate_dim();
  if (q < 1) throw ValidationError("Cox regression needs at least one covariate");
  for (std::size_t j = 0; j < q; ++j) {
    const double first = ds[0].z[j];
    bool varies = false;
    for (const auto& r : ds.records())
      if (r.z[j] != first) {
        varies = true;
        break;
      }
    if (!varies)
      throw ValidationError("covariate column " + std::to_string(j + 1) +
                            " is constant; its coefficient is not identifiable");
  }
  if (ds.total_events() < 1.0) throw ValidationError("Cox regression needs at least one event");
}

struct Parts {
  double loglik = 0.0;
  Vec score;
  Mat hess;
};

// Joint (theta, beta) likelihood for the parametric proportional-hazards
// model, decomposed per record with the family's cumulative closed forms.
class ParametricCoxLik {
 public:
  ParametricCoxLik(const SurvivalDataset& ds, const HazardFamily& fam)
      : ds_(ds), fam_(fam), p_(fam.dim()), q_(ds.covariate_dim()) {}

  Parts evaluate(const Vec& par, bool need_hess) const {
    const std::size_t d = p_ + q_;
    const Vec th(par.begin(), par.begin() + p_);
    if (!fam_.in_domain(th)) throw ValidationError("theta outside the parameter domain");
    Parts out;
    out.score.assign(d, 0.0);
    out.hess = Mat(d, d);
    const std::size_t n = ds_.size();

    Vec ps(p_), ad(p_), c1(p_ * p_), c2(p_ * p_);
    Mat dp(p_, p_);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& r = ds_[i];
      double bz = 0.0;
      for (std::size_t j = 0; j < q_; ++j) bz += par[p_ + j] * r.z[j];
      const double ebz = std::exp(bz);
      const double a = fam_.cum_hazard(r.x, th);
      fam_.cum_hazard_grad(r.x, th, ad.data());

      out.loglik -= ebz * a;
      for (std::size_t k = 0; k < p_; ++k) out.score[k] -= ebz * ad[k];
      for (std::size_t j = 0; j < q_; ++j) out.score[p_ + j] -= r.z[j] * ebz * a;

      if (r.delta == 1) {
        out.loglik += std::log(fam_.alpha(r.x, th)) + bz;
        fam_.psi(r.x, th, ps.data());
        for (std::size_t k = 0; k < p_; ++k) out.score[k] += ps[k];
        for (std::size_t j = 0; j < q_; ++j) out.score[p_ + j] += r.z[j];
      }

      if (need_hess) {
        fam_.cum_psi_outer(r.x, th, c1.data());
        fam_.cum_dpsi(r.x, th, c2.data());
        for (std::size_t a1 = 0; a1 < p_; ++a1)
          for (std::size_t a2 = 0; a2 < p_; ++a2)
            out.hess(a1, a2) -= ebz * (c1[a1 * p_ + a2] + c2[a1 * p_ + a2]);
        for (std::size_t a1 = 0; a1 < p_; ++a1)
          for (std::size_t j = 0; j < q_; ++j) {
            const double v = ebz * ad[a1] * r.z[j];
            out.hess(a1, p_ + j) -= v;
            out.hess(p_ + j, a1) -= v;
          }
        for (std::size_t j1 = 0; j1 < q_; ++j1)
          for (std::size_t j2 = 0; j2 < q_; ++j2)
            out.hess(p_ + j1, p_ + j2) -= r.z[j1] * r.z[j2] * ebz * a;
        if (r.delta == 1) {
          fam_.dpsi(r.x, th, dp.data());
          for (std::size_t a1 = 0; a1 < p_; ++a1)
            for (std::size_t a2 = 0; a2 < p_; ++a2) out.hess(a1, a2) += dp(a1, a2);
        }
      }
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    out.loglik *= inv_n;
    for (double& v : out.score) v *= inv_n;
    out.hess *= inv_n;
    symmetrize(out.hess);
    return out;
  }

  // L_i = [ psi(x_i) delta_i - e^{b z_i} Ad(x_i); z_i (delta_i - e^{b z_i} A(x_i)) ]
  std::vector<Vec> l_vectors(const Vec& par) const {
    const Vec th(par.begin(), par.begin() + p_);
    std::vector<Vec> ls(ds_.size(), Vec(p_ + q_, 0.0));
    Vec ps(p_), ad(p_);
    for (std::size_t i = 0; i < ds_.size(); ++i) {
      const auto& r = ds_[i];
      double bz = 0.0;
      for (std::size_t j = 0; j < q_; ++j) bz += par[p_ + j] * r.z[j];
      const double ebz = std::exp(bz);
      fam_.cum_hazard_grad(r.x, th, ad.data());
      const double a = fam_.cum_hazard(r.x, th);
      for (std::size_t k = 0; k < p_; ++k) ls[i][k] = -ebz * ad[k];
      for (std::size_t j = 0; j < q_; ++j) ls[i][p_ + j] = -r.z[j] * ebz * a;
      if (r.delta == 1) {
        fam_.psi(r.x, th, ps.data());
        for (std::size_t k = 0; k < p_; ++k) ls[i][k] += ps[k];
        for (std::size_t j = 0; j < q_; ++j) ls[i][p_ + j] += r.z[j];
      }
    }
    return ls;
  }

 private:
  const SurvivalDataset& ds_;
  const HazardFamily& fam_;
  std::size_t p_, q_;
};

// Breslow-tie partial likelihood; risk-set sums accumulated from the largest
// observed time downward.
class PartialLik {
 public:
  explicit PartialLik(const SurvivalDataset& ds) : ds_(ds), q_(ds.covariate_dim()) {}

  Parts evaluate(const Vec& beta, bool need_hess) const {
    Parts out;
    out.score.assign(q_, 0.0);
    out.hess = Mat(q_, q_);
    const auto& rec = ds_.records();
    const std::size_t n = rec.size();

    double s0 = 0.0;
    Vec s1(q_, 0.0);
    Mat s2(q_, q_);
    std::size_t i = n;
    while (i > 0) {
      // extend the risk set down to and including all ties at rec[i-1].x
      const double t = rec[i - 1].x;
      std::size_t j = i;
      while (j > 0 && rec[j - 1].x == t) --j;
      for (std::size_t k = j; k < i; ++k) {
        double bz = 0.0;
        for (std::size_t c = 0; c < q_; ++c) bz += beta[c] * rec[k].z[c];
        const double e = std::exp(bz);
        s0 += e;
        for (std::size_t c = 0; c < q_; ++c) s1[c] += e * rec[k].z[c];
        if (need_hess)
          for (std::size_t c1 = 0; c1 < q_; ++c1)
            for (std::size_t c2 = 0; c2 < q_; ++c2) s2(c1, c2) += e * rec[k].z[c1] * rec[k].z[c2];
      }
      for (std::size_t k = j; k < i; ++k) {
        if (rec[k].delta != 1) continue;
        double bz = 0.0;
        for (std::size_t c = 0; c < q_; ++c) bz += beta[c] * rec[k].z[c];
        out.loglik += bz - std::log(s0);
        for (std::size_t c = 0; c < q_; ++c) out.score[c] += rec[k].z[c] - s1[c] / s0;
        if (need_hess)
          for (std::size_t c1 = 0; c1 < q_; ++c1)
            for (std::size_t c2 = 0; c2 < q_; ++c2)
              out.hess(c1, c2) -= s2(c1, c2) / s0 - s1[c1] * s1[c2] / (s0 * s0);
      }
      i = j;
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    out.loglik *= inv_n;
    for (double& v : out.score) v *= inv_n;
    out.hess *= inv_n;
    symmetrize(out.hess);
    return out;
  }

  // score residuals: L_i = delta_i (z_i - E(x_i))
  //                        - e^{b z_i} sum_{events t <= x_i} (z_i - E(t)) dN(t)/S0(t)
  std::vector<Vec> l_vectors(const Vec& beta) const {
    const auto& rec = ds_.records();
    const std::size_t n = rec.size();

    // risk-set statistics at each distinct event time, largest first
    struct EventBlock {
      double t;
      double dN;
      double s0;
      Vec e;  // E_n(t)
    };
    std::vector<EventBlock> blocks;
    double s0 = 0.0;
    Vec s1(q_, 0.0);
    std::size_t i = n;
    while (i > 0) {
      const double t = rec[i - 1].x;
      std::size_t j = i;
      while (j > 0 && rec[j - 1].x == t) --j;
      double dn = 0.0;
      for (std::size_t k = j; k < i; ++k) {
        double bz = 0.0;
        for (std::size_t c = 0; c < q_; ++c) bz += beta[c] * rec[k].z[c];
        const double e = std::exp(bz);
        s0 += e;
        for (std::size_t c = 0; c < q_; ++c) s1[c] += e * rec[k].z[c];
        dn += rec[k].delta;
      }
      if (dn > 0.0) {
        EventBlock blk;
        blk.t = t;
        blk.dN = dn;
        blk.s0 = s0;
        blk.e.assign(q_, 0.0);
        for (std::size_t c = 0; c < q_; ++c) blk.e[c] = s1[c] / s0;
        blocks.push_back(std::move(blk));
      }
      i = j;
    }
    std::reverse(blocks.begin(), blocks.end());  // ascending in t

    // prefix sums over event times of dN/S0 and E dN/S0
    std::vector<double> pre0(blocks.size() + 1, 0.0);
    std::vector<Vec> pre1(blocks.size() + 1, Vec(q_, 0.0));
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      pre0[b + 1] = pre0[b] + blocks[b].dN / blocks[b].s0;
      pre1[b + 1] = pre1[b];
      for (std::size_t c = 0; c < q_; ++c)
        pre1[b + 1][c] += blocks[b].e[c] * blocks[b].dN / blocks[b].s0;
    }
    std::vector<double> btimes(blocks.size());
    for (std::size_t b = 0; b < blocks.size(); ++b) btimes[b] = blocks[b].t;

    std::vector<Vec> ls(n, Vec(q_, 0.0));
    for (std::size_t k = 0; k < n; ++k) {
      const auto& r = rec[k];
      const auto it = std::upper_bound(btimes.begin(), btimes.end(), r.x);
      const std::size_t idx = static_cast<std::size_t>(it - btimes.begin());
      double bz = 0.0;
      for (std::size_t c = 0; c < q_; ++c) bz += beta[c] * r.z[c];
      const double ebz = std::exp(bz);
      for (std::size_t c = 0; c < q_; ++c)
        ls[k][c] = -ebz * (r.z[c] * pre0[idx] - pre1[idx][c]);
      if (r.delta == 1) {
        const auto eit = std::lower_bound(btimes.begin(), btimes.end(), r.x);
        const EventBlock& blk = blocks[static_cast<std::size_t>(eit - btimes.begin())];
        for (std::size_t c = 0; c < q_; ++c) ls[k][c] += r.z[c] - blk.e[c];
      }
    }
    return ls;
  }

 private:
  const SurvivalDataset& ds_;
  std::size_t q_;
};

template <typename Lik>
void newton_maximize(const Lik& lik, Vec& par, Parts& cur, const SolverOptions& opts,
                     CoxFitResult& fr, bool separation_guard) {
  cur = lik.evaluate(par, true);
  bool converged = false;
  int iter = 0;
  for (; iter < opts.max_iter; ++iter) {
    const double gnorm = norm_inf(cur.score);
    fr.trace.push_back({iter, cur.loglik, gnorm, 0.0});
    if (separation_guard && norm_inf(par) > kCoxSeparationBound)
      throw ConvergenceError(
          "partial likelihood appears monotone (separated risk sets); "
          "coefficients diverged",
          par);
    if (gnorm <= opts.tol && is_negative_definite(cur.hess)) {
      converged = true;
      break;
    }
    Vec dir;
    try {
      Vec rhs = cur.score;
      for (double& v : rhs) v = -v;
      dir = solve(cur.hess, rhs);
    } catch (const SingularMatrixError&) {
      dir = cur.score;
    }
    if (dot(dir, cur.score) <= 0.0) dir = cur.score;
    const double slope = dot(dir, cur.score);
    const double slack = 4e-13 * (1.0 + std::fabs(cur.loglik));
    double t = 1.0;
    bool stepped = false;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      Vec cand = par;
      bool moved = false;
      for (std::size_t k = 0; k < cand.size(); ++k) {
        cand[k] += t * dir[k];
        moved = moved || cand[k] != par[k];
      }
      if (!moved) break;
      Parts trial;
      try {
        trial = lik.evaluate(cand, false);
      } catch (const ValidationError&) {
        continue;  // left the domain
      }
      if (std::isfinite(trial.loglik) &&
          trial.loglik >= cur.loglik + 1e-4 * t * slope - slack) {
        par = std::move(cand);
        fr.trace.back().step = t;
        stepped = true;
        break;
      }
    }
    if (!stepped) {
      if (separation_guard)
        throw ConvergenceError(
            "partial likelihood step could not increase the objective at machine "
            "precision; treating as separation/divergence",
            par);
      break;
    }
    cur = lik.evaluate(par, true);
  }
  if (!converged) {
    std::vector<std::string> lines;
    for (const auto& r : fr.trace) {
      std::ostringstream os;
      os << "iter " << r.iter << " loglik " << r.loglik << " grad " << r.grad_norm;
      lines.push_back(os.str());
    }
    throw ConvergenceError("Cox fit did not converge", par, lines);
  }
  fr.iterations = iter;
  fr.gradient_norm = norm_inf(cur.score);
  fr.converged = true;
  fr.loglik = cur.loglik;
}

void fill_covariances(CoxFitResult& fr, const Parts& cur, const std::vector<Vec>& ls,
                      std::size_t n) {
  fr.J_hat = cur.hess;
  fr.J_hat *= -1.0;
  symmetrize(fr.J_hat);
  const std::size_t d = fr.J_hat.rows();
  fr.K_hat = Mat(d, d);
  for (const Vec& l : ls)
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) fr.K_hat(i, j) += l[i] * l[j];
  fr.K_hat *= 1.0 / static_cast<double>(n);
  symmetrize(fr.K_hat);
  const Mat j_inv = inverse(fr.J_hat);
  fr.sandwich = mat_mul(mat_mul(j_inv, fr.K_hat), j_inv);
  symmetrize(fr.sandwich);
  fr.model_based_cov = j_inv;
  fr.model_based_cov *= 1.0 / static_cast<double>(n);
  fr.L_vectors = ls;
}

}  // namespace

Vec CoxFitResult::joint() const {
  Vec v = theta_hat;
  v.insert(v.end(), beta_hat.begin(), beta_hat.end());
  return v;
}

CoxRiskSums cox_risk_sums(const SurvivalDataset& ds, const Vec& beta, double time) {
  const std::size_t q = ds.covariate_dim();
  CoxRiskSums out;
  out.q1.assign(q, 0.0);
  out.q2 = Mat(q, q);
  for (const auto& r : ds.records()) {
    if (r.x < time) continue;
    double bz = 0.0;
    for (std::size_t c = 0; c < q; ++c) bz += beta[c] * r.z[c];
    const double e = std::exp(bz);
    out.q0 += e;
    for (std::size_t c = 0; c < q; ++c) out.q1[c] += e * r.z[c];
    for (std::size_t c1 = 0; c1 < q; ++c1)
      for (std::size_t c2 = 0; c2 < q; ++c2) out.q2(c1, c2) += e * r.z[c1] * r.z[c2];
  }
  const double inv_n = 1.0 / static_cast<double>(ds.size());
  out.q0 *= inv_n;
  for (double& v : out.q1) v *= inv_n;
  out.q2 *= inv_n;
  out.e.assign(q, 0.0);
  if (out.q0 > 0.0)
    for (std::size_t c = 0; c < q; ++c) out.e[c] = out.q1[c] / out.q0;
  return out;
}

double cox_partial_loglik(const SurvivalDataset& ds, const Vec& beta) {
  return PartialLik(ds).evaluate(beta, false).loglik;
}

Vec cox_partial_score(const SurvivalDataset& ds, const Vec& beta) {
  return PartialLik(ds).evaluate(beta, false).score;
}

Mat cox_partial_information(const SurvivalDataset& ds, const Vec& beta) {
  Mat h = PartialLik(ds).evaluate(beta, true).hess;
  h *= -1.0;
  symmetrize(h);
  return h;
}

double cox_parametric_loglik(const SurvivalDataset& ds, const HazardFamily& fam,
                             const Vec& theta_beta) {
  return ParametricCoxLik(ds, fam).evaluate(theta_beta, false).loglik;
}

Vec cox_parametric_score(const SurvivalDataset& ds, const HazardFamily& fam,
                         const Vec& theta_beta) {
  return ParametricCoxLik(ds, fam).evaluate(theta_beta, false).score;
}

Mat cox_parametric_information(const SurvivalDataset& ds, const HazardFamily& fam,
                               const Vec& theta_beta) {
  Mat h = ParametricCoxLik(ds, fam).evaluate(theta_beta, true).hess;
  h *= -1.0;
  symmetrize(h);
  return h;
}

CoxFitResult fit_cox_parametric(const SurvivalDataset& ds, const HazardFamily& fam,
                                std::optional<Vec> init, const SolverOptions& opts) {
  check_covariates(ds);
  const std::size_t p = fam.dim(), q = ds.covariate_dim();

  CoxFitResult fr;
  fr.mode = CoxMode::parametric;
  fr.family = fam.name();
  fr.n = ds.size();

  Vec par;
  if (init) {
    if (init->size() != p + q) throw ValidationError("init has the wrong dimension");
    par = *init;
  } else {
    par = fam.default_init(ds);
    par.resize(p + q, 0.0);
  }

  const ParametricCoxLik lik(ds, fam);
  Parts cur;
  newton_maximize(lik, par, cur, opts, fr, /*separation_guard=*/false);

  fr.theta_hat.assign(par.begin(), par.begin() + p);
  fr.beta_hat.assign(par.begin() + p, par.end());
  fill_covariances(fr, cur, lik.l_vectors(par), ds.size());
  return fr;
}

CoxFitResult fit_cox_partial(const SurvivalDataset& ds, std::optional<Vec> init,
                             const SolverOptions& opts) {
  check_covariates(ds);
  const std::size_t q = ds.covariate_dim();

  CoxFitResult fr;
  fr.mode = CoxMode::semiparametric;
  fr.n = ds.size();

  Vec par = init ? *init : Vec(q, 0.0);
  if (par.size() != q) throw ValidationError("init has the wrong dimension");

  const PartialLik lik(ds);
  Parts cur;
  newton_maximize(lik, par, cur, opts, fr, /*separation_guard=*/true);

  fr.beta_hat = par;
  fill_covariances(fr, cur, lik.l_vectors(par), ds.size());
  return fr;
}

InfluenceReport cox_influence(const CoxFitResult& fit) {
  if (!fit.converged) throw ValidationError("influence requires a converged fit");
  InfluenceReport rep;
  rep.L_vectors = fit.L_vectors;
  const Mat j_inv = inverse(fit.J_hat);
  for (const Vec& l : rep.L_vectors) rep.per_record.push_back(mat_vec(j_inv, l));
  rep.sigma_hat = fit.sandwich;
  const Mat s_inv_sqrt = sym_inverse_sqrt(rep.sigma_hat, kSpheringEigenFloor);
  for (const Vec& v : rep.per_record) rep.sphered.push_back(mat_vec(s_inv_sqrt, v));
  return rep;
}

BootstrapRun cox_bootstrap(const SurvivalDataset& ds, const HazardFamily* fam,
                           const CoxFitResult& fit, CoxBootScheme scheme, int B,
                           std::uint64_t seed, Exec exec, const SolverOptions& opts) {
  if (!fit.converged) throw ValidationError("bootstrap requires a converged base fit");
  if (B < 1) throw ValidationError("bootstrap needs B >= 1");
  if (scheme == CoxBootScheme::scheme1_parametric &&
      (fit.mode != CoxMode::parametric || fam == nullptr))
    throw ConfigError("scheme1 draws lifetimes from the fitted hazard; it needs the parametric mode");

  const std::size_t n = ds.size();
  const double T = ds.horizon();
  const Rng root(seed);
  const CensoringSampler censor(ds);
  const std::size_t d = fit.theta_hat.size() + fit.beta_hat.size();

  std::vector<std::optional<Vec>> slots(static_cast<std::size_t>(B));
  parallel_for(static_cast<std::size_t>(B), exec, [&](std::size_t b) {
    Rng rng = root.stream(b);
    std::vector<SurvivalRecord> recs;
    recs.reserve(n);
    if (scheme == CoxBootScheme::scheme1_parametric) {
      for (std::size_t i = 0; i < n; ++i) {
        double bz = 0.0;
        for (std::size_t c = 0; c < ds.covariate_dim(); ++c)
          bz += fit.beta_hat[c] * ds[i].z[c];
        const double e = rng.exponential(1.0) / std::exp(bz);
        const double lifetime = fam->invert_cum_hazard(e, fit.theta_hat, T);
        const double c = censor.draw(rng);
        SurvivalRecord r;
        const double x = std::min(lifetime, c);
        if (x > T) {
          r.x = T;
          r.delta = 0;
        } else {
          r.x = x;
          r.delta = lifetime <= c ? 1 : 0;
        }
        r.z = ds[i].z;
        recs.push_back(std::move(r));
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        const SurvivalRecord& src = ds[rng.uniform_int(n)];
        SurvivalRecord r;
        r.x = src.x;
        r.delta = src.delta;
        r.z = src.z;
        recs.push_back(std::move(r));
      }
    }
    try {
      const SurvivalDataset rep_ds(std::move(recs), T);
      Vec est;
      if (fit.mode == CoxMode::parametric) {
        const CoxFitResult rep = fit_cox_parametric(rep_ds, *fam, fit.joint(), opts);
        est = rep.joint();
      } else {
        const CoxFitResult rep = fit_cox_partial(rep_ds, fit.beta_hat, opts);
        est = rep.beta_hat;
      }
      slots[b] = std::move(est);
    } catch (const Error&) {
    }
  });

  BootstrapRun run;
  run.scheme = scheme == CoxBootScheme::scheme1_parametric
                   ? BootScheme::parametric_km_censoring
                   : BootScheme::nonparametric_pairs;
  run.B = B;
  run.seed = seed;
  for (auto& s : slots) {
    if (s)
      run.replicates.push_back(std::move(*s));
    else
      ++run.failures;
  }
  if (run.replicates.empty())
    throw ConvergenceError("all bootstrap replicates failed", fit.joint());
  run.summary = summarize(run.replicates, fit.mode == CoxMode::parametric ? d
                                                                          : fit.beta_hat.size());
  return run;
}

}  // namespace hazfit
