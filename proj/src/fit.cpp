#include "hazfit/fit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hazfit/errors.hpp"
#include "hazfit/quadrature.hpp"
#include "hazfit/stats.hpp"

namespace hazfit {

namespace {

struct Parts {
  double loglik = 0.0;
  Vec score;
  Mat hess;
};

// Weighted censored-data log-likelihood decomposed per record:
//   (1/n) sum_i [ W(x_i) delta_i log alpha(x_i) - ∫_0^{x_i} W alpha ds ].
// Step weights use the families' cumulative closed forms with prefix sums
// over the weight segments; smooth weights fall back to quadrature.
class WeightedLik {
 public:
  WeightedLik(const SurvivalDataset& ds, const HazardFamily& fam, const TimeWeight& w,
              double quad_tol)
      : fam_(fam), w_(w), quad_tol_(quad_tol), p_(fam.dim()) {
    const auto& rec = ds.records();
    rx_.reserve(rec.size());
    for (const auto& r : rec) rx_.push_back(r.x);
    rdelta_.reserve(rec.size());
    for (const auto& r : rec) rdelta_.push_back(static_cast<double>(r.delta));
    rw_.reserve(rec.size());
    for (const auto& r : rec) rw_.push_back(w(r.x));

    if (w_.is_step()) {
      const double max_x = rx_.empty() ? 0.0 : rx_.back();
      bounds_.push_back(0.0);
      for (double kn : w_.step().knots) {
        if (kn <= 0.0) continue;
        if (kn >= max_x) break;
        bounds_.push_back(kn);
      }
      // weight on (B[j], B[j+1]]: the step is left-continuous, so the value
      // at the right end is the segment value
      for (std::size_t j = 0; j + 1 < bounds_.size(); ++j)
        seg_w_.push_back(w_.step()(bounds_[j + 1]));
      seg_w_.push_back(w_.step()(std::max(max_x, bounds_.back())));
      rseg_.reserve(rx_.size());
      for (double x : rx_) {
        const auto it = std::lower_bound(bounds_.begin() + 1, bounds_.end(), x);
        rseg_.push_back(static_cast<std::size_t>(it - (bounds_.begin() + 1)));
      }
    }
  }

  double weighted_events() const {
    double s = 0.0;
    for (std::size_t i = 0; i < rx_.size(); ++i) s += rw_[i] * rdelta_[i];
    return s;
  }

  Parts evaluate(const Vec& th, bool need_hess) const {
    if (!fam_.in_domain(th)) throw ValidationError("theta outside the parameter domain");
    const std::size_t n = rx_.size();
    Parts out;
    out.score.assign(p_, 0.0);
    out.hess = Mat(p_, p_);

    Vec ps(p_), ad(p_);
    Mat dp(p_, p_);

    if (w_.is_step()) {
      // cumulative tables at segment boundaries
      const std::size_t m = bounds_.size();
      Vec a_b(m, 0.0);
      std::vector<Vec> ad_b(m, Vec(p_, 0.0));
      std::vector<Vec> h_b(m, Vec(p_ * p_, 0.0));
      for (std::size_t j = 1; j < m; ++j) {
        a_b[j] = fam_.cum_hazard(bounds_[j], th);
        fam_.cum_hazard_grad(bounds_[j], th, ad_b[j].data());
        if (need_hess) cum_h(bounds_[j], th, h_b[j]);
      }
      Vec pre_a(m, 0.0);
      std::vector<Vec> pre_ad(m, Vec(p_, 0.0));
      std::vector<Vec> pre_h(m, Vec(p_ * p_, 0.0));
      for (std::size_t j = 1; j < m; ++j) {
        pre_a[j] = pre_a[j - 1] + seg_w_[j - 1] * (a_b[j] - a_b[j - 1]);
        for (std::size_t k = 0; k < p_; ++k)
          pre_ad[j][k] = pre_ad[j - 1][k] + seg_w_[j - 1] * (ad_b[j][k] - ad_b[j - 1][k]);
        if (need_hess)
          for (std::size_t k = 0; k < p_ * p_; ++k)
            pre_h[j][k] = pre_h[j - 1][k] + seg_w_[j - 1] * (h_b[j][k] - h_b[j - 1][k]);
      }

      Vec hx(p_ * p_);
      for (std::size_t i = 0; i < n; ++i) {
        const double x = rx_[i];
        const std::size_t j = rseg_[i];
        const double wseg = seg_w_[j];
        // ∫_0^x W alpha
        const double ia = pre_a[j] + wseg * (fam_.cum_hazard(x, th) - a_b[j]);
        out.loglik -= ia;
        fam_.cum_hazard_grad(x, th, ad.data());
        for (std::size_t k = 0; k < p_; ++k)
          out.score[k] -= pre_ad[j][k] + wseg * (ad[k] - ad_b[j][k]);
        if (need_hess) {
          cum_h(x, th, hx);
          for (std::size_t k = 0; k < p_ * p_; ++k)
            out.hess.data()[k] -= pre_h[j][k] + wseg * (hx[k] - h_b[j][k]);
        }
        if (rdelta_[i] > 0.0 && rw_[i] > 0.0) {
          add_event_terms(out, i, th, ps, dp, need_hess);
        }
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        smooth_integrals(rx_[i], th, need_hess, ia_, iad_, ih_);
        out.loglik -= ia_;
        for (std::size_t k = 0; k < p_; ++k) out.score[k] -= iad_[k];
        if (need_hess)
          for (std::size_t k = 0; k < p_ * p_; ++k) out.hess.data()[k] -= ih_[k];
        if (rdelta_[i] > 0.0 && rw_[i] > 0.0) add_event_terms(out, i, th, ps, dp, need_hess);
      }
    }

    const double inv_n = 1.0 / static_cast<double>(n);
    out.loglik *= inv_n;
    for (double& v : out.score) v *= inv_n;
    out.hess *= inv_n;
    symmetrize(out.hess);
    return out;
  }

  // L_i = W(x_i) psi(x_i) delta_i - ∫_0^{x_i} W psi alpha ds
  std::vector<Vec> l_vectors(const Vec& th) const {
    const std::size_t n = rx_.size();
    std::vector<Vec> ls(n, Vec(p_, 0.0));
    Vec ps(p_), ad(p_);
    if (w_.is_step()) {
      const std::size_t m = bounds_.size();
      std::vector<Vec> ad_b(m, Vec(p_, 0.0));
      std::vector<Vec> pre_ad(m, Vec(p_, 0.0));
      for (std::size_t j = 1; j < m; ++j)
        fam_.cum_hazard_grad(bounds_[j], th, ad_b[j].data());
      for (std::size_t j = 1; j < m; ++j)
        for (std::size_t k = 0; k < p_; ++k)
          pre_ad[j][k] = pre_ad[j - 1][k] + seg_w_[j - 1] * (ad_b[j][k] - ad_b[j - 1][k]);
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = rseg_[i];
        fam_.cum_hazard_grad(rx_[i], th, ad.data());
        for (std::size_t k = 0; k < p_; ++k)
          ls[i][k] = -(pre_ad[j][k] + seg_w_[j] * (ad[k] - ad_b[j][k]));
        if (rdelta_[i] > 0.0 && rw_[i] > 0.0) {
          fam_.psi(rx_[i], th, ps.data());
          for (std::size_t k = 0; k < p_; ++k) ls[i][k] += rw_[i] * ps[k];
        }
      }
    } else {
      Vec dummy_h;
      double ia;
      Vec iad(p_);
      for (std::size_t i = 0; i < n; ++i) {
        smooth_integrals(rx_[i], th, false, ia, iad, dummy_h);
        for (std::size_t k = 0; k < p_; ++k) ls[i][k] = -iad[k];
        if (rdelta_[i] > 0.0 && rw_[i] > 0.0) {
          fam_.psi(rx_[i], th, ps.data());
          for (std::size_t k = 0; k < p_; ++k) ls[i][k] += rw_[i] * ps[k];
        }
      }
    }
    return ls;
  }

 private:
  // ∫_0^t (psi psi^t + Dpsi) alpha ds
  void cum_h(double t, const Vec& th, Vec& out) const {
    Vec c1(p_ * p_), c2(p_ * p_);
    fam_.cum_psi_outer(t, th, c1.data());
    fam_.cum_dpsi(t, th, c2.data());
    out.resize(p_ * p_);
    for (std::size_t k = 0; k < p_ * p_; ++k) out[k] = c1[k] + c2[k];
  }

  void add_event_terms(Parts& out, std::size_t i, const Vec& th, Vec& ps, Mat& dp,
                       bool need_hess) const {
    const double wx = rw_[i];
    out.loglik += wx * std::log(fam_.alpha(rx_[i], th));
    fam_.psi(rx_[i], th, ps.data());
    for (std::size_t k = 0; k < p_; ++k) out.score[k] += wx * ps[k];
    if (need_hess) {
      fam_.dpsi(rx_[i], th, dp.data());
      for (std::size_t k = 0; k < p_ * p_; ++k) out.hess.data()[k] += wx * dp.data()[k];
    }
  }

  void smooth_integrals(double x, const Vec& th, bool need_hess, double& ia, Vec& iad,
                        Vec& ih) const {
    const double lo = std::max(0.0, w_.support_lo());
    const double hi = std::min(x, w_.support_hi());
    iad.assign(p_, 0.0);
    if (need_hess) ih.assign(p_ * p_, 0.0);
    ia = 0.0;
    if (hi <= lo) return;
    const int dim = static_cast<int>(need_hess ? 1 + p_ + p_ * p_ : 1 + p_);
    Vec psl(p_);
    Mat dpl(p_, p_);
    const auto f = [&](double s, double* o) {
      const double ws = w_(s);
      const double a = fam_.alpha(s, th) * ws;
      o[0] = a;
      fam_.psi(s, th, psl.data());
      for (std::size_t k = 0; k < p_; ++k) o[1 + k] = psl[k] * a;
      if (need_hess) {
        fam_.dpsi(s, th, dpl.data());
        for (std::size_t r = 0; r < p_; ++r)
          for (std::size_t c = 0; c < p_; ++c)
            o[1 + p_ + r * p_ + c] = (psl[r] * psl[c] + dpl(r, c)) * a;
      }
    };
    std::vector<double> brk = w_.breakpoints();
    for (double c : fam_.breakpoints()) brk.push_back(c);
    const Vec v = integrate_adaptive(f, dim, lo, hi, quad_tol_, brk);
    ia = v[0];
    for (std::size_t k = 0; k < p_; ++k) iad[k] = v[1 + k];
    if (need_hess)
      for (std::size_t k = 0; k < p_ * p_; ++k) ih[k] = v[1 + p_ + k];
  }

  const HazardFamily& fam_;
  const TimeWeight& w_;
  double quad_tol_;
  std::size_t p_;

  std::vector<double> rx_, rdelta_, rw_;
  std::vector<std::size_t> rseg_;
  std::vector<double> bounds_;  // segment boundaries, starting at 0
  std::vector<double> seg_w_;   // weight on (bounds[j], bounds[j+1]]

  // scratch for smooth evaluation
  mutable double ia_ = 0.0;
  mutable Vec iad_, ih_;
};

void check_fittable(const SurvivalDataset& ds, const HazardFamily& fam, const WeightedLik& lik) {
  if (lik.weighted_events() <= 0.0)
    throw ValidationError("boundary: no (weighted) events; the " + fam.name() +
                          " hazard MLE degenerates at the parameter boundary");
  const std::vector<double> cuts = fam.breakpoints();
  if (!cuts.empty()) {
    std::vector<double> events(cuts.size() + 1, 0.0);
    for (const auto& r : ds.records()) {
      if (r.delta == 0) continue;
      const auto it = std::upper_bound(cuts.begin(), cuts.end(), r.x);
      events[static_cast<std::size_t>(it - cuts.begin())] += 1.0;
    }
    for (std::size_t j = 0; j < events.size(); ++j)
      if (events[j] <= 0.0)
        throw ValidationError("boundary: no events in hazard segment " + std::to_string(j) +
                              "; its rate degenerates at zero");
  }
}

}  // namespace

double log_likelihood(const SurvivalDataset& ds, const HazardFamily& fam, const Vec& theta,
                      const TimeWeight& w) {
  return WeightedLik(ds, fam, w, 1e-10).evaluate(theta, false).loglik;
}

Vec score(const SurvivalDataset& ds, const HazardFamily& fam, const Vec& theta,
          const TimeWeight& w) {
  return WeightedLik(ds, fam, w, 1e-10).evaluate(theta, false).score;
}

Mat hessian(const SurvivalDataset& ds, const HazardFamily& fam, const Vec& theta,
            const TimeWeight& w) {
  return WeightedLik(ds, fam, w, 1e-10).evaluate(theta, true).hess;
}

double log_likelihood(const SurvivalDataset& ds, const HazardFamily& fam, const Vec& theta,
                      const WeightPlan& plan) {
  return log_likelihood(ds, fam, theta, resolve_weight(plan, ds));
}

Vec score(const SurvivalDataset& ds, const HazardFamily& fam, const Vec& theta,
          const WeightPlan& plan) {
  return score(ds, fam, theta, resolve_weight(plan, ds));
}

std::vector<Vec> l_vectors(const SurvivalDataset& ds, const HazardFamily& fam, const Vec& theta,
                           const TimeWeight& w) {
  return WeightedLik(ds, fam, w, 1e-10).l_vectors(theta);
}

FitResult fit_ml(const SurvivalDataset& ds, const HazardFamily& fam, const TimeWeight& w,
                 std::optional<Vec> init, const SolverOptions& opts) {
  const WeightedLik lik(ds, fam, w, opts.quad_tol);
  check_fittable(ds, fam, lik);

  Vec th = init ? *init : fam.default_init(ds);
  if (th.size() != fam.dim()) throw ValidationError("init has the wrong dimension");
  if (!fam.in_domain(th)) throw ValidationError("init outside the parameter domain");

  FitResult fr;
  fr.family = fam.name();
  fr.weight = w.description();
  fr.n = ds.size();

  Parts cur = lik.evaluate(th, true);
  bool converged = false;
  int iter = 0;
  for (; iter < opts.max_iter; ++iter) {
    const double gnorm = norm_inf(cur.score);
    fr.trace.push_back({iter, cur.loglik, gnorm, 0.0});
    if (gnorm <= opts.tol && is_negative_definite(cur.hess)) {
      converged = true;
      break;
    }

    Vec dir;
    bool newton_ok = true;
    try {
      Vec rhs = cur.score;
      for (double& v : rhs) v = -v;
      dir = solve(cur.hess, rhs);
    } catch (const SingularMatrixError&) {
      newton_ok = false;
      dir = cur.score;
    }
    if (newton_ok && dot(dir, cur.score) <= 0.0) dir = cur.score;  // fall back to ascent

    const double slope = dot(dir, cur.score);
    // the sufficient-increase test carries a machine-precision slack: near
    // the optimum the predicted gain drops below the resolution of the
    // objective and a strict Armijo test would reject the exact Newton step
    const double slack = 4e-13 * (1.0 + std::fabs(cur.loglik));
    double t = 1.0;
    bool stepped = false;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      Vec cand = th;
      bool moved = false;
      for (std::size_t k = 0; k < cand.size(); ++k) {
        cand[k] += t * dir[k];
        moved = moved || cand[k] != th[k];
      }
      if (!moved) break;
      if (!fam.in_domain(cand)) continue;
      Parts trial = lik.evaluate(cand, false);
      if (std::isfinite(trial.loglik) &&
          trial.loglik >= cur.loglik + 1e-4 * t * slope - slack) {
        th = std::move(cand);
        fr.trace.back().step = t;
        stepped = true;
        break;
      }
    }
    if (!stepped) break;
    cur = lik.evaluate(th, true);
  }

  if (!converged) {
    std::vector<std::string> lines;
    for (const auto& r : fr.trace) {
      std::ostringstream os;
      os << "iter " << r.iter << " loglik " << r.loglik << " grad " << r.grad_norm << " step "
         << r.step;
      lines.push_back(os.str());
    }
    throw ConvergenceError("fit did not converge after " + std::to_string(iter) + " iterations",
                           th, lines);
  }

  fr.theta_hat = th;
  fr.loglik = cur.loglik;
  fr.iterations = iter;
  fr.gradient_norm = norm_inf(cur.score);
  fr.converged = true;

  fr.J_hat = cur.hess;
  fr.J_hat *= -1.0;
  symmetrize(fr.J_hat);
  fr.K_hat = k_hat(ds, fam, th, w, KFormula::per_record_form, opts.quad_tol);

  Mat j_inv = inverse(fr.J_hat);
  fr.sandwich = mat_mul(mat_mul(j_inv, fr.K_hat), j_inv);
  symmetrize(fr.sandwich);
  fr.model_based_cov = j_inv;
  fr.model_based_cov *= 1.0 / static_cast<double>(ds.size());
  symmetrize(fr.model_based_cov);
  return fr;
}

FitResult fit_ml(const SurvivalDataset& ds, const HazardFamily& fam, const WeightPlan& plan,
                 std::optional<Vec> init, const SolverOptions& opts) {
  return fit_ml(ds, fam, resolve_weight(plan, ds), std::move(init), opts);
}

Mat k_hat(const SurvivalDataset& ds, const HazardFamily& fam, const Vec& theta,
          const TimeWeight& w, KFormula formula, double quad_tol) {
  const std::size_t p = fam.dim();
  const std::size_t n = ds.size();
  const double inv_n = 1.0 / static_cast<double>(n);

  if (formula == KFormula::per_record_form) {
    const std::vector<Vec> ls = l_vectors(ds, fam, theta, w);
    Mat k(p, p);
    for (const Vec& l : ls)
      for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) k(i, j) += l[i] * l[j];
    k *= inv_n;
    symmetrize(k);
    return k;
  }

  if (!w.is_unit())
    throw ConfigError(
        "only the per-record K form generalizes to non-unit weights; "
        "integral forms are defined for the plain likelihood");

  const auto& rec = ds.records();
  const double T = ds.horizon();

  // event outer-product term shared by both integral routes
  Mat term1(p, p);
  Vec ps(p);
  for (const auto& r : rec) {
    if (r.delta == 0) continue;
    fam.psi(r.x, theta, ps.data());
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < p; ++j) term1(i, j) += ps[i] * ps[j];
  }
  term1 *= inv_n;

  // panel boundaries: distinct observed times inside (0, T)
  std::vector<double> bounds{0.0};
  for (const auto& r : rec)
    if (r.x > 0.0 && r.x < T && (bounds.empty() || bounds.back() != r.x)) bounds.push_back(r.x);
  bounds.push_back(T);
  bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());

  Mat k = term1;
  Vec ad(p);

  if (formula == KFormula::integral_form) {
    // K = term1 + ∫ {psi Ehat^t + Ehat psi^t} alpha dt, with
    // Ehat(t) = (1/n)[ sum_{x_i<=t} (psi(x_i) delta_i - Ad(x_i)) - #{x_i>t} Ad(t) ]
    std::size_t next = 0;
    Vec jump_sum(p, 0.0);  // (1/n) sum_{x_i<=b} (psi delta - Ad)
    for (std::size_t b = 0; b + 1 < bounds.size(); ++b) {
      while (next < rec.size() && rec[next].x <= bounds[b]) {
        fam.cum_hazard_grad(rec[next].x, theta, ad.data());
        if (rec[next].delta == 1) {
          fam.psi(rec[next].x, theta, ps.data());
          for (std::size_t kk = 0; kk < p; ++kk) jump_sum[kk] += ps[kk];
        }
        for (std::size_t kk = 0; kk < p; ++kk) jump_sum[kk] -= ad[kk];
        ++next;
      }
      const double above = static_cast<double>(rec.size() - next);
      Vec psl(p), adl(p);
      const auto f = [&](double t, double* o) {
        fam.psi(t, theta, psl.data());
        fam.cum_hazard_grad(t, theta, adl.data());
        const double a = fam.alpha(t, theta);
        for (std::size_t i = 0; i < p; ++i) {
          const double e_i = inv_n * (jump_sum[i] - above * adl[i]);
          for (std::size_t j = 0; j < p; ++j) {
            const double e_j = inv_n * (jump_sum[j] - above * adl[j]);
            o[i * p + j] = (psl[i] * e_j + e_i * psl[j]) * a;
          }
        }
      };
      const Vec v = integrate_adaptive(f, static_cast<int>(p * p), bounds[b], bounds[b + 1],
                                       quad_tol, fam.breakpoints());
      for (std::size_t kk = 0; kk < p * p; ++kk) k.data()[kk] += v[kk];
    }
  } else {
    // double-integral route: the inner integral collapses to
    // B(t) = psi Ad^t + Ad psi^t, leaving
    // K = term1 - ∫ B(t) {dN(t)/n - (Y(t)/n) alpha dt}
    Mat dn_term(p, p);
    for (const auto& r : rec) {
      if (r.delta == 0) continue;
      fam.psi(r.x, theta, ps.data());
      fam.cum_hazard_grad(r.x, theta, ad.data());
      for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j)
          dn_term(i, j) += ps[i] * ad[j] + ad[i] * ps[j];
    }
    dn_term *= inv_n;
    k -= dn_term;

    std::size_t next = 0;
    for (std::size_t b = 0; b + 1 < bounds.size(); ++b) {
      while (next < rec.size() && rec[next].x <= bounds[b]) ++next;
      const double y_frac = static_cast<double>(rec.size() - next) * inv_n;
      if (y_frac == 0.0) continue;
      Vec psl(p), adl(p);
      const auto f = [&](double t, double* o) {
        fam.psi(t, theta, psl.data());
        fam.cum_hazard_grad(t, theta, adl.data());
        const double a = fam.alpha(t, theta);
        for (std::size_t i = 0; i < p; ++i)
          for (std::size_t j = 0; j < p; ++j)
            o[i * p + j] = (psl[i] * adl[j] + adl[i] * psl[j]) * a * y_frac;
      };
      const Vec v = integrate_adaptive(f, static_cast<int>(p * p), bounds[b], bounds[b + 1],
                                       quad_tol, fam.breakpoints());
      for (std::size_t kk = 0; kk < p * p; ++kk) k.data()[kk] += v[kk];
    }
  }
  symmetrize(k);
  return k;
}

bool ConfidenceRegion::contains(const Vec& theta0) const {
  Vec d = theta0;
  for (std::size_t i = 0; i < d.size(); ++i) d[i] -= center[i];
  const Vec md = mat_vec(quad_form, d);
  return dot(d, md) <= radius;
}

ConfidenceRegion confidence_region(const FitResult& fr, double level, CovMode mode) {
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("confidence level outside (0,1)");
  if (!fr.converged) throw ValidationError("confidence region requires a converged fit");
  const std::size_t p = fr.theta_hat.size();

  ConfidenceRegion cr;
  cr.mode = mode;
  cr.level = level;
  cr.center = fr.theta_hat;
  if (mode == CovMode::model_robust) {
    const Mat k_inv = inverse(fr.K_hat);
    cr.quad_form = mat_mul(mat_mul(fr.J_hat, k_inv), fr.J_hat);
  } else {
    cr.quad_form = fr.J_hat;
  }
  symmetrize(cr.quad_form);
  cr.radius = chisq_quantile(level, static_cast<int>(p)) / static_cast<double>(fr.n);

  const double z = normal_quantile(0.5 * (1.0 + level));
  for (std::size_t j = 0; j < p; ++j) {
    double var_j = (mode == CovMode::model_robust)
                       ? fr.sandwich(j, j) / static_cast<double>(fr.n)
                       : fr.model_based_cov(j, j);
    var_j = std::max(var_j, 0.0);
    const double half = z * std::sqrt(var_j);
    cr.intervals.emplace_back(fr.theta_hat[j] - half, fr.theta_hat[j] + half);
  }
  return cr;
}

namespace {

Vec oracle_init(const HazardFamily& fam, double base_rate) {
  const std::string& nm = fam.name();
  if (nm == "exponential") return {base_rate};
  if (nm == "weibull") return {1.0};
  if (nm == "weibull2") return {1.0, base_rate};
  if (nm == "gompertz") return {base_rate, 0.0};
  return Vec(fam.dim(), base_rate);
}

}  // namespace

OracleResult least_false_oracle(const HazardFamily& fam,
                                const std::function<double(double)>& alpha0,
                                const std::function<double(double)>& y,
                                const std::function<double(double)>& w, double T,
                                const OracleOptions& opts) {
  const std::size_t p = fam.dim();
  const std::vector<double> brk = fam.breakpoints();

  const auto eval = [&](const Vec& th) {
    Vec psl(p);
    Mat dpl(p, p);
    const auto f = [&](double s, double* o) {
      const double wy = w(s) * y(s);
      const double a0 = alpha0(s);
      const double at = fam.alpha(s, th);
      fam.psi(s, th, psl.data());
      fam.dpsi(s, th, dpl.data());
      o[0] = wy * (a0 * std::log(a0 / at) - (a0 - at));
      for (std::size_t i = 0; i < p; ++i) o[1 + i] = wy * psl[i] * (a0 - at);
      for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j)
          o[1 + p + i * p + j] = wy * (psl[i] * psl[j] * at - dpl(i, j) * (a0 - at));
    };
    return integrate_adaptive(f, static_cast<int>(1 + p + p * p), 0.0, T, opts.quad_tol, brk);
  };

  Vec th;
  if (opts.init) {
    th = *opts.init;
  } else {
    const double num = integrate_adaptive_scalar(
        [&](double s) { return w(s) * y(s) * alpha0(s); }, 0.0, T, opts.quad_tol, brk);
    const double den = integrate_adaptive_scalar([&](double s) { return w(s) * y(s); }, 0.0, T,
                                                 opts.quad_tol, brk);
    th = oracle_init(fam, num / den);
  }
  if (!fam.in_domain(th)) throw ValidationError("oracle init outside the parameter domain");

  Vec v = eval(th);
  for (int it = 0; it < opts.max_iter; ++it) {
    Vec u(p);
    Mat jw(p, p);
    for (std::size_t i = 0; i < p; ++i) u[i] = v[1 + i];
    for (std::size_t k = 0; k < p * p; ++k) jw.data()[k] = v[1 + p + k];
    if (norm_inf(u) <= opts.tol) break;

    Vec dir;
    try {
      dir = solve(jw, u);
    } catch (const SingularMatrixError&) {
      dir = u;
    }
    if (dot(dir, u) <= 0.0) dir = u;

    const double slack = 4e-13 * (1.0 + std::fabs(v[0]));
    double t = 1.0;
    bool stepped = false;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      Vec cand = th;
      bool moved = false;
      for (std::size_t k = 0; k < p; ++k) {
        cand[k] += t * dir[k];
        moved = moved || cand[k] != th[k];
      }
      if (!moved) break;
      if (!fam.in_domain(cand)) continue;
      Vec vc = eval(cand);
      if (std::isfinite(vc[0]) && vc[0] <= v[0] - 1e-4 * t * dot(dir, u) + slack) {
        th = std::move(cand);
        v = std::move(vc);
        stepped = true;
        break;
      }
    }
    if (!stepped)
      throw ConvergenceError("least-false oracle stalled", th);
  }

  OracleResult res;
  res.theta0 = th;
  res.distance = v[0];
  res.j_w = Mat(p, p);
  for (std::size_t k = 0; k < p * p; ++k) res.j_w.data()[k] = v[1 + p + k];
  symmetrize(res.j_w);
  Mat vecs;
  Vec lams;
  sym_eigen(res.j_w, vecs, lams);
  res.unique_ok = lams.front() > 0.0 && lams.back() / std::max(lams.front(), 1e-300) < 1e10;
  if (norm_inf(Vec(v.begin() + 1, v.begin() + 1 + p)) > opts.tol * 10.0) res.unique_ok = false;
  return res;
}

}  // namespace hazfit
