#include "hazfit/families.hpp"

#include <algorithm>
#include <cmath>

#include "hazfit/errors.hpp"
#include "hazfit/weights.hpp"

namespace hazfit {

namespace {

// ∫_0^t s^k exp(bs) ds = t^{k+1} g_{k+1}(bt); series keep b ~ 0 smooth.
double g1(double x) {
  if (std::fabs(x) < 1e-4) return 1.0 + x / 2.0 + x * x / 6.0 + x * x * x / 24.0;
  return std::expm1(x) / x;
}
double g2(double x) {
  if (std::fabs(x) < 1e-4) return 0.5 + x / 3.0 + x * x / 8.0 + x * x * x / 30.0;
  return (std::exp(x) * (x - 1.0) + 1.0) / (x * x);
}
double g3(double x) {
  if (std::fabs(x) < 1e-4) return 1.0 / 3.0 + x / 4.0 + x * x / 10.0 + x * x * x / 36.0;
  return (std::exp(x) * (x * x - 2.0 * x + 2.0) - 2.0) / (x * x * x);
}

class Exponential final : public HazardFamily {
 public:
  const std::string& name() const override {
    static const std::string n = "exponential";
    return n;
  }
  std::size_t dim() const override { return 1; }
  bool in_domain(const Vec& th) const override { return th[0] > 0.0 && std::isfinite(th[0]); }
  double alpha(double, const Vec& th) const override { return th[0]; }
  void psi(double, const Vec& th, double* out) const override { out[0] = 1.0 / th[0]; }
  void dpsi(double, const Vec& th, double* out) const override {
    out[0] = -1.0 / (th[0] * th[0]);
  }
  double cum_hazard(double t, const Vec& th) const override { return th[0] * t; }
  void cum_hazard_grad(double t, const Vec&, double* out) const override { out[0] = t; }
  void cum_psi_outer(double t, const Vec& th, double* out) const override {
    out[0] = t / th[0];
  }
  void cum_dpsi(double t, const Vec& th, double* out) const override { out[0] = -t / th[0]; }
  double invert_cum_hazard(double target, const Vec& th, double t_hi) const override {
    const double t = target / th[0];
    return t <= t_hi ? t : std::numeric_limits<double>::infinity();
  }
  Vec default_init(const SurvivalDataset& ds) const override {
    const double d = ds.total_events(), e = ds.total_exposure();
    return {d > 0.0 && e > 0.0 ? d / e : 1.0};
  }
};

// Single-parameter Weibull with F_theta(t) = 1 - exp(-t^theta).
class Weibull1 final : public HazardFamily {
 public:
  const std::string& name() const override {
    static const std::string n = "weibull";
    return n;
  }
  std::size_t dim() const override { return 1; }
  bool in_domain(const Vec& th) const override { return th[0] > 0.0 && std::isfinite(th[0]); }
  double alpha(double s, const Vec& th) const override {
    return th[0] * std::pow(s, th[0] - 1.0);
  }
  void psi(double s, const Vec& th, double* out) const override {
    out[0] = 1.0 / th[0] + std::log(s);
  }
  void dpsi(double, const Vec& th, double* out) const override {
    out[0] = -1.0 / (th[0] * th[0]);
  }
  double cum_hazard(double t, const Vec& th) const override { return std::pow(t, th[0]); }
  void cum_hazard_grad(double t, const Vec& th, double* out) const override {
    out[0] = t > 0.0 ? std::pow(t, th[0]) * std::log(t) : 0.0;
  }
  void cum_psi_outer(double t, const Vec& th, double* out) const override {
    if (t <= 0.0) {
      out[0] = 0.0;
      return;
    }
    const double v = std::pow(t, th[0]);
    const double lv = th[0] * std::log(t);
    out[0] = v * (lv * lv + 1.0) / (th[0] * th[0]);
  }
  void cum_dpsi(double t, const Vec& th, double* out) const override {
    out[0] = -std::pow(t, th[0]) / (th[0] * th[0]);
  }
  double invert_cum_hazard(double target, const Vec& th, double t_hi) const override {
    const double t = std::pow(target, 1.0 / th[0]);
    return t <= t_hi ? t : std::numeric_limits<double>::infinity();
  }
  Vec default_init(const SurvivalDataset&) const override { return {1.0}; }
};

// Two-parameter Weibull, A(t) = (lambda t)^k with theta = (shape k, rate lambda).
class Weibull2 final : public HazardFamily {
 public:
  const std::string& name() const override {
    static const std::string n = "weibull2";
    return n;
  }
  std::size_t dim() const override { return 2; }
  bool in_domain(const Vec& th) const override {
    return th[0] > 0.0 && th[1] > 0.0 && std::isfinite(th[0]) && std::isfinite(th[1]);
  }
  double alpha(double s, const Vec& th) const override {
    return th[0] * th[1] * std::pow(th[1] * s, th[0] - 1.0);
  }
  void psi(double s, const Vec& th, double* out) const override {
    out[0] = 1.0 / th[0] + std::log(th[1] * s);
    out[1] = th[0] / th[1];
  }
  void dpsi(double, const Vec& th, double* out) const override {
    out[0] = -1.0 / (th[0] * th[0]);
    out[1] = out[2] = 1.0 / th[1];
    out[3] = -th[0] / (th[1] * th[1]);
  }
  double cum_hazard(double t, const Vec& th) const override {
    return std::pow(th[1] * t, th[0]);
  }
  void cum_hazard_grad(double t, const Vec& th, double* out) const override {
    if (t <= 0.0) {
      out[0] = out[1] = 0.0;
      return;
    }
    const double v = std::pow(th[1] * t, th[0]);
    out[0] = v * std::log(th[1] * t);
    out[1] = th[0] / th[1] * v;
  }
  void cum_psi_outer(double t, const Vec& th, double* out) const override {
    if (t <= 0.0) {
      std::fill(out, out + 4, 0.0);
      return;
    }
    const double v = std::pow(th[1] * t, th[0]);
    const double lv = th[0] * std::log(th[1] * t);
    out[0] = v * (lv * lv + 1.0) / (th[0] * th[0]);
    out[1] = out[2] = v * lv / th[1];
    out[3] = th[0] * th[0] / (th[1] * th[1]) * v;
  }
  void cum_dpsi(double t, const Vec& th, double* out) const override {
    const double v = std::pow(th[1] * std::max(t, 0.0), th[0]);
    out[0] = -v / (th[0] * th[0]);
    out[1] = out[2] = v / th[1];
    out[3] = -th[0] * v / (th[1] * th[1]);
  }
  double invert_cum_hazard(double target, const Vec& th, double t_hi) const override {
    const double t = std::pow(target, 1.0 / th[0]) / th[1];
    return t <= t_hi ? t : std::numeric_limits<double>::infinity();
  }
  Vec default_init(const SurvivalDataset& ds) const override {
    const double d = ds.total_events(), e = ds.total_exposure();
    return {1.0, d > 0.0 && e > 0.0 ? d / e : 1.0};
  }
};

// alpha(s) = a exp(bs), theta = (a, b).
class Gompertz final : public HazardFamily {
 public:
  const std::string& name() const override {
    static const std::string n = "gompertz";
    return n;
  }
  std::size_t dim() const override { return 2; }
  bool in_domain(const Vec& th) const override {
    return th[0] > 0.0 && std::isfinite(th[0]) && std::isfinite(th[1]);
  }
  double alpha(double s, const Vec& th) const override { return th[0] * std::exp(th[1] * s); }
  void psi(double s, const Vec& th, double* out) const override {
    out[0] = 1.0 / th[0];
    out[1] = s;
  }
  void dpsi(double, const Vec& th, double* out) const override {
    out[0] = -1.0 / (th[0] * th[0]);
    out[1] = out[2] = out[3] = 0.0;
  }
  double cum_hazard(double t, const Vec& th) const override {
    return th[0] * t * g1(th[1] * t);
  }
  void cum_hazard_grad(double t, const Vec& th, double* out) const override {
    out[0] = t * g1(th[1] * t);
    out[1] = th[0] * t * t * g2(th[1] * t);
  }
  void cum_psi_outer(double t, const Vec& th, double* out) const override {
    out[0] = t * g1(th[1] * t) / th[0];
    out[1] = out[2] = t * t * g2(th[1] * t);
    out[3] = th[0] * t * t * t * g3(th[1] * t);
  }
  void cum_dpsi(double t, const Vec& th, double* out) const override {
    out[0] = -t * g1(th[1] * t) / th[0];
    out[1] = out[2] = out[3] = 0.0;
  }
  Vec default_init(const SurvivalDataset& ds) const override {
    const double d = ds.total_events(), e = ds.total_exposure();
    return {d > 0.0 && e > 0.0 ? d / e : 1.0, 0.0};
  }
};

class PiecewiseConstant final : public HazardFamily {
 public:
  explicit PiecewiseConstant(std::vector<double> cuts) : cuts_(std::move(cuts)) {
    if (cuts_.empty() || cuts_.front() != 0.0)
      throw ConfigError("piecewise cut points must start at 0");
    for (std::size_t i = 1; i < cuts_.size(); ++i)
      if (!(cuts_[i] > cuts_[i - 1]))
        throw ConfigError("piecewise cut points must be strictly increasing");
  }
  const std::string& name() const override {
    static const std::string n = "piecewise_constant";
    return n;
  }
  std::size_t dim() const override { return cuts_.size(); }
  bool in_domain(const Vec& th) const override {
    for (double v : th)
      if (!(v > 0.0) || !std::isfinite(v)) return false;
    return true;
  }
  double alpha(double s, const Vec& th) const override { return th[segment(s)]; }
  void psi(double s, const Vec& th, double* out) const override {
    std::fill(out, out + dim(), 0.0);
    const std::size_t j = segment(s);
    out[j] = 1.0 / th[j];
  }
  void dpsi(double s, const Vec& th, double* out) const override {
    std::fill(out, out + dim() * dim(), 0.0);
    const std::size_t j = segment(s);
    out[j * dim() + j] = -1.0 / (th[j] * th[j]);
  }
  double cum_hazard(double t, const Vec& th) const override {
    double a = 0.0;
    for (std::size_t j = 0; j < dim(); ++j) a += th[j] * seg_len(j, t);
    return a;
  }
  void cum_hazard_grad(double t, const Vec&, double* out) const override {
    for (std::size_t j = 0; j < dim(); ++j) out[j] = seg_len(j, t);
  }
  void cum_psi_outer(double t, const Vec& th, double* out) const override {
    std::fill(out, out + dim() * dim(), 0.0);
    for (std::size_t j = 0; j < dim(); ++j) out[j * dim() + j] = seg_len(j, t) / th[j];
  }
  void cum_dpsi(double t, const Vec& th, double* out) const override {
    std::fill(out, out + dim() * dim(), 0.0);
    for (std::size_t j = 0; j < dim(); ++j) out[j * dim() + j] = -seg_len(j, t) / th[j];
  }
  double invert_cum_hazard(double target, const Vec& th, double t_hi) const override {
    double acc = 0.0;
    for (std::size_t j = 0; j < dim(); ++j) {
      const double hi = j + 1 < dim() ? cuts_[j + 1] : std::numeric_limits<double>::infinity();
      const double len = hi - cuts_[j];
      const double seg_mass = th[j] * len;
      if (target <= acc + seg_mass || j + 1 == dim()) {
        const double t = cuts_[j] + (target - acc) / th[j];
        return t <= t_hi ? t : std::numeric_limits<double>::infinity();
      }
      acc += seg_mass;
    }
    return std::numeric_limits<double>::infinity();
  }
  Vec default_init(const SurvivalDataset& ds) const override {
    Vec d(dim(), 0.0), e(dim(), 0.0);
    for (const auto& r : ds.records()) {
      if (r.delta == 1) d[segment(r.x)] += 1.0;
      for (std::size_t j = 0; j < dim(); ++j) e[j] += seg_len(j, r.x);
    }
    Vec th(dim(), 1.0);
    for (std::size_t j = 0; j < dim(); ++j)
      if (e[j] > 0.0 && d[j] > 0.0) th[j] = d[j] / e[j];
    return th;
  }
  std::vector<double> breakpoints() const override {
    return std::vector<double>(cuts_.begin() + 1, cuts_.end());
  }

 private:
  std::size_t segment(double s) const {
    const auto it = std::upper_bound(cuts_.begin(), cuts_.end(), s);
    return static_cast<std::size_t>(std::max<long>(0, (it - cuts_.begin()) - 1));
  }
  double seg_len(std::size_t j, double t) const {
    const double hi = j + 1 < cuts_.size() ? cuts_[j + 1] : std::numeric_limits<double>::infinity();
    return std::max(0.0, std::min(t, hi) - cuts_[j]);
  }

  std::vector<double> cuts_;
};

}  // namespace

void HazardFamily::cum_psi_outer(double t, const Vec& theta, double* out) const {
  const std::size_t p = dim();
  const auto f = [&](double s, double* o) {
    Vec ps(p);
    psi(s, theta, ps.data());
    const double a = alpha(s, theta);
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < p; ++j) o[i * p + j] = ps[i] * ps[j] * a;
  };
  const Vec v = integrate_adaptive(f, static_cast<int>(p * p), 0.0, t, 1e-10, breakpoints());
  std::copy(v.begin(), v.end(), out);
}

void HazardFamily::cum_dpsi(double t, const Vec& theta, double* out) const {
  const std::size_t p = dim();
  const auto f = [&](double s, double* o) {
    dpsi(s, theta, o);
    const double a = alpha(s, theta);
    for (std::size_t k = 0; k < p * p; ++k) o[k] *= a;
  };
  const Vec v = integrate_adaptive(f, static_cast<int>(p * p), 0.0, t, 1e-10, breakpoints());
  std::copy(v.begin(), v.end(), out);
}

double HazardFamily::invert_cum_hazard(double target, const Vec& theta, double t_hi) const {
  if (target >= cum_hazard(t_hi, theta)) return std::numeric_limits<double>::infinity();
  double lo = 0.0, hi = t_hi;
  for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (cum_hazard(mid, theta) < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> HazardFamily::breakpoints() const { return {}; }

Vec HazardFamily::psi_vec(double s, const Vec& theta) const {
  Vec v(dim());
  psi(s, theta, v.data());
  return v;
}

Mat HazardFamily::dpsi_mat(double s, const Vec& theta) const {
  Mat m(dim(), dim());
  dpsi(s, theta, m.data());
  return m;
}

Vec HazardFamily::cum_hazard_grad_vec(double t, const Vec& theta) const {
  Vec v(dim());
  cum_hazard_grad(t, theta, v.data());
  return v;
}

Mat HazardFamily::cum_psi_outer_mat(double t, const Vec& theta) const {
  Mat m(dim(), dim());
  cum_psi_outer(t, theta, m.data());
  return m;
}

Mat HazardFamily::cum_dpsi_mat(double t, const Vec& theta) const {
  Mat m(dim(), dim());
  cum_dpsi(t, theta, m.data());
  return m;
}

std::unique_ptr<HazardFamily> make_family(const std::string& name, const FamilyConfig& config) {
  if (name == "exponential") return std::make_unique<Exponential>();
  if (name == "weibull") return std::make_unique<Weibull1>();
  if (name == "weibull2") return std::make_unique<Weibull2>();
  if (name == "gompertz") return std::make_unique<Gompertz>();
  if (name == "piecewise_constant") {
    if (config.cuts.empty()) throw ConfigError("piecewise_constant needs cut points");
    return std::make_unique<PiecewiseConstant>(config.cuts);
  }
  throw ConfigError("unknown family: " + name);
}

namespace {

Vec closed_cumulative(const HazardFamily& fam, const Vec& th, IntegrandKind g, double t) {
  const std::size_t p = fam.dim();
  switch (g) {
    case IntegrandKind::alpha:
      return {fam.cum_hazard(t, th)};
    case IntegrandKind::psi_alpha: {
      Vec v(p);
      fam.cum_hazard_grad(t, th, v.data());
      return v;
    }
    case IntegrandKind::psi_psi_alpha: {
      Vec v(p * p);
      fam.cum_psi_outer(t, th, v.data());
      return v;
    }
    case IntegrandKind::dpsi_alpha: {
      Vec v(p * p);
      fam.cum_dpsi(t, th, v.data());
      return v;
    }
  }
  throw ConfigError("unknown integrand kind");
}

void eval_integrand(const HazardFamily& fam, const Vec& th, IntegrandKind g, double s,
                    double* out) {
  const std::size_t p = fam.dim();
  const double a = fam.alpha(s, th);
  switch (g) {
    case IntegrandKind::alpha:
      out[0] = a;
      return;
    case IntegrandKind::psi_alpha: {
      fam.psi(s, th, out);
      for (std::size_t i = 0; i < p; ++i) out[i] *= a;
      return;
    }
    case IntegrandKind::psi_psi_alpha: {
      Vec ps(p);
      fam.psi(s, th, ps.data());
      for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) out[i * p + j] = ps[i] * ps[j] * a;
      return;
    }
    case IntegrandKind::dpsi_alpha: {
      fam.dpsi(s, th, out);
      for (std::size_t k = 0; k < p * p; ++k) out[k] *= a;
      return;
    }
  }
}

}  // namespace

Mat integrate_weighted(const HazardFamily& fam, const Vec& theta, IntegrandKind g,
                       const TimeWeight& weight, double t0, double t1, double rel_tol) {
  if (!fam.in_domain(theta)) throw ValidationError("integrate_weighted: theta outside domain");
  if (t1 < t0) throw ValidationError("integrate_weighted: t1 < t0");
  const std::size_t p = fam.dim();
  const std::size_t rows = (g == IntegrandKind::alpha) ? 1 : p;
  const std::size_t cols = (g == IntegrandKind::alpha || g == IntegrandKind::psi_alpha) ? 1 : p;
  Mat out(rows, cols);
  if (t1 == t0) return out;

  if (weight.is_step()) {
    // exact: weight constant between its knots, cumulative closed forms
    std::vector<double> pts{t0};
    for (double k : weight.step().knots)
      if (k > t0 && k < t1) pts.push_back(k);
    pts.push_back(t1);
    Vec acc(rows * cols, 0.0);
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
      const double w = weight(0.5 * (pts[k] + pts[k + 1]));
      if (w == 0.0) continue;
      const Vec hi = closed_cumulative(fam, theta, g, pts[k + 1]);
      const Vec lo = closed_cumulative(fam, theta, g, pts[k]);
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += w * (hi[i] - lo[i]);
    }
    std::copy(acc.begin(), acc.end(), out.data());
    return out;
  }

  const auto f = [&](double s, double* o) {
    eval_integrand(fam, theta, g, s, o);
    const double w = weight(s);
    for (std::size_t k = 0; k < rows * cols; ++k) o[k] *= w;
  };
  std::vector<double> brk = weight.breakpoints();
  for (double c : fam.breakpoints()) brk.push_back(c);
  const Vec v = integrate_adaptive(f, static_cast<int>(rows * cols), t0, t1, rel_tol, brk);
  std::copy(v.begin(), v.end(), out.data());
  return out;
}

Mat integrate_weighted_custom(const VectorIntegrand& f, int rows, int cols,
                              const TimeWeight& weight, double t0, double t1, double rel_tol) {
  Mat out(rows, cols);
  if (t1 <= t0) return out;
  const auto wrapped = [&](double s, double* o) {
    f(s, o);
    const double w = weight(s);
    for (int k = 0; k < rows * cols; ++k) o[k] *= w;
  };
  std::vector<double> brk = weight.is_step() ? weight.step().knots : weight.breakpoints();
  const Vec v = integrate_adaptive(wrapped, rows * cols, t0, t1, rel_tol, brk);
  std::copy(v.begin(), v.end(), out.data());
  return out;
}

}  // namespace hazfit
