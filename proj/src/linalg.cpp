#include "hazfit/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace hazfit {

Mat mat_mul(const Mat& a, const Mat& b) {
  Mat out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

Vec mat_vec(const Mat& a, const Vec& x) {
  Vec out(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out[i] += a(i, j) * x[j];
  return out;
}

Mat transpose(const Mat& a) {
  Mat out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

Mat outer(const Vec& a, const Vec& b) {
  Mat out(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out(i, j) = a[i] * b[j];
  return out;
}

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm_inf(const Vec& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

double norm2(const Vec& v) { return std::sqrt(dot(v, v)); }

double frobenius(const Mat& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

Vec vec_add(Vec a, const Vec& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

Vec vec_sub(Vec a, const Vec& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
  return a;
}

Vec vec_scale(Vec a, double c) {
  for (double& x : a) x *= c;
  return a;
}

Vec solve(Mat a, Vec b) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.size() != n) throw ValidationError("solve: dimension mismatch");
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    double best = std::fabs(a(col, col));
    for (std::size_t r = col + 1; r < n; ++r) {
      const double v = std::fabs(a(r, col));
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best < 1e-300) throw SingularMatrixError("solve: singular matrix");
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(piv, j));
      std::swap(b[col], b[piv]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a(r, col) / a(col, col);
      if (f == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) a(r, j) -= f * a(col, j);
      b[r] -= f * b[col];
    }
  }
  Vec x(n, 0.0);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= a(ii, j) * x[j];
    x[ii] = s / a(ii, ii);
  }
  return x;
}

Mat inverse(const Mat& a) {
  const std::size_t n = a.rows();
  Mat out(n, n);
  for (std::size_t col = 0; col < n; ++col) {
    Vec e(n, 0.0);
    e[col] = 1.0;
    Vec x = solve(a, e);
    for (std::size_t i = 0; i < n; ++i) out(i, col) = x[i];
  }
  return out;
}

void sym_eigen(const Mat& a, Mat& vectors, Vec& values) {
  const std::size_t n = a.rows();
  Mat s = a;
  vectors = Mat::identity(n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += s(i, j) * s(i, j);
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::fabs(s(p, q)) < 1e-300) continue;
        const double theta = (s(q, q) - s(p, p)) / (2.0 * s(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double skp = s(k, p), skq = s(k, q);
          s(k, p) = c * skp - sn * skq;
          s(k, q) = sn * skp + c * skq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double spk = s(p, k), sqk = s(q, k);
          s(p, k) = c * spk - sn * sqk;
          s(q, k) = sn * spk + c * sqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = vectors(k, p), vkq = vectors(k, q);
          vectors(k, p) = c * vkp - sn * vkq;
          vectors(k, q) = sn * vkp + c * vkq;
        }
      }
  }
  values.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) values[i] = s(i, i);
  // sort ascending, permuting columns of vectors alongside
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return values[x] < values[y]; });
  Vec sorted(n);
  Mat vs(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    sorted[j] = values[idx[j]];
    for (std::size_t i = 0; i < n; ++i) vs(i, j) = vectors(i, idx[j]);
  }
  values = sorted;
  vectors = vs;
}

Mat sym_inverse_sqrt(const Mat& a, double eigen_floor) {
  Mat v;
  Vec lam;
  sym_eigen(a, v, lam);
  const std::size_t n = a.rows();
  Mat out(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double l = std::max(lam[k], eigen_floor);
    const double inv_sqrt = 1.0 / std::sqrt(l);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out(i, j) += inv_sqrt * v(i, k) * v(j, k);
  }
  return out;
}

double min_eigenvalue(const Mat& sym) {
  Mat v;
  Vec lam;
  sym_eigen(sym, v, lam);
  return lam.front();
}

void symmetrize(Mat& a) {
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) {
      const double m = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = a(j, i) = m;
    }
}

}  // namespace hazfit
