// Test-only reference implementations, deliberately independent of the
// library's numerics: every dual-route check in the suite compares the
// library against one of these, so a shared bug cannot hide.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracle {

// ---------------------------------------------------------------------------
// Dense Gaussian elimination with partial pivoting (Ax = b). No Eigen.
inline std::vector<double> gauss_solve(std::vector<std::vector<double>> a,
                                       std::vector<double> b) {
  const std::size_t n = a.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
    if (std::fabs(a[piv][col]) < 1e-300)
      throw std::runtime_error("gauss_solve: singular");
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

// ---------------------------------------------------------------------------
// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns eigenvalues
// descending with matching eigenvectors (columns of v).
struct SymEigen {
  std::vector<double> values;
  std::vector<std::vector<double>> vectors;  // vectors[i] = i-th column
};

inline SymEigen jacobi_eigen(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::fabs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  SymEigen out;
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return a[x][x] > a[y][y]; });
  for (std::size_t i : order) {
    out.values.push_back(a[i][i]);
    std::vector<double> col(n);
    for (std::size_t k = 0; k < n; ++k) col[k] = v[k][i];
    out.vectors.push_back(col);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Nelder-Mead simplex minimizer (no derivatives, no linear algebra).
inline std::vector<double> nelder_mead(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x0, double scale, int max_iters, double tol) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> pts(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += scale;
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fv[i] = f(pts[i]);

  auto order = [&]() {
    std::vector<std::size_t> idx(n + 1);
    for (std::size_t i = 0; i <= n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    std::vector<std::vector<double>> p2;
    std::vector<double> f2;
    for (std::size_t i : idx) {
      p2.push_back(pts[i]);
      f2.push_back(fv[i]);
    }
    pts.swap(p2);
    fv.swap(f2);
  };

  for (int it = 0; it < max_iters; ++it) {
    order();
    if (std::fabs(fv[n] - fv[0]) <
        tol * (std::fabs(fv[0]) + std::fabs(fv[n]) + 1e-12))
      break;
    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) centroid[k] += pts[i][k] / double(n);
    auto blend = [&](double coef) {
      std::vector<double> p(n);
      for (std::size_t k = 0; k < n; ++k)
        p[k] = centroid[k] + coef * (pts[n][k] - centroid[k]);
      return p;
    };
    std::vector<double> xr = blend(-1.0);
    const double fr = f(xr);
    if (fr < fv[0]) {
      std::vector<double> xe = blend(-2.0);
      const double fe = f(xe);
      if (fe < fr) {
        pts[n] = xe;
        fv[n] = fe;
      } else {
        pts[n] = xr;
        fv[n] = fr;
      }
    } else if (fr < fv[n - 1]) {
      pts[n] = xr;
      fv[n] = fr;
    } else {
      std::vector<double> xc = blend(fr < fv[n] ? -0.5 : 0.5);
      const double fc = f(xc);
      if (fc < std::min(fr, fv[n])) {
        pts[n] = xc;
        fv[n] = fc;
      } else {
        for (std::size_t i = 1; i <= n; ++i) {
          for (std::size_t k = 0; k < n; ++k)
            pts[i][k] = pts[0][k] + 0.5 * (pts[i][k] - pts[0][k]);
          fv[i] = f(pts[i]);
        }
      }
    }
  }
  order();
  return pts[0];
}

// Tiny xorshift for oracle-side restarts; independent of the library RNG.
inline double oracle_uniform(std::uint64_t& s) {
  s ^= s << 13;
  s ^= s >> 7;
  s ^= s << 17;
  return double(s >> 11) / 9007199254740992.0;
}

// Multi-restart wrapper returning the best objective value found.
inline double nelder_mead_best(
    const std::function<double(const std::vector<double>&)>& f,
    std::size_t dim, int restarts, double lo, double hi, std::uint64_t seed,
    std::vector<double>* argmin = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  std::uint64_t s = seed ? seed : 1;
  for (int r = 0; r < restarts; ++r) {
    std::vector<double> x0(dim);
    for (std::size_t k = 0; k < dim; ++k)
      x0[k] = lo + (hi - lo) * oracle_uniform(s);
    std::vector<double> x =
        nelder_mead(f, x0, 0.25 * (hi - lo) + 1e-3, 4000, 1e-14);
    const double fx = f(x);
    if (fx < best) {
      best = fx;
      if (argmin) *argmin = x;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// 1-D minimizer: coarse grid then golden-section refinement.
inline double minimize_1d(const std::function<double(double)>& f, double lo,
                          double hi, int grid = 2000) {
  double best_x = lo, best_f = f(lo);
  for (int i = 1; i <= grid; ++i) {
    const double x = lo + (hi - lo) * double(i) / double(grid);
    const double fx = f(x);
    if (fx < best_f) {
      best_f = fx;
      best_x = x;
    }
  }
  double a = std::max(lo, best_x - (hi - lo) / grid);
  double b = std::min(hi, best_x + (hi - lo) / grid);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - gr * (b - a), d = a + gr * (b - a);
  for (int it = 0; it < 200; ++it) {
    if (f(c) < f(d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - gr * (b - a);
    d = a + gr * (b - a);
    if (b - a < 1e-13 * (std::fabs(a) + std::fabs(b) + 1.0)) break;
  }
  return 0.5 * (a + b);
}

}  // namespace oracle
