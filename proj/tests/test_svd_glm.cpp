#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "ratefactor/glm.hpp"
#include "ratefactor/link.hpp"
#include "ratefactor/rng.hpp"
#include "ratefactor/svd.hpp"
#include "ratefactor/types.hpp"

using namespace ratefactor;

namespace {

Eigen::MatrixXd random_matrix(int n, int m, Rng& rng) {
  Eigen::MatrixXd a(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) a(i, j) = rng.normal();
  return a;
}

std::vector<std::vector<double>> gram(const Eigen::MatrixXd& a) {
  const Eigen::MatrixXd g = a.transpose() * a;
  std::vector<std::vector<double>> out(std::size_t(g.rows()),
                                       std::vector<double>(std::size_t(g.cols())));
  for (int i = 0; i < g.rows(); ++i)
    for (int j = 0; j < g.cols(); ++j) out[std::size_t(i)][std::size_t(j)] = g(i, j);
  return out;
}

double poisson_neg_loglik_1d(const Eigen::VectorXd& y, const Eigen::VectorXd& x,
                             Link link, double beta) {
  double s = 0.0;
  for (int i = 0; i < y.size(); ++i) {
    const double lam = link_inverse(link, x(i) * beta);
    s -= y(i) * std::log(lam) - lam;
  }
  return s;
}

}  // namespace

TEST_CASE("truncated_svd of a diagonal matrix") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
  m(0, 0) = 3.0;
  m(1, 1) = 1.0;
  const TruncatedSvd svd = truncated_svd(m, 1);
  CHECK(svd.s(0) == doctest::Approx(3.0).epsilon(1e-12));
  // rank-1 reconstruction picks out the first axis
  const Eigen::MatrixXd rec = svd.u * svd.s.asDiagonal() * svd.v.transpose();
  CHECK(rec(0, 0) == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(std::fabs(rec(1, 1)) < 1e-10);
}

TEST_CASE("truncated_svd reproduces a rank-1 matrix exactly") {
  Eigen::VectorXd a(5), b(3);
  a << 1, -2, 0.5, 3, -1;
  b << 2, 1, -4;
  const Eigen::MatrixXd m = a * b.transpose();
  const TruncatedSvd svd = truncated_svd(m, 1);
  const Eigen::MatrixXd rec = svd.u * svd.s.asDiagonal() * svd.v.transpose();
  CHECK((m - rec).norm() <= 1e-10 * m.norm());
}

TEST_CASE("truncated_svd singular values match an independent eigensolver") {
  Rng rng(314159);
  const Eigen::MatrixXd a = random_matrix(5, 4, rng);
  const TruncatedSvd svd = truncated_svd(a, 2);
  const oracle::SymEigen eig = oracle::jacobi_eigen(gram(a));
  for (int k = 0; k < 2; ++k) {
    const double ref = std::sqrt(std::max(eig.values[std::size_t(k)], 0.0));
    CHECK(svd.s(k) == doctest::Approx(ref).epsilon(1e-8));
  }
  // rank-2 reconstruction error equals the tail of the spectrum
  const Eigen::MatrixXd rec = svd.u * svd.s.asDiagonal() * svd.v.transpose();
  double tail = 0.0;
  for (std::size_t k = 2; k < eig.values.size(); ++k)
    tail += std::max(eig.values[k], 0.0);
  CHECK((a - rec).squaredNorm() == doctest::Approx(tail).epsilon(1e-6));
}

TEST_CASE("truncated_svd columns are orthonormal and signs are canonical") {
  Rng rng(2718);
  const Eigen::MatrixXd a = random_matrix(7, 5, rng);
  const TruncatedSvd svd = truncated_svd(a, 3);
  const Eigen::MatrixXd iu = svd.u.transpose() * svd.u;
  const Eigen::MatrixXd iv = svd.v.transpose() * svd.v;
  CHECK((iu - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-10);
  CHECK((iv - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-10);
  for (int k = 0; k < 3; ++k) {
    CHECK(svd.s(k) >= 0.0);
    if (k > 0) CHECK(svd.s(k) <= svd.s(k - 1) + 1e-12);
    // first non-negligible entry of each v column is positive
    const double scale = svd.v.col(k).norm();
    for (int j = 0; j < svd.v.rows(); ++j) {
      if (std::fabs(svd.v(j, k)) > 1e-12 * scale) {
        CHECK(svd.v(j, k) > 0.0);
        break;
      }
    }
  }
}

TEST_CASE("truncated_svd input validation") {
  Eigen::MatrixXd a(2, 2);
  a << 1, 2, 3, 4;
  CHECK_THROWS_AS((void)truncated_svd(a, 3), input_error);
  CHECK_THROWS_AS((void)truncated_svd(a, 0), input_error);
  a(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS((void)truncated_svd(a, 1), input_error);
}

TEST_CASE("glm working weights per link") {
  CHECK(glm_working_weight(Link::identity, 2.0) == doctest::Approx(0.5));
  CHECK(glm_working_weight(Link::log, 2.0) == doctest::Approx(2.0));
  CHECK(glm_working_weight(Link::sqrt, 2.0) == 4.0);
  CHECK(glm_working_weight(Link::sqrt, 123.0) == 4.0);
}

TEST_CASE("constant data with a ones column is fitted exactly") {
  Eigen::VectorXd y = Eigen::VectorXd::Constant(6, 9.0);
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(6, 1);
  SUBCASE("sqrt link: beta = sqrt(c)") {
    const GlmFit fit = fit_poisson_glm(y, x, Link::sqrt);
    CHECK(fit.beta(0) == doctest::Approx(3.0).epsilon(1e-8));
    CHECK(fit.deviance == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(fit.converged);
  }
  SUBCASE("identity link: beta = mean") {
    const GlmFit fit = fit_poisson_glm(y, x, Link::identity);
    CHECK(fit.beta(0) == doctest::Approx(9.0).epsilon(1e-8));
  }
  SUBCASE("log link: beta = log(mean)") {
    const GlmFit fit = fit_poisson_glm(y, x, Link::log);
    CHECK(fit.beta(0) == doctest::Approx(std::log(9.0)).epsilon(1e-8));
  }
}

TEST_CASE("identity/log one-column fits equal the mean (non-constant data)") {
  Eigen::VectorXd y(5);
  y << 0, 3, 7, 2, 8;  // mean 4
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(5, 1);
  CHECK(fit_poisson_glm(y, x, Link::identity).beta(0) ==
        doctest::Approx(4.0).epsilon(1e-7));
  CHECK(fit_poisson_glm(y, x, Link::log).beta(0) ==
        doctest::Approx(std::log(4.0)).epsilon(1e-7));
}

TEST_CASE("sqrt-link single-column fit matches the 1-D grid oracle") {
  Eigen::VectorXd y(2), xcol(2);
  y << 1, 4;
  xcol << 1, 2;
  Eigen::MatrixXd x = xcol;
  const GlmFit fit = fit_poisson_glm(y, x, Link::sqrt);
  const double ref = oracle::minimize_1d(
      [&](double b) { return poisson_neg_loglik_1d(y, xcol, Link::sqrt, b); },
      0.01, 5.0);
  CHECK(fit.beta(0) == doctest::Approx(ref).epsilon(1e-6));
  // the score equation 10/beta = 10*beta has the closed-form root 1
  CHECK(fit.beta(0) == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("sqrt-link working weights are exactly 4 at every iterate") {
  Eigen::VectorXd y(4);
  y << 2, 9, 4, 16;
  Eigen::MatrixXd x(4, 2);
  x << 1, 0.5, 1, 1.0, 1, 1.5, 1, 2.0;
  GlmConfig cfg;
  int observed = 0;
  cfg.weight_observer = [&](int, const Eigen::VectorXd& w) {
    ++observed;
    for (int i = 0; i < w.size(); ++i) CHECK(w(i) == 4.0);
  };
  (void)fit_poisson_glm(y, x, Link::sqrt, cfg);
  CHECK(observed >= 1);
}

TEST_CASE("log-link Monte-Carlo consistency within 3 standard errors") {
  Rng rng(99123);
  const int p = 4000;
  Eigen::MatrixXd x(p, 2);
  Eigen::VectorXd beta_true(2);
  beta_true << 1.0, 0.5;
  Eigen::VectorXd y(p);
  for (int i = 0; i < p; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = 2.0 * rng.uniform() - 1.0;
    const double lam = std::exp(x.row(i).dot(beta_true));
    y(i) = double(rng.poisson(lam));
  }
  const GlmFit fit = fit_poisson_glm(y, x, Link::log);
  // Fisher information at the truth gives the standard errors
  Eigen::MatrixXd info = Eigen::MatrixXd::Zero(2, 2);
  for (int i = 0; i < p; ++i) {
    const double lam = std::exp(x.row(i).dot(beta_true));
    info += lam * x.row(i).transpose() * x.row(i);
  }
  const Eigen::MatrixXd cov = info.inverse();
  for (int k = 0; k < 2; ++k)
    CHECK(std::fabs(fit.beta(k) - beta_true(k)) <= 3.0 * std::sqrt(cov(k, k)));
}

TEST_CASE("score equations vanish at the fitted coefficients") {
  Rng rng(5150);
  const int p = 60;
  Eigen::MatrixXd x(p, 2);
  Eigen::VectorXd y(p);
  for (int i = 0; i < p; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = rng.uniform();
    y(i) = double(rng.poisson(6.0 + 4.0 * x(i, 1)));
  }
  for (Link link : {Link::identity, Link::log, Link::sqrt}) {
    const GlmFit fit = fit_poisson_glm(y, x, link);
    // d loglik / d beta_j = sum_i (y_i/lam_i - 1) * dlam/deta * x_ij
    Eigen::VectorXd score = Eigen::VectorXd::Zero(2);
    for (int i = 0; i < p; ++i) {
      const double eta = x.row(i).dot(fit.beta);
      const double lam = link_inverse(link, eta);
      score += (y(i) / lam - 1.0) * link_inverse_deriv(link, eta) *
               x.row(i).transpose();
    }
    CHECK(score.lpNorm<Eigen::Infinity>() <= 1e-6 * y.lpNorm<1>());
  }
}

TEST_CASE("finite-difference gradient check at the optimum") {
  Eigen::VectorXd y(6);
  y << 3, 5, 2, 8, 6, 4;
  Eigen::MatrixXd x(6, 2);
  x << 1, 0.2, 1, 0.9, 1, 1.7, 1, 0.4, 1, 1.1, 1, 1.4;
  const GlmFit fit = fit_poisson_glm(y, x, Link::sqrt);
  auto nll = [&](const Eigen::VectorXd& b) {
    double s = 0.0;
    for (int i = 0; i < y.size(); ++i) {
      const double lam = link_inverse(Link::sqrt, x.row(i).dot(b));
      s -= y(i) * std::log(lam) - lam;
    }
    return s;
  };
  const double h = 1e-6;
  for (int k = 0; k < 2; ++k) {
    Eigen::VectorXd up = fit.beta, dn = fit.beta;
    up(k) += h;
    dn(k) -= h;
    CHECK(std::fabs(nll(up) - nll(dn)) / (2 * h) <= 1e-4);
  }
}

TEST_CASE("rank-deficient designs are rejected") {
  Eigen::VectorXd y(4);
  y << 1, 2, 3, 4;
  Eigen::MatrixXd x(4, 2);
  x.col(0) = Eigen::VectorXd::Ones(4);
  x.col(1) = 2.0 * x.col(0);  // duplicate direction
  CHECK_THROWS_AS((void)fit_poisson_glm(y, x, Link::log), numeric_error);
}

TEST_CASE("glm input validation") {
  Eigen::VectorXd y(2);
  y << 1, -1;
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(2, 1);
  CHECK_THROWS_AS((void)fit_poisson_glm(y, x, Link::log), input_error);
  y << 1, 2;
  Eigen::MatrixXd wide = Eigen::MatrixXd::Ones(2, 3);
  CHECK_THROWS_AS((void)fit_poisson_glm(y, wide, Link::log), input_error);
}

TEST_CASE("warm start at the solution converges immediately") {
  Eigen::VectorXd y(5);
  y << 4, 9, 16, 25, 36;
  Eigen::MatrixXd x(5, 1);
  x << 2, 3, 4, 5, 6;  // sqrt link: beta = 1 fits exactly
  Eigen::VectorXd init(1);
  init << 1.0;
  const GlmFit fit = fit_poisson_glm(y, x, Link::sqrt, {}, &init);
  CHECK(fit.converged);
  CHECK(fit.iterations <= 2);
  CHECK(fit.beta(0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(fit.deviance == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("deterministic rng: frozen outputs and split independence") {
  Rng a(12345), b(12345);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  CHECK(split_seed(7, 1) != split_seed(7, 2));
  Rng c(split_seed(7, 1)), d(split_seed(7, 2));
  CHECK(c.next_u64() != d.next_u64());
}

TEST_CASE("rng moments: uniform, normal, poisson") {
  Rng rng(424242);
  const int n = 200000;
  double su = 0, sn = 0, snn = 0, sp = 0;
  for (int i = 0; i < n; ++i) {
    su += rng.uniform();
    const double z = rng.normal();
    sn += z;
    snn += z * z;
    sp += double(rng.poisson(4.5));
  }
  CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(std::fabs(sn / n) < 3.0 / std::sqrt(double(n)));
  CHECK(snn / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(sp / n == doctest::Approx(4.5).epsilon(0.01));
}

TEST_CASE("poisson draws match exact tail probabilities (small and large mean)") {
  // P(X = 0) = exp(-mean) for the inversion branch; large-mean branch checked
  // through mean/variance.
  Rng rng(888);
  const int n = 100000;
  int zeros = 0;
  for (int i = 0; i < n; ++i) zeros += rng.poisson(2.0) == 0 ? 1 : 0;
  const double p0 = std::exp(-2.0);
  CHECK(std::fabs(double(zeros) / n - p0) <
        4.0 * std::sqrt(p0 * (1 - p0) / n));
  double s = 0, ss = 0;
  for (int i = 0; i < n; ++i) {
    const double v = double(rng.poisson(300.0));
    s += v;
    ss += v * v;
  }
  const double mean = s / n;
  const double var = ss / n - mean * mean;
  CHECK(mean == doctest::Approx(300.0).epsilon(0.005));
  CHECK(var == doctest::Approx(300.0).epsilon(0.05));
}
