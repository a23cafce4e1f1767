#pragma once

// Reference computations that do not share code with the library's Kalman
// path: dense Gaussian densities and conditional expectations.

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "aethercast/sarimax.hpp"

namespace oracle {

inline std::vector<double> simulate_arma(double phi, double theta, int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  const int burn = 500;
  std::vector<double> out;
  double w = 0.0, e_prev = 0.0;
  for (int t = 0; t < n + burn; ++t) {
    const double e = n01(rng);
    w = phi * w + e + theta * e_prev;
    e_prev = e;
    if (t >= burn) out.push_back(w);
  }
  return out;
}

struct ExogSeries {
  std::vector<double> y;
  Eigen::MatrixXd x;
};

/// y_t = 5 + beta x_t + u_t, u AR(1) with unit innovations.
inline ExogSeries simulate_ar1_exog(double phi, double beta, int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  ExogSeries s;
  s.x.resize(n, 1);
  double u = 0.0;
  for (int t = 0; t < 500; ++t) u = phi * u + n01(rng);
  for (int t = 0; t < n; ++t) {
    u = phi * u + n01(rng);
    s.x(t, 0) = n01(rng);
    s.y.push_back(5.0 + beta * s.x(t, 0) + u);
  }
  return s;
}

inline double dense_gaussian_loglik(const Eigen::MatrixXd& cov, const Eigen::VectorXd& y) {
  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  const Eigen::MatrixXd l = llt.matrixL();
  const double logdet = 2.0 * l.diagonal().array().log().sum();
  const double quad = y.dot(llt.solve(y));
  return -0.5 * (static_cast<double>(y.size()) * std::log(2.0 * std::numbers::pi) + logdet + quad);
}

/// Closed-form ARMA(1,1) autocovariances in a Toeplitz matrix.
inline double dense_arma11_loglik(double phi, double theta, double sigma2, const std::vector<double>& y) {
  const auto n = static_cast<Eigen::Index>(y.size());
  std::vector<double> gamma(y.size());
  gamma[0] = sigma2 * (1.0 + 2.0 * phi * theta + theta * theta) / (1.0 - phi * phi);
  if (y.size() > 1) gamma[1] = sigma2 * (1.0 + phi * theta) * (phi + theta) / (1.0 - phi * phi);
  for (std::size_t k = 2; k < y.size(); ++k) gamma[k] = phi * gamma[k - 1];
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) cov(i, j) = gamma[static_cast<std::size_t>(std::abs(i - j))];
  return dense_gaussian_loglik(cov, Eigen::Map<const Eigen::VectorXd>(y.data(), n));
}

/// Autocovariances (unit innovation variance) of the multiplicative
/// (1,0,1)(1,0,1,s) ARMA via a long MA(infinity) expansion.
inline std::vector<double> seasonal_arma_autocov(double phi, double theta, double sphi, double stheta, int s,
                                                 std::size_t max_lag) {
  std::vector<double> arc(static_cast<std::size_t>(s) + 2, 0.0), mac(static_cast<std::size_t>(s) + 2, 0.0);
  arc[1] = phi;
  arc[static_cast<std::size_t>(s)] += sphi;
  arc[static_cast<std::size_t>(s) + 1] = -phi * sphi;
  mac[0] = 1.0;
  mac[1] = theta;
  mac[static_cast<std::size_t>(s)] += stheta;
  mac[static_cast<std::size_t>(s) + 1] = theta * stheta;
  const std::size_t terms = 20000;
  std::vector<double> psi(terms, 0.0);
  for (std::size_t j = 0; j < terms; ++j) {
    double v = j < mac.size() ? mac[j] : 0.0;
    for (std::size_t i = 1; i < arc.size() && i <= j; ++i) v += arc[i] * psi[j - i];
    psi[j] = v;
  }
  std::vector<double> gamma(max_lag + 1, 0.0);
  for (std::size_t k = 0; k <= max_lag; ++k)
    for (std::size_t j = 0; j + k < terms; ++j) gamma[k] += psi[j] * psi[j + k];
  return gamma;
}

/// E[y_future | y_past] for regression with (1,1,1)(1,1,1,s) errors,
/// computed by dense Gaussian conditioning of the differenced residuals and
/// the explicit integration recursion.
inline std::vector<double> dense_sarimax_forecast(const aethercast::SarimaxParams& p, const std::vector<double>& y,
                                                  const Eigen::MatrixXd& hx, const Eigen::MatrixXd& fx) {
  const int s = p.order.s;
  const auto n = y.size();
  const auto h = static_cast<std::size_t>(fx.rows());
  std::vector<double> u(n);
  for (std::size_t t = 0; t < n; ++t) {
    double fit = p.intercept;
    for (std::size_t c = 0; c < p.beta.size(); ++c) fit += p.beta[c] * hx(static_cast<Eigen::Index>(t), c);
    u[t] = y[t] - fit;
  }
  std::vector<double> d1(n - 1);
  for (std::size_t t = 1; t < n; ++t) d1[t - 1] = u[t] - u[t - 1];
  std::vector<double> w(d1.size() - static_cast<std::size_t>(s));
  for (std::size_t t = static_cast<std::size_t>(s); t < d1.size(); ++t) w[t - s] = d1[t] - d1[t - s];

  const std::size_t m = w.size();
  const auto gamma = seasonal_arma_autocov(p.ar[0], p.ma[0], p.seasonal_ar[0], p.seasonal_ma[0], s, m + h);
  Eigen::MatrixXd gpp(m, m), gfp(h, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) gpp(i, j) = gamma[i > j ? i - j : j - i];
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < m; ++j) gfp(i, j) = gamma[m + i - j];
  const Eigen::VectorXd wp = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(m));
  const Eigen::VectorXd wf = gfp * gpp.ldlt().solve(wp);

  std::vector<double> ext = u;
  std::vector<double> out(h);
  for (std::size_t j = 0; j < h; ++j) {
    const std::size_t t = ext.size();
    const double next = wf(static_cast<Eigen::Index>(j)) + ext[t - 1] + ext[t - s] - ext[t - s - 1];
    ext.push_back(next);
    double fit = p.intercept;
    for (std::size_t c = 0; c < p.beta.size(); ++c) fit += p.beta[c] * fx(static_cast<Eigen::Index>(j), c);
    out[j] = fit + next;
  }
  return out;
}

}  // namespace oracle
