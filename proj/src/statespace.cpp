#include <algorithm>
#include <cmath>
#include <numbers>

#include "aethercast/error.hpp"
#include "aethercast/sarimax.hpp"
#include "kalman_filter.hpp"

namespace aethercast {

Eigen::MatrixXd solve_discrete_lyapunov(const Eigen::MatrixXd& t, const Eigen::MatrixXd& q) {
  // P = sum_k T^k Q T'^k, accumulated as P_{j+1} = P_j + A_j P_j A_j',
  // A_{j+1} = A_j^2, which doubles the number of summed terms per pass.
  Eigen::MatrixXd a = t;
  Eigen::MatrixXd p = q;
  for (int iter = 0; iter < 128; ++iter) {
    Eigen::MatrixXd next = p + a * p * a.transpose();
    a = a * a;
    if (!next.allFinite())
      fail(Errc::NumericalDivergence, "sarimax: Lyapunov iteration diverged (non-stationary AR part)");
    const double change = (next - p).cwiseAbs().maxCoeff();
    p = std::move(next);
    if (change <= 1e-15 * std::max(1.0, p.cwiseAbs().maxCoeff()) && a.cwiseAbs().maxCoeff() < 1e-8)
      return 0.5 * (p + p.transpose());
  }
  fail(Errc::NumericalDivergence, "sarimax: Lyapunov iteration did not converge");
}

StateSpaceModel StateSpaceModel::arma(std::span<const double> ar, std::span<const double> ma) {
  const auto r = static_cast<Eigen::Index>(
      std::max(ar.size(), ma.size() + 1));
  StateSpaceModel ss;
  ss.ar_ = Eigen::VectorXd::Zero(r);
  for (std::size_t i = 0; i < ar.size(); ++i) ss.ar_(static_cast<Eigen::Index>(i)) = ar[i];
  ss.loading_ = Eigen::VectorXd::Zero(r);
  ss.loading_(0) = 1.0;
  for (std::size_t j = 0; j < ma.size(); ++j) ss.loading_(static_cast<Eigen::Index>(j + 1)) = ma[j];
  ss.p0_ = solve_discrete_lyapunov(ss.transition(), ss.loading_ * ss.loading_.transpose());
  return ss;
}

Eigen::MatrixXd StateSpaceModel::transition() const {
  const Eigen::Index r = dim();
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(r, r);
  t.col(0) = ar_;
  for (Eigen::Index i = 0; i + 1 < r; ++i) t(i, i + 1) = 1.0;
  return t;
}

Eigen::MatrixXd StateSpaceModel::apply_transition(const Eigen::MatrixXd& m) const {
  const Eigen::Index r = dim();
  Eigen::MatrixXd out(r, m.cols());
  for (Eigen::Index i = 0; i < r; ++i) {
    if (i + 1 < r)
      out.row(i) = ar_(i) * m.row(0) + m.row(i + 1);
    else
      out.row(i) = ar_(i) * m.row(0);
  }
  return out;
}

double kalman_loglik(const StateSpaceModel& ss, std::span<const double> w, double sigma2) {
  if (!(sigma2 > 0.0)) fail(Errc::InvalidArgument, "sarimax: sigma2 must be positive");
  for (double v : w)
    if (!std::isfinite(v)) fail(Errc::NonFinite, "sarimax: non-finite observation");
  const Eigen::MatrixXd data =
      Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  double ll = 0.0;
  const double log2pi = std::log(2.0 * std::numbers::pi);
  detail::run_filter(ss, data, [&](Eigen::Index, const Eigen::RowVectorXd& v, double f,
                                   const Eigen::RowVectorXd&) {
    ll -= 0.5 * (log2pi + std::log(sigma2 * f) + v(0) * v(0) / (sigma2 * f));
  });
  return ll;
}

}  // namespace aethercast
