#pragma once

// Internal: the Kalman recursion shared by likelihood, fitting and
// forecasting. Several data columns are filtered together; they share the
// gain sequence because the covariance recursion does not depend on data.

#include <cmath>

#include <Eigen/Dense>

#include "aethercast/error.hpp"
#include "aethercast/sarimax.hpp"

namespace aethercast::detail {

/// Calls on_step(t, innovation_row, F_t, prediction_row) for every row of
/// `data` and returns the one-step-ahead predicted state after the last row
/// (dim x data.cols()). Covariances are in units of the innovation variance.
template <class OnStep>
Eigen::MatrixXd run_filter(const StateSpaceModel& ss, const Eigen::MatrixXd& data, OnStep&& on_step) {
  const Eigen::Index r = ss.dim();
  const Eigen::Index m = data.cols();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(r, m);
  Eigen::MatrixXd p = ss.initial_cov();
  const Eigen::MatrixXd rr = ss.loading() * ss.loading().transpose();
  Eigen::VectorXd gain(r);
  Eigen::RowVectorXd pred(m), v(m);
  bool steady = false;

  for (Eigen::Index t = 0; t < data.rows(); ++t) {
    const double f = p(0, 0);
    if (!(f > 0.0) || !std::isfinite(f))
      fail(Errc::NumericalDivergence, "sarimax: innovation variance " + std::to_string(f) +
                                          " at step " + std::to_string(t));
    pred = a.row(0);
    v = data.row(t) - pred;
    on_step(t, v, f, pred);
    gain = p.col(0) / f;
    a.noalias() += gain * v;
    a = ss.apply_transition(a);
    if (!steady) {
      const Eigen::MatrixXd updated = p - gain * p.row(0);
      const Eigen::MatrixXd half = ss.apply_transition(updated);
      Eigen::MatrixXd next = ss.apply_transition(half.transpose()).transpose() + rr;
      const double scale = std::max(1.0, next.cwiseAbs().maxCoeff());
      steady = (next - p).cwiseAbs().maxCoeff() <= 1e-13 * scale;
      p = std::move(next);
    }
  }
  return a;
}

}  // namespace aethercast::detail
