#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace aethercast {

struct SarimaxOrder {
  int p = 1, d = 1, q = 1;
  int P = 1, D = 1, Q = 1;
  int s = 24;

  void validate() const;
  int ar_degree() const noexcept { return p + P * s; }
  int ma_degree() const noexcept { return q + Q * s; }
  /// max(p + P s, q + Q s + 1)
  int state_dim() const noexcept;
  int lost_to_differencing() const noexcept { return d + D * s; }
};

/// Regression with SARIMA errors:
///   y_t = c + x_t' beta + u_t,  (1-B)^d (1-B^s)^D u_t follows a stationary,
///   invertible ARMA with polynomials (1 - phi B)(1 - Phi B^s) and
///   (1 + theta B)(1 + Theta B^s).
struct SarimaxParams {
  SarimaxOrder order;
  std::vector<double> ar;           // phi_1..phi_p
  std::vector<double> ma;           // theta_1..theta_q
  std::vector<double> seasonal_ar;  // Phi_1..Phi_P
  std::vector<double> seasonal_ma;  // Theta_1..Theta_Q
  std::vector<double> beta;
  std::vector<std::string> exog_names;
  double intercept = 0.0;
  bool has_intercept = true;
  double sigma2 = 1.0;
  double loglik = 0.0;
  int iterations = 0;
};

nlohmann::json to_json(const SarimaxParams& params);
SarimaxParams sarimax_params_from_json(const nlohmann::json& j);

/// Applies (1-B)^d (1-B^s)^D. Output length |y| - d - D s. Throws TooShort.
std::vector<double> difference(std::span<const double> y, int d, int D, int s);

/// delta_i such that x_t = w_t + sum_i delta_i x_{t-i} undoes `difference`.
std::vector<double> integration_weights(int d, int D, int s);

/// Multiplied-out ARMA lag polynomials, sign convention
///   w_t = sum ar_i w_{t-i} + e_t + sum ma_j e_{t-j}.
struct ArmaPolynomials {
  std::vector<double> ar;
  std::vector<double> ma;
};
ArmaPolynomials expand_polynomials(const SarimaxParams& params);

/// Maps unconstrained reals to the coefficients of a stationary AR
/// polynomial through partial autocorrelations r = x / sqrt(1 + x^2)
/// and the Durbin-Levinson recursion.
std::vector<double> constrain_stationary(std::span<const double> unconstrained);
/// Inverse of constrain_stationary. Requires a stationary input.
std::vector<double> unconstrain_stationary(std::span<const double> coefficients);

/// Harvey representation of an ARMA process with unit innovation variance:
///   alpha_{t+1} = T alpha_t + R e_t,  w_t = alpha_t[0].
/// T has the AR coefficients in column 0 and ones on the superdiagonal;
/// R = (1, ma_1, ..., ma_{r-1}).
class StateSpaceModel {
 public:
  static StateSpaceModel arma(std::span<const double> ar, std::span<const double> ma);

  int dim() const noexcept { return static_cast<int>(ar_.size()); }
  Eigen::MatrixXd transition() const;
  const Eigen::VectorXd& loading() const noexcept { return loading_; }
  const Eigen::VectorXd& ar_column() const noexcept { return ar_; }
  /// Stationary covariance: P = T P T' + R R'.
  const Eigen::MatrixXd& initial_cov() const noexcept { return p0_; }

  /// T * M without forming T.
  Eigen::MatrixXd apply_transition(const Eigen::MatrixXd& m) const;

 private:
  Eigen::VectorXd ar_;
  Eigen::VectorXd loading_;
  Eigen::MatrixXd p0_;
};

/// Solves P = T P T' + Q by squaring (doubling). Throws NumericalDivergence
/// if T is not stable.
Eigen::MatrixXd solve_discrete_lyapunov(const Eigen::MatrixXd& t, const Eigen::MatrixXd& q);

/// Exact Gaussian log-likelihood by the prediction-error decomposition.
double kalman_loglik(const StateSpaceModel& ss, std::span<const double> w, double sigma2);

struct SarimaxFitOptions {
  bool intercept = true;
  int max_iterations = 500;
  double relative_tolerance = 1e-8;
  std::optional<SarimaxParams> warm_start;
};

/// Maximum likelihood with beta and c profiled out by GLS on the Kalman
/// innovations and sigma^2 concentrated out. `exog` is n x k.
/// Throws TooShort, DimensionMismatch, NonFiniteObjective, OptimizerFailure.
SarimaxParams fit_sarimax(std::span<const double> y, const Eigen::MatrixXd& exog,
                          const SarimaxOrder& order, const SarimaxFitOptions& options = {},
                          std::vector<std::string> exog_names = {});

/// Profile log-likelihood of the ARMA part of `params` (beta, c and sigma^2
/// re-estimated), the quantity fit_sarimax maximizes.
double sarimax_profile_loglik(const SarimaxParams& params, std::span<const double> y,
                              const Eigen::MatrixXd& exog);

/// Mean forecast for the `future_exog.rows()` hours following `history`.
/// Throws DimensionMismatch, TooShort.
std::vector<double> forecast_sarimax(const SarimaxParams& params, std::span<const double> history,
                                     const Eigen::MatrixXd& history_exog,
                                     const Eigen::MatrixXd& future_exog);

/// yhat_{t|t-1} for every t >= d + D s (earlier entries are NaN).
std::vector<double> one_step_predictions(const SarimaxParams& params, std::span<const double> y,
                                         const Eigen::MatrixXd& exog);

}  // namespace aethercast
