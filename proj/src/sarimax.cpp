#include "aethercast/sarimax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "aethercast/error.hpp"
#include "kalman_filter.hpp"

namespace aethercast {

void SarimaxOrder::validate() const {
  if (p < 0 || d < 0 || q < 0 || P < 0 || D < 0 || Q < 0)
    fail(Errc::InvalidArgument, "sarimax: orders must be nonnegative");
  if (s < 1) fail(Errc::InvalidArgument, "sarimax: seasonal period must be >= 1");
}

int SarimaxOrder::state_dim() const noexcept { return std::max(ar_degree(), ma_degree() + 1); }

std::vector<double> difference(std::span<const double> y, int d, int D, int s) {
  const auto lost = static_cast<std::size_t>(d + D * s);
  if (y.size() <= lost)
    fail(Errc::TooShort, "sarimax: " + std::to_string(y.size()) + " values cannot be differenced (d=" +
                             std::to_string(d) + ", D=" + std::to_string(D) + ", s=" + std::to_string(s) + ")");
  std::vector<double> w(y.begin(), y.end());
  for (int i = 0; i < d; ++i) {
    for (std::size_t t = w.size() - 1; t >= 1; --t) w[t] -= w[t - 1];
    w.erase(w.begin());
  }
  const auto lag = static_cast<std::size_t>(s);
  for (int i = 0; i < D; ++i) {
    for (std::size_t t = w.size() - 1; t >= lag; --t) w[t] -= w[t - lag];
    w.erase(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(lag));
  }
  return w;
}

namespace {

// Coefficients c_0..c_n of a product of lag polynomials.
std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

// 1 + sign * sum c_i B^(i*stride)
std::vector<double> lag_poly(std::span<const double> coef, int stride, double sign) {
  std::vector<double> out(coef.size() * static_cast<std::size_t>(stride) + 1, 0.0);
  out[0] = 1.0;
  for (std::size_t i = 0; i < coef.size(); ++i) out[(i + 1) * static_cast<std::size_t>(stride)] = sign * coef[i];
  return out;
}

}  // namespace

std::vector<double> integration_weights(int d, int D, int s) {
  std::vector<double> poly{1.0};
  for (int i = 0; i < d; ++i) poly = poly_mul(poly, {1.0, -1.0});
  std::vector<double> seasonal(static_cast<std::size_t>(s) + 1, 0.0);
  seasonal[0] = 1.0;
  seasonal[static_cast<std::size_t>(s)] = -1.0;
  for (int i = 0; i < D; ++i) poly = poly_mul(poly, seasonal);
  std::vector<double> delta(poly.size() - 1);
  for (std::size_t i = 1; i < poly.size(); ++i) delta[i - 1] = -poly[i];
  return delta;
}

ArmaPolynomials expand_polynomials(const SarimaxParams& params) {
  const int s = params.order.s;
  const auto ar_poly = poly_mul(lag_poly(params.ar, 1, -1.0), lag_poly(params.seasonal_ar, s, -1.0));
  const auto ma_poly = poly_mul(lag_poly(params.ma, 1, 1.0), lag_poly(params.seasonal_ma, s, 1.0));
  ArmaPolynomials out;
  for (std::size_t i = 1; i < ar_poly.size(); ++i) out.ar.push_back(-ar_poly[i]);
  for (std::size_t i = 1; i < ma_poly.size(); ++i) out.ma.push_back(ma_poly[i]);
  while (!out.ar.empty() && out.ar.back() == 0.0) out.ar.pop_back();
  while (!out.ma.empty() && out.ma.back() == 0.0) out.ma.pop_back();
  return out;
}

std::vector<double> constrain_stationary(std::span<const double> unconstrained) {
  const std::size_t n = unconstrained.size();
  std::vector<double> phi, prev;
  for (std::size_t k = 0; k < n; ++k) {
    const double r = unconstrained[k] / std::sqrt(1.0 + unconstrained[k] * unconstrained[k]);
    prev = phi;
    phi.assign(k + 1, 0.0);
    for (std::size_t i = 0; i < k; ++i) phi[i] = prev[i] - r * prev[k - 1 - i];
    phi[k] = r;
  }
  return phi;
}

std::vector<double> unconstrain_stationary(std::span<const double> coefficients) {
  std::vector<double> phi(coefficients.begin(), coefficients.end());
  const std::size_t n = phi.size();
  std::vector<double> out(n);
  for (std::size_t k = n; k-- > 0;) {
    const double r = phi[k];
    if (!(std::abs(r) < 1.0))
      fail(Errc::InvalidArgument, "sarimax: coefficients are not stationary");
    out[k] = r / std::sqrt(1.0 - r * r);
    std::vector<double> prev(k);
    for (std::size_t i = 0; i < k; ++i) prev[i] = (phi[i] + r * phi[k - 1 - i]) / (1.0 - r * r);
    phi = std::move(prev);
  }
  return out;
}

nlohmann::json to_json(const SarimaxParams& params) {
  const auto& o = params.order;
  return {
      {"order", {o.p, o.d, o.q}},
      {"seasonal_order", {o.P, o.D, o.Q, o.s}},
      {"ar", params.ar},
      {"ma", params.ma},
      {"seasonal_ar", params.seasonal_ar},
      {"seasonal_ma", params.seasonal_ma},
      {"beta", params.beta},
      {"exog_names", params.exog_names},
      {"intercept", params.intercept},
      {"has_intercept", params.has_intercept},
      {"sigma2", params.sigma2},
      {"loglik", params.loglik},
      {"iterations", params.iterations},
  };
}

SarimaxParams sarimax_params_from_json(const nlohmann::json& j) {
  SarimaxParams p;
  const auto order = j.at("order").get<std::vector<int>>();
  const auto seasonal = j.at("seasonal_order").get<std::vector<int>>();
  if (order.size() != 3 || seasonal.size() != 4)
    fail(Errc::SchemaError, "sarimax: order arrays must have 3 and 4 entries");
  p.order = {order[0], order[1], order[2], seasonal[0], seasonal[1], seasonal[2], seasonal[3]};
  p.ar = j.at("ar").get<std::vector<double>>();
  p.ma = j.at("ma").get<std::vector<double>>();
  p.seasonal_ar = j.at("seasonal_ar").get<std::vector<double>>();
  p.seasonal_ma = j.at("seasonal_ma").get<std::vector<double>>();
  p.beta = j.at("beta").get<std::vector<double>>();
  p.exog_names = j.value("exog_names", std::vector<std::string>{});
  p.intercept = j.at("intercept").get<double>();
  p.has_intercept = j.value("has_intercept", true);
  p.sigma2 = j.at("sigma2").get<double>();
  p.loglik = j.value("loglik", 0.0);
  p.iterations = j.value("iterations", 0);
  return p;
}

namespace {

constexpr double kPenalty = 1e10;

struct Problem {
  SarimaxOrder order;
  Eigen::MatrixXd data;  // differenced: [y | exog | (ones)]
  bool intercept_in_gls = false;
};

struct Profile {
  double loglik = 0.0;
  double sigma2 = 0.0;
  Eigen::VectorXd coef;  // exog betas, then intercept if estimated here
};

Problem make_problem(std::span<const double> y, const Eigen::MatrixXd& exog, const SarimaxOrder& order,
                     bool intercept) {
  const auto n = static_cast<Eigen::Index>(y.size());
  if (exog.rows() != n)
    fail(Errc::DimensionMismatch, "sarimax: exog has " + std::to_string(exog.rows()) + " rows for " +
                                      std::to_string(n) + " observations");
  Problem pr;
  pr.order = order;
  // A constant is annihilated by differencing, so c only enters the GLS
  // when the model is not integrated.
  pr.intercept_in_gls = intercept && order.lost_to_differencing() == 0;
  const auto wy = difference(y, order.d, order.D, order.s);
  const auto nw = static_cast<Eigen::Index>(wy.size());
  const Eigen::Index m = 1 + exog.cols() + (pr.intercept_in_gls ? 1 : 0);
  pr.data.resize(nw, m);
  pr.data.col(0) = Eigen::Map<const Eigen::VectorXd>(wy.data(), nw);
  for (Eigen::Index c = 0; c < exog.cols(); ++c) {
    std::vector<double> col(exog.col(c).data(), exog.col(c).data() + n);
    const auto wc = difference(col, order.d, order.D, order.s);
    pr.data.col(1 + c) = Eigen::Map<const Eigen::VectorXd>(wc.data(), nw);
  }
  if (pr.intercept_in_gls) pr.data.col(m - 1).setOnes();
  if (!pr.data.allFinite()) fail(Errc::NonFinite, "sarimax: non-finite training data");
  return pr;
}

Profile profile(const ArmaPolynomials& poly, const Eigen::MatrixXd& data) {
  const StateSpaceModel ss = StateSpaceModel::arma(poly.ar, poly.ma);
  const Eigen::Index m = data.cols();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(m, m);
  double sum_log_f = 0.0;
  detail::run_filter(ss, data, [&](Eigen::Index, const Eigen::RowVectorXd& v, double f,
                                   const Eigen::RowVectorXd&) {
    gram.noalias() += v.transpose() * v / f;
    sum_log_f += std::log(f);
  });
  Profile out;
  double ssr = gram(0, 0);
  if (m > 1) {
    const Eigen::MatrixXd gxx = gram.bottomRightCorner(m - 1, m - 1);
    const Eigen::VectorXd gxy = gram.col(0).tail(m - 1);
    out.coef = gxx.completeOrthogonalDecomposition().solve(gxy);
    ssr -= gxy.dot(out.coef);
  }
  const auto n = static_cast<double>(data.rows());
  out.sigma2 = std::max(ssr / n, 1e-14 * gram(0, 0) / n + std::numeric_limits<double>::min());
  out.loglik = -0.5 * n * (std::log(2.0 * std::numbers::pi) + std::log(out.sigma2) + 1.0) - 0.5 * sum_log_f;
  return out;
}

std::size_t free_count(const SarimaxOrder& o) {
  return static_cast<std::size_t>(o.p + o.q + o.P + o.Q);
}

void unpack(const SarimaxOrder& o, const double* x, SarimaxParams& params) {
  auto take = [&](int count, double sign) {
    std::vector<double> u(x, x + count);
    x += count;
    auto c = constrain_stationary(u);
    for (double& v : c) v *= sign;
    return c;
  };
  params.ar = take(o.p, 1.0);
  params.ma = take(o.q, -1.0);
  params.seasonal_ar = take(o.P, 1.0);
  params.seasonal_ma = take(o.Q, -1.0);
}

std::vector<double> pack(const SarimaxParams& params) {
  std::vector<double> x;
  auto put = [&](const std::vector<double>& c, double sign) {
    std::vector<double> s(c);
    for (double& v : s) v *= sign;
    const auto u = unconstrain_stationary(s);
    x.insert(x.end(), u.begin(), u.end());
  };
  put(params.ar, 1.0);
  put(params.ma, -1.0);
  put(params.seasonal_ar, 1.0);
  put(params.seasonal_ma, -1.0);
  return x;
}

struct Objective {
  const Problem* problem;
  SarimaxParams scratch;
  int evaluations = 0;

  double operator()(const double* x) {
    ++evaluations;
    unpack(problem->order, x, scratch);
    try {
      const double ll = profile(expand_polynomials(scratch), problem->data).loglik;
      const double f = -ll / static_cast<double>(problem->data.rows());
      return std::isfinite(f) ? f : kPenalty;
    } catch (const Error&) {
      return kPenalty;
    }
  }
};

double gsl_objective(const gsl_vector* x, void* ctx) {
  return (*static_cast<Objective*>(ctx))(x->data);
}

void gsl_gradient(const gsl_vector* x, void* ctx, gsl_vector* g) {
  auto& obj = *static_cast<Objective*>(ctx);
  std::vector<double> probe(x->data, x->data + x->size);
  for (std::size_t i = 0; i < x->size; ++i) {
    const double h = 1e-5 * std::max(1.0, std::abs(probe[i]));
    const double keep = probe[i];
    probe[i] = keep + h;
    const double up = obj(probe.data());
    probe[i] = keep - h;
    const double down = obj(probe.data());
    probe[i] = keep;
    gsl_vector_set(g, i, (up - down) / (2.0 * h));
  }
}

void gsl_objective_and_gradient(const gsl_vector* x, void* ctx, double* f, gsl_vector* g) {
  *f = gsl_objective(x, ctx);
  gsl_gradient(x, ctx, g);
}

struct GslVector {
  gsl_vector* v;
  explicit GslVector(const std::vector<double>& values) : v(gsl_vector_alloc(values.size())) {
    for (std::size_t i = 0; i < values.size(); ++i) gsl_vector_set(v, i, values[i]);
  }
  ~GslVector() { gsl_vector_free(v); }
  GslVector(const GslVector&) = delete;
  GslVector& operator=(const GslVector&) = delete;
};

struct OptimResult {
  std::vector<double> x;
  double f = kPenalty;
  int iterations = 0;
};

// Derivative-free Nelder-Mead from x0.
OptimResult simplex_stage(Objective& obj, const std::vector<double>& x0, int max_iter, double rel_tol) {
  const std::size_t n = x0.size();
  gsl_multimin_function fn{&gsl_objective, n, &obj};
  GslVector start(x0);
  GslVector step(std::vector<double>(n, 0.25));
  std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> solver(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n), &gsl_multimin_fminimizer_free);
  if (gsl_multimin_fminimizer_set(solver.get(), &fn, start.v, step.v) != GSL_SUCCESS)
    fail(Errc::OptimizerFailure, "sarimax: simplex initialisation failed");
  OptimResult out;
  double prev = solver->fval;
  int stalled = 0;
  for (out.iterations = 0; out.iterations < max_iter; ++out.iterations) {
    if (gsl_multimin_fminimizer_iterate(solver.get()) != GSL_SUCCESS) break;
    const double f = solver->fval;
    const double size = gsl_multimin_fminimizer_size(solver.get());
    stalled = std::abs(prev - f) <= rel_tol * std::max(1.0, std::abs(f)) ? stalled + 1 : 0;
    prev = f;
    if (size < 1e-4 || (stalled >= static_cast<int>(4 * n) && size < 1e-2)) break;
  }
  out.x.assign(solver->x->data, solver->x->data + n);
  out.f = solver->fval;
  return out;
}

// Quasi-Newton refinement with central-difference gradients.
OptimResult quasi_newton_stage(Objective& obj, const OptimResult& from, int max_iter, double rel_tol) {
  const std::size_t n = from.x.size();
  gsl_multimin_function_fdf fdf{&gsl_objective, &gsl_gradient, &gsl_objective_and_gradient, n, &obj};
  GslVector start(from.x);
  std::unique_ptr<gsl_multimin_fdfminimizer, decltype(&gsl_multimin_fdfminimizer_free)> solver(
      gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, n),
      &gsl_multimin_fdfminimizer_free);
  OptimResult out = from;
  if (gsl_multimin_fdfminimizer_set(solver.get(), &fdf, start.v, 0.05, 0.1) != GSL_SUCCESS) return out;
  double prev = solver->f;
  for (int it = 0; it < max_iter; ++it) {
    if (gsl_multimin_fdfminimizer_iterate(solver.get()) != GSL_SUCCESS) break;
    ++out.iterations;
    const double f = solver->f;
    const bool small_change = std::abs(prev - f) <= rel_tol * std::max(1.0, std::abs(f));
    prev = f;
    if (small_change || gsl_multimin_test_gradient(solver->gradient, 1e-7) == GSL_SUCCESS) break;
  }
  if (solver->f < out.f) {
    out.x.assign(solver->x->data, solver->x->data + n);
    out.f = solver->f;
  }
  return out;
}

void finish_params(const Problem& pr, const Profile& prof, std::span<const double> y,
                   const Eigen::MatrixXd& exog, bool intercept, SarimaxParams& params) {
  const Eigen::Index k = exog.cols();
  params.beta.assign(static_cast<std::size_t>(k), 0.0);
  for (Eigen::Index c = 0; c < k; ++c) params.beta[static_cast<std::size_t>(c)] = prof.coef(c);
  params.has_intercept = intercept;
  params.intercept = 0.0;
  if (pr.intercept_in_gls) {
    params.intercept = prof.coef(k);
  } else if (intercept) {
    // Differenced model: c cancels in forecasts; report the level of the
    // regression residual for reference.
    double sum = 0.0;
    for (std::size_t t = 0; t < y.size(); ++t) {
      double fit = 0.0;
      for (Eigen::Index c = 0; c < k; ++c) fit += exog(static_cast<Eigen::Index>(t), c) * params.beta[c];
      sum += y[t] - fit;
    }
    params.intercept = sum / static_cast<double>(y.size());
  }
  params.sigma2 = prof.sigma2;
  params.loglik = prof.loglik;
}

}  // namespace

double sarimax_profile_loglik(const SarimaxParams& params, std::span<const double> y,
                              const Eigen::MatrixXd& exog) {
  const Problem pr = make_problem(y, exog, params.order, params.has_intercept);
  return profile(expand_polynomials(params), pr.data).loglik;
}

SarimaxParams fit_sarimax(std::span<const double> y, const Eigen::MatrixXd& exog, const SarimaxOrder& order,
                          const SarimaxFitOptions& options, std::vector<std::string> exog_names) {
  order.validate();
  const auto min_len = static_cast<std::size_t>(10 * (order.lost_to_differencing() + order.state_dim()));
  if (y.size() < min_len)
    fail(Errc::TooShort, "sarimax: need at least " + std::to_string(min_len) + " observations, got " +
                             std::to_string(y.size()));
  if (!exog_names.empty() && exog_names.size() != static_cast<std::size_t>(exog.cols()))
    fail(Errc::DimensionMismatch, "sarimax: exog name count differs from exog columns");

  const Problem pr = make_problem(y, exog, order, options.intercept);
  gsl_set_error_handler_off();

  SarimaxParams params;
  params.order = order;
  params.exog_names = std::move(exog_names);
  std::vector<double> x0(free_count(order), 0.0);
  if (options.warm_start) {
    const auto& ws = *options.warm_start;
    const auto& wo = ws.order;
    if (wo.p == order.p && wo.q == order.q && wo.P == order.P && wo.Q == order.Q) {
      try {
        x0 = pack(ws);
      } catch (const Error&) {
        x0.assign(free_count(order), 0.0);
      }
    }
  }

  Objective obj{&pr, params};
  OptimResult best{x0, 0.0, 0};
  if (!x0.empty()) {
    best.f = obj(x0.data());
    if (best.f >= kPenalty)
      fail(Errc::NonFiniteObjective, "sarimax: objective is not finite at the starting point");
    OptimResult nm = simplex_stage(obj, x0, options.max_iterations, options.relative_tolerance);
    if (nm.f < best.f) best = nm;
    const int remaining = std::max(1, options.max_iterations - nm.iterations);
    best = quasi_newton_stage(obj, best, remaining, options.relative_tolerance);
    best.iterations += nm.iterations;
    if (!(best.f < kPenalty)) fail(Errc::OptimizerFailure, "sarimax: no finite objective value found");
  }
  unpack(order, best.x.data(), params);
  params.iterations = best.iterations;
  const Profile prof = profile(expand_polynomials(params), pr.data);
  if (!std::isfinite(prof.loglik)) fail(Errc::NonFiniteObjective, "sarimax: final log-likelihood not finite");
  finish_params(pr, prof, y, exog, options.intercept, params);
  return params;
}

namespace {

std::vector<double> regression_residual(const SarimaxParams& params, std::span<const double> y,
                                        const Eigen::MatrixXd& exog) {
  if (static_cast<std::size_t>(exog.cols()) != params.beta.size())
    fail(Errc::DimensionMismatch, "sarimax: exog has " + std::to_string(exog.cols()) +
                                      " columns, model expects " + std::to_string(params.beta.size()));
  if (exog.rows() != static_cast<Eigen::Index>(y.size()))
    fail(Errc::DimensionMismatch, "sarimax: exog rows differ from observations");
  std::vector<double> u(y.size());
  for (std::size_t t = 0; t < y.size(); ++t) {
    double fit = params.intercept;
    for (std::size_t c = 0; c < params.beta.size(); ++c)
      fit += exog(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c)) * params.beta[c];
    u[t] = y[t] - fit;
  }
  return u;
}

}  // namespace

std::vector<double> forecast_sarimax(const SarimaxParams& params, std::span<const double> history,
                                     const Eigen::MatrixXd& history_exog, const Eigen::MatrixXd& future_exog) {
  if (static_cast<std::size_t>(future_exog.cols()) != params.beta.size())
    fail(Errc::DimensionMismatch, "sarimax: future exog has " + std::to_string(future_exog.cols()) +
                                      " columns, model expects " + std::to_string(params.beta.size()));
  if (!future_exog.allFinite()) fail(Errc::NonFinite, "sarimax: non-finite future exog");
  const auto& o = params.order;
  std::vector<double> u = regression_residual(params, history, history_exog);
  const auto w = difference(u, o.d, o.D, o.s);
  const auto poly = expand_polynomials(params);
  const StateSpaceModel ss = StateSpaceModel::arma(poly.ar, poly.ma);
  const Eigen::MatrixXd data = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  Eigen::MatrixXd state = detail::run_filter(ss, data, [](auto&&...) {});

  const auto delta = integration_weights(o.d, o.D, o.s);
  const auto h = static_cast<std::size_t>(future_exog.rows());
  std::vector<double> out(h);
  for (std::size_t j = 0; j < h; ++j) {
    double next = state(0, 0);
    const std::size_t n = u.size();
    for (std::size_t i = 0; i < delta.size(); ++i) next += delta[i] * u[n - 1 - i];
    u.push_back(next);
    double fit = params.intercept;
    for (std::size_t c = 0; c < params.beta.size(); ++c)
      fit += future_exog(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)) * params.beta[c];
    out[j] = fit + next;
    state = ss.apply_transition(state);
  }
  return out;
}

std::vector<double> one_step_predictions(const SarimaxParams& params, std::span<const double> y,
                                         const Eigen::MatrixXd& exog) {
  const auto& o = params.order;
  const std::vector<double> u = regression_residual(params, y, exog);
  const auto w = difference(u, o.d, o.D, o.s);
  const auto poly = expand_polynomials(params);
  const StateSpaceModel ss = StateSpaceModel::arma(poly.ar, poly.ma);
  const Eigen::MatrixXd data = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  const auto delta = integration_weights(o.d, o.D, o.s);
  const auto lost = static_cast<std::size_t>(o.lost_to_differencing());
  std::vector<double> out(y.size(), std::numeric_limits<double>::quiet_NaN());
  detail::run_filter(ss, data, [&](Eigen::Index t, const Eigen::RowVectorXd&, double,
                                   const Eigen::RowVectorXd& pred) {
    const std::size_t at = static_cast<std::size_t>(t) + lost;
    double uhat = pred(0);
    for (std::size_t i = 0; i < delta.size(); ++i) uhat += delta[i] * u[at - 1 - i];
    out[at] = y[at] - u[at] + uhat;
  });
  return out;
}

}  // namespace aethercast
