#pragma once

#include <vector>

#include <Eigen/Dense>

namespace sasa {

struct LogisticOptions {
  int max_iter = 100;
  double grad_tol = 1e-6;  // on the max-norm of the objective gradient
};

/// Maximizer of  sum_i [y_i eta_i - log(1 + exp(eta_i))] - 1/2 sum_k penalty_k coef_k^2
/// with eta = design * coef.
struct LogisticFit {
  Eigen::VectorXd coef;
  Eigen::VectorXd eta;
  double loglik = 0.0;
  double objective = 0.0;
  double grad_max = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_trace;  // objective after each accepted step, starting value first
};

/// Newton-Raphson (iteratively reweighted least squares) with step halving,
/// so the objective never decreases between iterations by more than
/// rounding (1e-12 relative) once Newton steps are in the quadratic regime.
LogisticFit fit_logistic(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                         const Eigen::VectorXd& penalty, const LogisticOptions& opts = {},
                         const Eigen::VectorXd& start = Eigen::VectorXd());

double inverse_logit(double eta);

/// Bernoulli log-likelihood of y under linear predictor eta.
double bernoulli_loglik(const Eigen::VectorXd& eta, const Eigen::VectorXd& y);

}  // namespace sasa
