#include "sasa/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sasa/error.hpp"

namespace sasa {

double inverse_logit(double eta) {
  if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

namespace {

// log(1 + exp(eta)) without overflow.
double softplus(double eta) {
  return eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

double penalized(double loglik, const Eigen::VectorXd& coef, const Eigen::VectorXd& penalty) {
  return loglik - 0.5 * (penalty.array() * coef.array().square()).sum();
}

}  // namespace

double bernoulli_loglik(const Eigen::VectorXd& eta, const Eigen::VectorXd& y) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) acc += y[i] * eta[i] - softplus(eta[i]);
  return acc;
}

LogisticFit fit_logistic(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                         const Eigen::VectorXd& penalty, const LogisticOptions& opts,
                         const Eigen::VectorXd& start) {
  const Eigen::Index n = design.rows();
  const Eigen::Index q = design.cols();
  if (y.size() != n) throw Error("logistic fit: response length does not match design rows");
  if (penalty.size() != q) throw Error("logistic fit: penalty length does not match design columns");

  LogisticFit fit;
  fit.coef = start.size() == q ? start : Eigen::VectorXd::Zero(q);
  fit.eta = design * fit.coef;
  fit.loglik = bernoulli_loglik(fit.eta, y);
  fit.objective = penalized(fit.loglik, fit.coef, penalty);
  fit.objective_trace.push_back(fit.objective);

  Eigen::VectorXd prob(n), w(n);
  Eigen::MatrixXd weighted(n, q);
  for (;;) {
    for (Eigen::Index i = 0; i < n; ++i) {
      prob[i] = inverse_logit(fit.eta[i]);
      w[i] = prob[i] * (1.0 - prob[i]);
    }
    const Eigen::VectorXd grad =
        design.transpose() * (y - prob) - (penalty.array() * fit.coef.array()).matrix();
    fit.grad_max = q > 0 ? grad.cwiseAbs().maxCoeff() : 0.0;
    if (fit.grad_max <= opts.grad_tol) {
      fit.converged = true;
      break;
    }
    if (fit.iterations >= opts.max_iter) break;
    ++fit.iterations;

    weighted = design.array().colwise() * w.array().sqrt();
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(q, q);
    hess.selfadjointView<Eigen::Lower>().rankUpdate(weighted.transpose());
    hess.diagonal() += penalty;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hess.selfadjointView<Eigen::Lower>());
    Eigen::VectorXd step = ldlt.solve(grad);
    if (ldlt.info() != Eigen::Success || !step.allFinite()) {
      // Saturated weights leave the Hessian singular; nudge it.
      const double jitter = 1e-8 * std::max(1.0, hess.diagonal().cwiseAbs().maxCoeff());
      hess.diagonal().array() += jitter;
      step = hess.selfadjointView<Eigen::Lower>().ldlt().solve(grad);
      if (!step.allFinite()) break;
    }

    // Once the predicted gain is at rounding level the objective can no longer
    // rank steps; the full Newton step is taken if it loses no more than that.
    const double noise = 1e-12 * (1.0 + std::abs(fit.objective));
    const bool quadratic = grad.dot(step) <= noise;
    bool accepted = false;
    for (int halving = 0; halving < 40; ++halving) {
      Eigen::VectorXd coef = fit.coef + step;
      Eigen::VectorXd eta = design * coef;
      const double ll = bernoulli_loglik(eta, y);
      const double obj = penalized(ll, coef, penalty);
      const bool ascent = obj >= fit.objective || (quadratic && halving == 0 && obj >= fit.objective - noise);
      if (std::isfinite(obj) && ascent) {
        fit.coef = std::move(coef);
        fit.eta = std::move(eta);
        fit.loglik = ll;
        fit.objective = obj;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no ascent left at working precision
    fit.objective_trace.push_back(fit.objective);
  }
  return fit;
}

}  // namespace sasa
