#include "sasa/cutlevel.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include <Eigen/Eigenvalues>

#include "sasa/logistic.hpp"
#include "sasa/rng.hpp"
#include "text.hpp"

namespace sasa {

namespace {

// Ridge logistic problem over fixed rows. When there are more penalized
// columns than rows, the penalized block D is replaced by R with D = R V^T
// (V orthonormal columns); the ridge solution lies in span(V), so fitting
// theta on R and mapping beta = V theta is exact.
class RidgeProblem {
 public:
  RidgeProblem(const Eigen::MatrixXd& d, const Eigen::MatrixXd& cov, const Eigen::VectorXd& y)
      : d_(d), y_(y), unpenalized_(1 + cov.cols()) {
    const Eigen::Index n = d.rows();
    reduced_ = d.cols() > n;
    Eigen::MatrixXd penalized_block;
    if (reduced_) {
      Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
      k.selfadjointView<Eigen::Lower>().rankUpdate(d);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k.selfadjointView<Eigen::Lower>());
      const Eigen::VectorXd& ev = eig.eigenvalues();
      const double cutoff = 1e-11 * std::max(ev.maxCoeff(), 0.0);
      std::vector<Eigen::Index> keep;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (ev[i] > cutoff) keep.push_back(i);
      }
      const auto r = static_cast<Eigen::Index>(keep.size());
      penalized_block.resize(n, r);
      Eigen::MatrixXd u(n, r);
      Eigen::VectorXd root(r);
      for (Eigen::Index c = 0; c < r; ++c) {
        u.col(c) = eig.eigenvectors().col(keep[static_cast<std::size_t>(c)]);
        root[c] = std::sqrt(ev[keep[static_cast<std::size_t>(c)]]);
        penalized_block.col(c) = u.col(c) * root[c];
      }
      v_ = (d.transpose() * u) * root.cwiseInverse().asDiagonal();
    } else {
      penalized_block = d;
    }
    design_.resize(n, unpenalized_ + penalized_block.cols());
    design_.col(0).setOnes();
    if (cov.cols() > 0) design_.middleCols(1, cov.cols()) = cov;
    design_.rightCols(penalized_block.cols()) = penalized_block;
  }

  Eigen::Index dimension() const { return design_.cols(); }
  bool reduced() const { return reduced_; }

  LogisticFit fit(double lambda, const RidgeOptions& opts, const Eigen::VectorXd& start) const {
    if (lambda < 0) throw Error("ridge penalty must be non-negative");
    if (reduced_ && lambda == 0) {
      throw Error("unpenalized fit is underdetermined: " + std::to_string(d_.cols()) +
                  " predictors for " + std::to_string(d_.rows()) + " rows");
    }
    Eigen::VectorXd penalty = Eigen::VectorXd::Constant(design_.cols(), lambda);
    penalty.head(unpenalized_).setZero();
    LogisticOptions lo;
    lo.max_iter = opts.max_iter;
    // |V g|_inf <= |g|_2 <= sqrt(r) |g|_inf, so this target implies the
    // beta-space tolerance; the certificate below is what decides.
    lo.grad_tol = reduced_ ? opts.grad_tol / std::sqrt(static_cast<double>(design_.cols()))
                           : opts.grad_tol;
    LogisticFit f = fit_logistic(design_, y_, penalty, lo, start);
    f.grad_max = certificate(f, lambda);
    f.converged = f.grad_max <= opts.grad_tol;
    return f;
  }

  Eigen::VectorXd beta(const LogisticFit& f) const {
    const Eigen::Index r = design_.cols() - unpenalized_;
    return reduced_ ? Eigen::VectorXd(v_ * f.coef.tail(r)) : Eigen::VectorXd(f.coef.tail(r));
  }

  /// Gradient max-norm of the original (unreduced) penalized objective.
  double certificate(const LogisticFit& f, double lambda) const {
    Eigen::VectorXd resid(f.eta.size());
    for (Eigen::Index i = 0; i < resid.size(); ++i) resid[i] = y_[i] - inverse_logit(f.eta[i]);
    const Eigen::VectorXd b = beta(f);
    double g = (design_.leftCols(unpenalized_).transpose() * resid).cwiseAbs().maxCoeff();
    if (b.size() > 0) {
      g = std::max(g, (d_.transpose() * resid - lambda * b).cwiseAbs().maxCoeff());
    }
    return g;
  }

  /// Linear predictor for new rows.
  Eigen::VectorXd predict_eta(const LogisticFit& f, const Eigen::MatrixXd& d,
                              const Eigen::MatrixXd& cov) const {
    Eigen::VectorXd eta = Eigen::VectorXd::Constant(d.rows(), f.coef[0]);
    if (cov.cols() > 0) eta += cov * f.coef.segment(1, cov.cols());
    if (d.cols() > 0) eta += d * beta(f);
    return eta;
  }

 private:
  const Eigen::MatrixXd& d_;
  Eigen::VectorXd y_;
  Eigen::Index unpenalized_;
  bool reduced_ = false;
  Eigen::MatrixXd design_;
  Eigen::MatrixXd v_;
};

Eigen::MatrixXd informative_block(const AggregatedMatrix& d, const std::vector<std::size_t>& cols,
                                  std::span<const std::size_t> rows = {}) {
  const bool all_rows = rows.empty();
  const auto n = static_cast<Eigen::Index>(all_rows ? d.n() : rows.size());
  Eigen::MatrixXd out(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const auto src = static_cast<Eigen::Index>(cols[c]);
    if (all_rows) {
      out.col(static_cast<Eigen::Index>(c)) = d.values.col(src);
    } else {
      for (Eigen::Index i = 0; i < n; ++i) {
        out(i, static_cast<Eigen::Index>(c)) =
            d.values(static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)]), src);
      }
    }
  }
  return out;
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& m, std::span<const std::size_t> rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

RidgeFit to_ridge_fit(const RidgeProblem& prob, const LogisticFit& f, double lambda,
                      std::size_t g, const std::vector<std::size_t>& cols, Eigen::Index n_cov) {
  RidgeFit out;
  out.lambda = lambda;
  out.intercept = f.coef[0];
  out.covariate_coefs = f.coef.segment(1, n_cov);
  out.coefs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g));
  const Eigen::VectorXd b = prob.beta(f);
  for (std::size_t c = 0; c < cols.size(); ++c) {
    out.coefs[static_cast<Eigen::Index>(cols[c])] = b[static_cast<Eigen::Index>(c)];
  }
  out.grad_max = f.grad_max;
  out.iterations = f.iterations;
  out.objective_trace = f.objective_trace;
  return out;
}

}  // namespace

RidgeFit ridge_logistic_fit(const AggregatedMatrix& d, const Phenotype& y,
                            const CovariateMatrix& cov, double lambda, const RidgeOptions& opts) {
  if (y.size() != d.n() || cov.rows() != d.n()) {
    throw Error("ridge fit: rows of aggregated matrix, phenotype and covariates differ");
  }
  const auto cols = d.informative_columns();
  const Eigen::MatrixXd block = informative_block(d, cols);
  const RidgeProblem prob(block, cov.values, y.as_vector());
  const LogisticFit f = prob.fit(lambda, opts, {});
  if (!f.converged) {
    throw ConvergenceError("ridge logistic fit did not converge in " +
                               std::to_string(opts.max_iter) +
                               " iterations (gradient max-norm " +
                               detail::format_double(f.grad_max) + ")",
                           f.grad_max);
  }
  return to_ridge_fit(prob, f, lambda, d.g(), cols, cov.values.cols());
}

Eigen::VectorXd predict_prob(const RidgeFit& fit, const AggregatedMatrix& d,
                             const CovariateMatrix& cov) {
  if (static_cast<std::size_t>(fit.coefs.size()) != d.g() ||
      fit.covariate_coefs.size() != cov.values.cols() || cov.rows() != d.n()) {
    throw Error("predict: fit has " + std::to_string(fit.coefs.size()) + " coefficients and " +
                std::to_string(fit.covariate_coefs.size()) + " covariates; data has " +
                std::to_string(d.g()) + " and " + std::to_string(cov.values.cols()));
  }
  Eigen::VectorXd eta = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(d.n()), fit.intercept);
  if (cov.values.cols() > 0) eta += cov.values * fit.covariate_coefs;
  if (d.g() > 0) eta += d.values * fit.coefs;
  return eta.unaryExpr([](double e) { return inverse_logit(e); });
}

double auc_roc(const Phenotype& y, std::span<const double> scores) {
  if (scores.size() != y.size()) throw Error("AUC: score and phenotype lengths differ");
  const double cases = static_cast<double>(y.cases());
  const double controls = static_cast<double>(y.controls());
  if (cases == 0 || controls == 0) throw Error("AUC needs both cases and controls");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Sum of case midranks (1-based); every quantity is an exact half-integer.
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (y.values[order[k]] == 1) rank_sum += midrank;
    }
    i = j + 1;
  }
  return (rank_sum - cases * (cases + 1.0) / 2.0) / (cases * controls);
}

Split split_train_test(const Phenotype& y, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw Error("split fraction must lie in (0, 1)");
  Split s;
  s.seed = seed;
  Rng rng(seed);
  for (int cls : {0, 1}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y.values[i] == cls) idx.push_back(i);
    }
    if (idx.size() < 2) {
      throw Error("train/test split needs at least 2 " +
                  std::string(cls ? "cases" : "controls") + ", found " +
                  std::to_string(idx.size()));
    }
    rng.shuffle(std::span<std::size_t>(idx));
    auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(idx.size())));
    n_train = std::clamp<std::size_t>(n_train, 1, idx.size() - 1);
    s.train.insert(s.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.test.insert(s.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

std::vector<std::size_t> stratified_folds(const Phenotype& y, std::size_t folds,
                                          std::uint64_t seed) {
  if (folds < 2) throw Error("cross-validation needs at least 2 folds");
  std::vector<std::size_t> fold(y.size());
  Rng rng(seed);
  std::size_t offset = 0;
  for (int cls : {0, 1}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y.values[i] == cls) idx.push_back(i);
    }
    rng.shuffle(std::span<std::size_t>(idx));
    for (std::size_t k = 0; k < idx.size(); ++k) fold[idx[k]] = (offset + k) % folds;
    offset += idx.size();
  }
  return fold;
}

std::vector<std::size_t> default_grid(std::size_t p, std::size_t chromosomes, std::size_t count) {
  const std::size_t lo = std::min(p, std::max<std::size_t>(chromosomes, 50));
  std::vector<std::size_t> grid;
  if (p == 0) return grid;
  if (lo == p) return {p};
  if (count < 2) return {lo, p};
  const double ratio = std::log(static_cast<double>(p) / static_cast<double>(lo));
  for (std::size_t k = 0; k < count; ++k) {
    const double v = static_cast<double>(lo) *
                     std::exp(ratio * static_cast<double>(k) / static_cast<double>(count - 1));
    grid.push_back(std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(v)), lo, p));
  }
  grid.back() = p;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

namespace {

struct LevelData {
  AggregatedMatrix train;
  AggregatedMatrix test;
};

// Inner cross-validated AUC for each lambda on the training rows. Lambdas are
// visited from largest to smallest with warm starts. Failed fits score NaN.
std::vector<double> inner_cv_auc(const Eigen::MatrixXd& block, const CovariateMatrix& cov,
                                 const Phenotype& y, const std::vector<double>& lambdas,
                                 std::size_t folds, std::uint64_t seed) {
  const std::size_t k = std::min<std::size_t>(folds, std::min(y.cases(), y.controls()));
  std::vector<double> sum(lambdas.size(), 0.0);
  std::vector<std::size_t> count(lambdas.size(), 0);
  if (k < 2) return std::vector<double>(lambdas.size(), std::nan(""));
  const auto fold = stratified_folds(y, k, seed);
  std::vector<std::size_t> order(lambdas.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return lambdas[a] > lambdas[b]; });
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<std::size_t> fit_rows, held_rows;
    for (std::size_t i = 0; i < fold.size(); ++i) (fold[i] == f ? held_rows : fit_rows).push_back(i);
    const Phenotype y_fit = y.subset(fit_rows);
    const Phenotype y_held = y.subset(held_rows);
    if (!y_fit.both_classes() || !y_held.both_classes()) continue;
    const Eigen::MatrixXd d_fit = select_rows(block, fit_rows);
    const Eigen::MatrixXd d_held = select_rows(block, held_rows);
    const Eigen::MatrixXd c_fit = select_rows(cov.values, fit_rows);
    const Eigen::MatrixXd c_held = select_rows(cov.values, held_rows);
    const RidgeProblem prob(d_fit, c_fit, y_fit.as_vector());
    Eigen::VectorXd warm;
    for (auto li : order) {
      if (prob.reduced() && lambdas[li] == 0) continue;
      const LogisticFit fit = prob.fit(lambdas[li], {}, warm);
      if (!fit.converged) continue;
      warm = fit.coef;
      const Eigen::VectorXd eta = prob.predict_eta(fit, d_held, c_held);
      sum[li] += auc_roc(y_held, std::span<const double>(eta.data(), static_cast<std::size_t>(eta.size())));
      ++count[li];
    }
  }
  std::vector<double> out(lambdas.size());
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    out[i] = count[i] == k ? sum[i] / static_cast<double>(k) : std::nan("");
  }
  return out;
}

}  // namespace

CutLevelRun select_cut_level(const GenotypeMatrix& g, const Phenotype& y,
                             const CovariateMatrix& cov, const CutLevelOptions& opts) {
  if (y.size() != g.n() || cov.rows() != g.n()) {
    throw Error("cut-level selection: genotype, phenotype and covariate row counts differ");
  }
  if (!y.both_classes()) throw Error("cut-level selection needs both cases and controls");
  if (opts.lambdas.empty()) throw Error("cut-level selection needs at least one ridge penalty");

  CutLevelRun run;
  auto& result = run.result;
  result.split = split_train_test(y, opts.split_fraction, opts.seed);
  const auto& train = result.split.train;
  const auto& test = result.split.test;

  const GenotypeMatrix g_train = g.subset_rows(train);
  const GenotypeMatrix g_test = g.subset_rows(test);
  const Phenotype y_train = y.subset(train);
  const Phenotype y_test = y.subset(test);
  const CovariateMatrix c_train = cov.subset(train);
  const CovariateMatrix c_test = cov.subset(test);

  const auto barriers = g.chromosome_barriers();
  const LdDissimilarity d =
      ld_band(g_train, opts.bandwidth, ConstantColumnPolicy::max_dissimilarity);
  run.hierarchy = build(d, barriers);

  std::vector<std::size_t> grid = opts.grid.empty()
                                      ? default_grid(g.p(), g.chromosome_count())
                                      : opts.grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  for (auto level : grid) {
    if (level < run.hierarchy.trees() || level > g.p()) {
      throw Error("cut level " + std::to_string(level) + " outside [" +
                  std::to_string(run.hierarchy.trees()) + ", " + std::to_string(g.p()) + "]");
    }
  }

  result.candidates.resize(grid.size());
  const std::uint64_t cv_seed = derive_seed(opts.seed, 1);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t li = 0; li < static_cast<std::ptrdiff_t>(grid.size()); ++li) {
    try {
      const std::size_t level = grid[static_cast<std::size_t>(li)];
      const ClusterAssignment a = cut(run.hierarchy, level);
      const AggregatedMatrix d_train = standardize(aggregate_raw(g_train, a));
      const AggregatedMatrix d_test = standardize_like(aggregate_raw(g_test, a), d_train);
      const auto cols = d_train.informative_columns();
      const Eigen::MatrixXd block = informative_block(d_train, cols);

      LevelScore score;
      score.g = level;
      score.lambda = opts.lambdas.front();
      score.inner_auc = std::nan("");
      if (opts.lambdas.size() > 1) {
        const auto cv = inner_cv_auc(block, c_train, y_train, opts.lambdas, opts.inner_folds, cv_seed);
        // Highest inner AUC; ties go to the larger penalty.
        for (std::size_t k = 0; k < cv.size(); ++k) {
          if (std::isnan(cv[k])) continue;
          if (std::isnan(score.inner_auc) || cv[k] > score.inner_auc ||
              (cv[k] == score.inner_auc && opts.lambdas[k] > score.lambda)) {
            score.inner_auc = cv[k];
            score.lambda = opts.lambdas[k];
          }
        }
        if (std::isnan(score.inner_auc)) {
          score.lambda = *std::max_element(opts.lambdas.begin(), opts.lambdas.end());
        }
      }
      const RidgeProblem prob(block, c_train.values, y_train.as_vector());
      const LogisticFit fit = prob.fit(score.lambda, {}, {});
      if (!fit.converged) {
        throw ConvergenceError("ridge fit at cut level " + std::to_string(level) +
                                   " did not converge (gradient max-norm " +
                                   detail::format_double(fit.grad_max) + ")",
                               fit.grad_max);
      }
      const Eigen::VectorXd eta =
          prob.predict_eta(fit, informative_block(d_test, cols), c_test.values);
      score.auc = auc_roc(y_test, std::span<const double>(eta.data(), static_cast<std::size_t>(eta.size())));
      result.candidates[static_cast<std::size_t>(li)] = score;
    } catch (...) {
#pragma omp critical(sasa_cutlevel_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  const auto best = std::max_element(
      result.candidates.begin(), result.candidates.end(),
      [](const LevelScore& a, const LevelScore& b) {
        // Strictly greater AUC wins; equal AUC keeps the earlier (smaller G).
        return a.auc < b.auc;
      });
  result.best_level = best->g;
  run.best = standardize(aggregate_raw(g, cut(run.hierarchy, result.best_level)));
  return run;
}

void write_auc_curve(std::ostream& out, const CutLevelResult& r) {
  out << "G\tauc\n";
  for (const auto& c : r.candidates) out << c.g << '\t' << detail::format_double(c.auc) << '\n';
}

}  // namespace sasa
