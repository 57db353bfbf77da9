#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sasa/aggregate.hpp"
#include "sasa/chac.hpp"
#include "sasa/error.hpp"
#include "sasa/genotype.hpp"

namespace sasa {

struct RidgeOptions {
  int max_iter = 100;
  double grad_tol = 1e-6;
};

/// Ridge-penalized logistic regression. Intercept and covariates are
/// unpenalized; `coefs` has one entry per aggregated column, zero for
/// degenerate columns (which are excluded from the fit).
struct RidgeFit {
  double intercept = 0.0;
  Eigen::VectorXd covariate_coefs;
  Eigen::VectorXd coefs;
  double lambda = 0.0;
  double grad_max = 0.0;  // max-norm of the penalized log-likelihood gradient
  int iterations = 0;
  std::vector<double> objective_trace;
};

/// Thrown when the solver exhausts its iterations.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double grad) : Error(what), grad_max(grad) {}
  double grad_max;
};

RidgeFit ridge_logistic_fit(const AggregatedMatrix& d, const Phenotype& y,
                            const CovariateMatrix& cov, double lambda,
                            const RidgeOptions& opts = {});

/// Fitted case probabilities for the rows of `d`.
Eigen::VectorXd predict_prob(const RidgeFit& fit, const AggregatedMatrix& d,
                             const CovariateMatrix& cov);

/// Mann-Whitney AUC: (concordant + ties / 2) / (cases * controls).
double auc_roc(const Phenotype& y, std::span<const double> scores);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::uint64_t seed = 0;
};

/// Stratified split; each class contributes round(fraction * count) rows to
/// training (at least one row to each side).
Split split_train_test(const Phenotype& y, double fraction, std::uint64_t seed);

/// Stratified k-fold labels (fold index per row).
std::vector<std::size_t> stratified_folds(const Phenotype& y, std::size_t folds,
                                          std::uint64_t seed);

struct LevelScore {
  std::size_t g = 0;
  double auc = 0.0;
  double lambda = 0.0;
  double inner_auc = 0.0;
};

struct CutLevelResult {
  std::vector<LevelScore> candidates;
  std::size_t best_level = 0;
  Split split;
};

struct CutLevelOptions {
  std::vector<std::size_t> grid;  // empty: default_grid
  double split_fraction = 2.0 / 3.0;
  std::uint64_t seed = 1;
  std::size_t bandwidth = 500;
  std::vector<double> lambdas = {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};
  std::size_t inner_folds = 5;
};

/// About `count` geometrically spaced cluster counts from
/// max(chromosomes, 50) to P, deduplicated and ascending.
std::vector<std::size_t> default_grid(std::size_t p, std::size_t chromosomes,
                                      std::size_t count = 20);

struct CutLevelRun {
  CutLevelResult result;
  Dendrogram hierarchy;  // built on the training rows
  AggregatedMatrix best;  // full matrix aggregated at the best level, standardized
};

/// Supervised cut-level selection: hierarchy on the training rows, one ridge
/// fit per level (lambda by inner cross-validation), held-out AUC, and the
/// full matrix aggregated at the AUC-maximizing level (smallest G on ties).
CutLevelRun select_cut_level(const GenotypeMatrix& g, const Phenotype& y,
                             const CovariateMatrix& cov, const CutLevelOptions& opts);

/// TSV `G  auc` with a header line.
void write_auc_curve(std::ostream& out, const CutLevelResult& r);

}  // namespace sasa
