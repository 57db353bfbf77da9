#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "../oracles.hpp"
#include "fixtures.hpp"
#include "sasa/cutlevel.hpp"
#include "sasa/logistic.hpp"
#include "sasa/simulate.hpp"

using namespace sasa;

namespace {

AggregatedMatrix wrap(const Eigen::MatrixXd& v) {
  AggregatedMatrix d;
  d.values = v;
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    d.spans.emplace_back(static_cast<std::size_t>(c), static_cast<std::size_t>(c));
  }
  d.degenerate.assign(static_cast<std::size_t>(v.cols()), false);
  return d;
}

Eigen::MatrixXd gaussian(Eigen::Index n, Eigen::Index g, Rng& rng) {
  Eigen::MatrixXd m(n, g);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index c = 0; c < g; ++c) m(i, c) = rng.normal();
  return m;
}

// Gradient max-norm of the penalized log-likelihood at a ridge solution.
double penalized_gradient(const RidgeFit& f, const Eigen::MatrixXd& x, const Phenotype& y) {
  const Eigen::VectorXd eta = (x * f.coefs).array() + f.intercept;
  Eigen::VectorXd r(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) r[i] = y.values[static_cast<std::size_t>(i)] - 1 / (1 + std::exp(-eta[i]));
  const Eigen::VectorXd g = x.transpose() * r - f.lambda * f.coefs;
  return std::max(std::abs(r.sum()), g.cwiseAbs().maxCoeff());
}

Eigen::VectorXd oracle_ridge(const Eigen::MatrixXd& x, const Phenotype& y, double lambda) {
  Eigen::MatrixXd design(x.rows(), x.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(x.cols()) = x;
  Eigen::VectorXd pen = Eigen::VectorXd::Constant(design.cols(), lambda);
  pen[0] = 0;
  return oracle::logistic_coordinate_ascent(design, y.as_vector(), pen);
}

}  // namespace

TEST(Ridge, ZeroColumnsBalancedResponse) {
  const auto fit = ridge_logistic_fit(wrap(Eigen::MatrixXd::Zero(6, 2)), Phenotype({1, 0, 1, 0, 1, 0}),
                                      CovariateMatrix::empty(6), 1.0);
  EXPECT_NEAR(fit.intercept, 0.0, 1e-12);
  EXPECT_NEAR(fit.coefs.norm(), 0.0, 1e-12);
}

TEST(Ridge, HugePenaltyShrinksToZero) {
  Rng rng(1);
  const auto x = gaussian(40, 5, rng);
  const auto y = fixture::balanced_phenotype(40, 2);
  const auto fit = ridge_logistic_fit(wrap(x), y, CovariateMatrix::empty(40), 1e8);
  EXPECT_LE(fit.coefs.norm(), 1e-3);
}

TEST(Ridge, SmallInstanceMatchesOracle) {
  Rng rng(8);
  const auto x = gaussian(8, 2, rng);
  const Phenotype y({1, 0, 0, 1, 1, 0, 1, 0});
  const auto fit = ridge_logistic_fit(wrap(x), y, CovariateMatrix::empty(8), 1.0);
  const auto ref = oracle_ridge(x, y, 1.0);
  EXPECT_NEAR(fit.intercept, ref[0], 1e-4);
  for (Eigen::Index k = 0; k < 2; ++k) EXPECT_NEAR(fit.coefs[k], ref[k + 1], 1e-4);
  EXPECT_LE(penalized_gradient(fit, x, y), 1e-6);
}

TEST(Ridge, WideInstanceMatchesOracle) {
  // More columns than rows exercises the reduced solver.
  Rng rng(21);
  const auto x = gaussian(12, 30, rng);
  const auto y = fixture::balanced_phenotype(12, 5);
  for (double lambda : {0.1, 1.0, 10.0}) {
    const auto fit = ridge_logistic_fit(wrap(x), y, CovariateMatrix::empty(12), lambda);
    const auto ref = oracle_ridge(x, y, lambda);
    EXPECT_NEAR(fit.intercept, ref[0], 1e-4);
    for (Eigen::Index k = 0; k < 30; ++k) EXPECT_NEAR(fit.coefs[k], ref[k + 1], 1e-4);
    EXPECT_LE(penalized_gradient(fit, x, y), 1e-6);
  }
}

TEST(Ridge, ObjectiveNeverDecreases) {
  Rng rng(4);
  const auto x = gaussian(50, 6, rng);
  const auto y = fixture::balanced_phenotype(50, 9);
  const auto fit = ridge_logistic_fit(wrap(x), y, CovariateMatrix::empty(50), 0.01);
  ASSERT_GE(fit.objective_trace.size(), 2u);
  for (std::size_t k = 1; k < fit.objective_trace.size(); ++k)
    EXPECT_GE(fit.objective_trace[k],
              fit.objective_trace[k - 1] - 1e-12 * (1 + std::abs(fit.objective_trace[k - 1])));
}

TEST(Ridge, DegenerateColumnsGetZeroCoefficients) {
  Rng rng(6);
  auto d = wrap(gaussian(20, 3, rng));
  d.values.col(1).setZero();
  d.degenerate[1] = true;
  const auto fit = ridge_logistic_fit(d, fixture::balanced_phenotype(20, 1), CovariateMatrix::empty(20), 1.0);
  EXPECT_EQ(fit.coefs.size(), 3);
  EXPECT_EQ(fit.coefs[1], 0.0);
}

TEST(Ridge, NonConvergenceReportsGradient) {
  Rng rng(3);
  const auto x = gaussian(30, 2, rng);
  RidgeOptions opts;
  opts.max_iter = 0;
  try {
    ridge_logistic_fit(wrap(x), fixture::balanced_phenotype(30, 2), CovariateMatrix::empty(30), 1.0, opts);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_GT(e.grad_max, 1e-6);
  }
}

TEST(PredictProb, Examples) {
  RidgeFit f;
  f.coefs = Eigen::VectorXd::Zero(2);
  f.covariate_coefs = Eigen::VectorXd(0);
  const auto d = wrap(Eigen::MatrixXd::Ones(3, 2));
  EXPECT_NEAR(predict_prob(f, d, CovariateMatrix::empty(3))[0], 0.5, 1e-15);
  f.intercept = std::log(3.0);
  EXPECT_NEAR(predict_prob(f, d, CovariateMatrix::empty(3))[1], 0.75, 1e-15);
  f.intercept = 0.5;
  f.coefs << 0.25, 0.25;
  EXPECT_NEAR(predict_prob(f, d, CovariateMatrix::empty(3))[2], 0.7310586, 1e-7);
  EXPECT_THROW(predict_prob(f, wrap(Eigen::MatrixXd::Ones(3, 3)), CovariateMatrix::empty(3)), Error);
}

TEST(Auc, Examples) {
  const Phenotype y({1, 0, 1, 0});
  const std::vector<double> sep{1, 0, 1, 0}, flat{2, 2, 2, 2}, mixed{0.9, 0.8, 0.7, 0.1};
  EXPECT_EQ(auc_roc(y, sep), 1.0);
  EXPECT_EQ(auc_roc(y, flat), 0.5);
  EXPECT_EQ(auc_roc(y, mixed), 0.75);
  EXPECT_THROW(auc_roc(Phenotype({1, 1}), std::vector<double>{0.1, 0.2}), Error);
}

TEST(Auc, MatchesPairCountingWithTies) {
  Rng rng(99);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 2 + rng.below(60);
    std::vector<int> y(n);
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<int>(rng.below(2));
      s[i] = static_cast<double>(rng.below(6));
    }
    y[0] = 1;
    y[1] = 0;
    EXPECT_EQ(auc_roc(Phenotype(y), s), oracle::auc_pairs(y, s));
  }
}

TEST(Auc, MonotoneTransformAndReflection) {
  Rng rng(5);
  const auto y = fixture::balanced_phenotype(40, 3);
  std::vector<double> s(40), t(40), neg(40);
  for (std::size_t i = 0; i < 40; ++i) {
    s[i] = rng.normal();
    t[i] = std::exp(3 * s[i]) + 7;
    neg[i] = -s[i];
  }
  EXPECT_EQ(auc_roc(y, s), auc_roc(y, t));
  EXPECT_NEAR(auc_roc(y, s) + auc_roc(y, neg), 1.0, 1e-15);
}

TEST(Split, StratifiedAndDeterministic) {
  const auto y = fixture::balanced_phenotype(100, 4);
  const auto a = split_train_test(y, 2.0 / 3.0, 17);
  const auto b = split_train_test(y, 2.0 / 3.0, 17);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  EXPECT_EQ(a.train.size() + a.test.size(), 100u);
  const auto train_cases = y.subset(a.train).cases();
  EXPECT_TRUE(train_cases == 33 || train_cases == 34);
  const auto train_controls = a.train.size() - train_cases;
  EXPECT_TRUE(train_controls == 33 || train_controls == 34);
  EXPECT_THROW(split_train_test(Phenotype({1, 1, 1, 1}), 0.5, 1), Error);
}

TEST(DefaultGrid, GeometricDeduplicatedAndBounded) {
  const auto g = default_grid(5000, 1);
  EXPECT_EQ(g.front(), 50u);
  EXPECT_EQ(g.back(), 5000u);
  EXPECT_LE(g.size(), 20u);
  for (std::size_t k = 1; k < g.size(); ++k) EXPECT_GT(g[k], g[k - 1]);
  EXPECT_EQ(default_grid(30, 1), std::vector<std::size_t>{30});
}

TEST(SelectCutLevel, SingleLevelGridReturnsStandardizedGenotypes) {
  const auto g = fixture::random_matrix(60, 12, 2);
  const auto y = fixture::balanced_phenotype(60, 3);
  CutLevelOptions opts;
  opts.grid = {12};
  opts.lambdas = {1.0};
  const auto run = select_cut_level(g, y, CovariateMatrix::empty(60), opts);
  EXPECT_EQ(run.result.best_level, 12u);
  const Eigen::MatrixXd z = standardized_genotypes(g);
  EXPECT_LE((run.best.values - z).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SelectCutLevel, DeterministicAndLeakFree) {
  const auto g = fixture::random_matrix(80, 40, 5);
  const auto y = fixture::balanced_phenotype(80, 6);
  CutLevelOptions opts;
  opts.grid = {5, 10, 20, 40};
  opts.lambdas = {0.1, 10.0};
  opts.inner_folds = 3;
  const auto a = select_cut_level(g, y, CovariateMatrix::empty(80), opts);
  const auto b = select_cut_level(g, y, CovariateMatrix::empty(80), opts);
  ASSERT_EQ(a.result.candidates.size(), 4u);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(a.result.candidates[k].auc, b.result.candidates[k].auc);
    EXPECT_EQ(a.result.candidates[k].lambda, b.result.candidates[k].lambda);
  }
  EXPECT_EQ(a.result.best_level, b.result.best_level);

  // Best level is the first AUC maximum.
  double best = -1;
  std::size_t level = 0;
  for (const auto& c : a.result.candidates) {
    if (c.auc > best) {
      best = c.auc;
      level = c.g;
    }
  }
  EXPECT_EQ(a.result.best_level, level);

  // Replace the test rows with noise: the hierarchy must not change.
  std::vector<std::int8_t> v = g.values();
  Rng rng(1);
  for (auto i : a.result.split.test)
    for (std::size_t j = 0; j < g.p(); ++j) v[j * g.n() + i] = static_cast<std::int8_t>(rng.below(3));
  const GenotypeMatrix noisy(g.n(), g.snps(), v);
  const auto c = select_cut_level(noisy, y, CovariateMatrix::empty(80), opts);
  ASSERT_EQ(c.hierarchy.merges.size(), a.hierarchy.merges.size());
  for (std::size_t k = 0; k < a.hierarchy.merges.size(); ++k) {
    EXPECT_EQ(c.hierarchy.merges[k].left, a.hierarchy.merges[k].left);
    EXPECT_EQ(c.hierarchy.merges[k].height, a.hierarchy.merges[k].height);
  }
  std::ostringstream out;
  write_auc_curve(out, a.result);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "G\tauc");
}

TEST(SelectCutLevel, GridOutsideRangeIsAnError) {
  const auto g = fixture::random_matrix(30, 10, 1, {5});
  CutLevelOptions opts;
  opts.grid = {1};
  EXPECT_THROW(select_cut_level(g, fixture::balanced_phenotype(30, 1), CovariateMatrix::empty(30), opts), Error);
}

TEST(SelectCutLevel, AggregationHelpsOnClusteredSignal) {
  double block_scale = 0, singleton = 0;
  constexpr int kReps = 20;
  for (int rep = 0; rep < kReps; ++rep) {
    SimConfig cfg;
    cfg.n = 300;
    cfg.p = 200;
    cfg.replicates = 1;
    cfg.chip_fraction = 1.0;
    cfg.target_mse = 0.1;
    cfg.seed = 100 + static_cast<std::uint64_t>(rep);
    const auto study = simulate_study(cfg);
    CutLevelOptions opts;
    opts.grid = {10, 200};
    opts.seed = cfg.seed;
    opts.lambdas = {0.1, 1.0, 10.0, 100.0};
    opts.inner_folds = 3;
    const auto chip = drop_monomorphic(study.chip.genotypes).matrix;
    if (chip.p() != 200) opts.grid = {10, chip.p()};
    const auto run = select_cut_level(chip, study.replicates[0].phenotype, CovariateMatrix::empty(cfg.n), opts);
    block_scale += run.result.candidates[0].auc;
    singleton += run.result.candidates[1].auc;
  }
  EXPECT_GE(block_scale / kReps, singleton / kReps);
}
