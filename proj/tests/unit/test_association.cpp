#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "../oracles.hpp"
#include "fixtures.hpp"
#include "sasa/association.hpp"
#include "sasa/error.hpp"

using namespace sasa;

namespace {

double loglik(const Eigen::MatrixXd& design, const Eigen::VectorXd& coef, const Eigen::VectorXd& y) {
  const Eigen::VectorXd eta = design * coef;
  double v = 0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) v += y[i] * eta[i] - std::log1p(std::exp(eta[i]));
  return v;
}

double oracle_lrt(const Eigen::VectorXd& x, const Phenotype& y) {
  const Eigen::VectorXd yy = y.as_vector();
  const Eigen::MatrixXd null_design = Eigen::MatrixXd::Ones(x.size(), 1);
  Eigen::MatrixXd full(x.size(), 2);
  full.col(0).setOnes();
  full.col(1) = x;
  const auto b0 = oracle::logistic_coordinate_ascent(null_design, yy, Eigen::VectorXd::Zero(1));
  const auto b1 = oracle::logistic_coordinate_ascent(full, yy, Eigen::VectorXd::Zero(2));
  return 2 * (loglik(full, b1, yy) - loglik(null_design, b0, yy));
}

AggregatedMatrix columns(const Eigen::MatrixXd& v) {
  AggregatedMatrix d;
  d.values = v;
  for (Eigen::Index c = 0; c < v.cols(); ++c) d.spans.emplace_back(c, c);
  d.degenerate.assign(static_cast<std::size_t>(v.cols()), false);
  return d;
}

}  // namespace

TEST(ChiSquare, UpperTail) {
  EXPECT_NEAR(chi_square_1df_sf(3.841458820694124), 0.05, 1e-12);
  EXPECT_EQ(chi_square_1df_sf(0.0), 1.0);
}

TEST(Lrt, SymmetricDesignGivesZero) {
  // Cases and controls split identically across x.
  const Eigen::VectorXd x = (Eigen::VectorXd(8) << 0, 1, 2, 0, 0, 1, 2, 0).finished();
  const Phenotype y({1, 1, 1, 1, 0, 0, 0, 0});
  const auto r = lrt_single(x, y, CovariateMatrix::empty(8));
  EXPECT_NEAR(r.statistic, 0.0, 1e-10);
  EXPECT_NEAR(r.p_value, 1.0, 1e-5);
}

TEST(Lrt, TwoByTwoWithoutAssociation) {
  const Eigen::VectorXd x = (Eigen::VectorXd(8) << 0, 0, 1, 1, 0, 0, 1, 1).finished();
  const auto r = lrt_single(x, Phenotype({1, 0, 1, 0, 1, 0, 1, 0}), CovariateMatrix::empty(8));
  EXPECT_NEAR(r.statistic, 0.0, 1e-10);
}

TEST(Lrt, MatchesMaximumLikelihoodOracle) {
  const Eigen::VectorXd x = (Eigen::VectorXd(12) << 0, 1, 2, 1, 0, 2, 1, 1, 0, 2, 0, 1).finished();
  const Phenotype y({0, 1, 1, 0, 0, 1, 1, 0, 1, 1, 0, 0});
  const auto r = lrt_single(x, y, CovariateMatrix::empty(12));
  EXPECT_NEAR(r.statistic, oracle_lrt(x, y), 1e-6);
  EXPECT_NEAR(r.p_value, std::erfc(std::sqrt(r.statistic / 2)), 1e-15);
}

TEST(Lrt, AffineInvariance) {
  Rng rng(4);
  Eigen::VectorXd x(50);
  for (auto& v : x) v = rng.normal();
  const auto y = fixture::balanced_phenotype(50, 8);
  const auto base = lrt_single(x, y, CovariateMatrix::empty(50));
  for (double a : {-3.0, 0.5, 10.0}) {
    const Eigen::VectorXd z = (a * x).array() + 4.0;
    EXPECT_NEAR(lrt_single(z, y, CovariateMatrix::empty(50)).statistic, base.statistic, 1e-8);
  }
}

TEST(Lrt, ConstantPredictorIsAnError) {
  EXPECT_THROW(lrt_single(Eigen::VectorXd::Ones(4), Phenotype({1, 0, 1, 0}), CovariateMatrix::empty(4)), Error);
}

TEST(Lrt, SeparationIsFlagged) {
  const Eigen::VectorXd x = (Eigen::VectorXd(6) << 0, 0, 0, 2, 2, 2).finished();
  const auto r = lrt_single(x, Phenotype({0, 0, 0, 1, 1, 1}), CovariateMatrix::empty(6));
  EXPECT_TRUE(r.separated);
  EXPECT_LT(r.p_value, 0.01);
}

TEST(Lrt, CovariatesEnterTheNullModel) {
  Rng rng(2);
  Eigen::VectorXd x(80);
  Eigen::MatrixXd c(80, 1);
  for (Eigen::Index i = 0; i < 80; ++i) {
    c(i, 0) = rng.normal();
    x[i] = c(i, 0) + 0.1 * rng.normal();
  }
  std::vector<int> y(80);
  for (Eigen::Index i = 0; i < 80; ++i) y[static_cast<std::size_t>(i)] = c(i, 0) + 0.5 * rng.normal() > 0;
  const Phenotype ph(y);
  const auto with = lrt_single(x, ph, CovariateMatrix(c, {"c"}));
  const auto without = lrt_single(x, ph, CovariateMatrix::empty(80));
  EXPECT_LT(with.statistic, without.statistic);
}

TEST(Bh, HandCase) {
  const std::vector<double> p{0.01, 0.02, 0.03, 0.5};
  const auto r = bh_fdr(p, 0.05);
  EXPECT_EQ(r.flags, (std::vector<bool>{true, true, true, false}));
  EXPECT_EQ(r.threshold, 0.03);
  const std::vector<double> ones(5, 1.0);
  EXPECT_EQ(bh_fdr(ones, 0.05).flags, std::vector<bool>(5, false));
  EXPECT_THROW(bh_fdr(std::vector<double>{}, 0.05), Error);
}

TEST(Bh, MatchesBruteForceAndIsMonotone) {
  Rng rng(7);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t m = 1 + rng.below(200);
    std::vector<double> p(m);
    for (auto& v : p) v = rng.bernoulli(0.3) ? rng.uniform() * 1e-3 : rng.uniform();
    const auto flags = bh_fdr(p, 0.05).flags;
    EXPECT_EQ(flags, oracle::bh_bruteforce(p, 0.05));
    const auto looser = bh_fdr(p, 0.1).flags;
    const auto bonf = bonferroni(p, 0.05);
    for (std::size_t i = 0; i < m; ++i) {
      if (flags[i]) EXPECT_TRUE(looser[i]);
      if (bonf[i]) EXPECT_TRUE(flags[i]);
    }
  }
}

TEST(Bonferroni, Examples) {
  EXPECT_EQ(bonferroni(std::vector<double>{0.01}, 0.05), std::vector<bool>{true});
  EXPECT_EQ(bonferroni(std::vector<double>(10, 0.01), 0.05), std::vector<bool>(10, false));
  EXPECT_THROW(bonferroni(std::vector<double>{}, 0.05), Error);
}

TEST(RunSma, FlagsStrongCausalColumn) {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = fixture::random_matrix(400, 10, seed);
    Rng rng(seed + 1000);
    std::vector<int> y(400);
    for (std::size_t i = 0; i < 400; ++i) {
      const double eta = 2.0 * (g.at(i, 3) - 0.6);
      y[i] = rng.bernoulli(1 / (1 + std::exp(-eta)));
    }
    const auto res = run_sma(g, Phenotype(y), CovariateMatrix::empty(400));
    hits += res.records[3].significant;
  }
  EXPECT_GE(hits, 19);
}

TEST(RunSasa, FlagsStrongCausalColumn) {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    Eigen::MatrixXd v(400, 10);
    for (auto& x : v.reshaped()) x = rng.normal();
    std::vector<int> y(400);
    for (Eigen::Index i = 0; i < 400; ++i) y[static_cast<std::size_t>(i)] = rng.bernoulli(1 / (1 + std::exp(-1.5 * v(i, 7))));
    std::vector<SnpMeta> snps = fixture::snps(10);
    const auto res = run_sasa(columns(v), snps, Phenotype(y), CovariateMatrix::empty(400));
    hits += res.records[7].significant;
  }
  EXPECT_GE(hits, 19);
}

TEST(RunSma, PermutedPhenotypeRarelyFlags) {
  const auto g = fixture::random_matrix(300, 40, 3);
  int clean = 0;
  for (std::uint64_t rep = 0; rep < 50; ++rep) {
    const auto res = run_sma(g, fixture::balanced_phenotype(300, rep), CovariateMatrix::empty(300));
    clean += res.significant() == 0;
  }
  EXPECT_GE(clean, 45);
}

TEST(RunSma, SkipsConstantColumnsAndRejectsEmpty) {
  const auto g = fixture::matrix({{0, 1, 2}, {1, 1, 0}, {2, 1, 1}, {0, 1, 2}});
  const auto res = run_sma(g, Phenotype({1, 0, 1, 0}), CovariateMatrix::empty(4));
  EXPECT_FALSE(res.records[1].tested);
  EXPECT_EQ(res.records[1].skip_reason, "constant");
  EXPECT_EQ(res.tested(), 2u);
  EXPECT_THROW(run_sma(GenotypeMatrix(), Phenotype(), CovariateMatrix::empty(0)), Error);
}

TEST(RunSasa, SkipsDegenerateColumnsAndCarriesSpans) {
  Rng rng(1);
  Eigen::MatrixXd v(30, 3);
  for (auto& x : v.reshaped()) x = rng.normal();
  auto d = columns(v);
  d.values.col(1).setZero();
  d.degenerate[1] = true;
  d.spans = {{0, 1}, {2, 4}, {5, 5}};
  const auto res = run_sasa(d, fixture::snps(6), fixture::balanced_phenotype(30, 2), CovariateMatrix::empty(30));
  EXPECT_EQ(res.records[1].skip_reason, "degenerate");
  EXPECT_EQ(res.records[1].pos_first, 300);
  EXPECT_EQ(res.records[1].pos_last, 500);
  EXPECT_EQ(res.tested(), 2u);
}

TEST(Results, RoundTripThroughTsv) {
  const auto g = fixture::random_matrix(50, 6, 2);
  const auto res = run_sma(g, fixture::balanced_phenotype(50, 1), CovariateMatrix::empty(50));
  std::ostringstream out;
  write_results(out, res);
  std::istringstream in(out.str());
  const auto back = read_results(in);
  ASSERT_EQ(back.records.size(), res.records.size());
  for (std::size_t k = 0; k < res.records.size(); ++k) {
    EXPECT_EQ(back.records[k].id, res.records[k].id);
    EXPECT_EQ(back.records[k].p_value, res.records[k].p_value);
    EXPECT_EQ(back.records[k].significant, res.records[k].significant);
  }
  std::ostringstream again;
  write_results(again, back);
  EXPECT_EQ(again.str(), out.str());
}
