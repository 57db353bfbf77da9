#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "../oracles.hpp"
#include "fixtures.hpp"
#include "sasa/aggregate.hpp"
#include "sasa/error.hpp"
#include "sasa/ld.hpp"
#include "sasa/simulate.hpp"

using namespace sasa;

namespace {

std::vector<double> col(const GenotypeMatrix& g, std::size_t j) {
  const auto c = g.column(j);
  return std::vector<double>(c.begin(), c.end());
}

double mean_of(const Phenotype& y) {
  return static_cast<double>(y.cases()) / static_cast<double>(y.size());
}

Eigen::MatrixXd unit_normal_column(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), 1);
  for (auto& v : x.reshaped()) v = rng.normal();
  x.array() -= x.mean();
  x /= std::sqrt(x.squaredNorm() / static_cast<double>(n - 1));
  return x;
}

}  // namespace

TEST(SimConfig, ValidatesBounds) {
  SimConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  auto bad = cfg;
  bad.within_block_r2 = 1.0;
  EXPECT_THROW(bad.validate(), Error);
  bad = cfg;
  bad.maf_low = 0.0;
  EXPECT_THROW(bad.validate(), Error);
  bad = cfg;
  bad.chip_fraction = 0.0;
  EXPECT_THROW(bad.validate(), Error);
  bad = cfg;
  bad.prevalence = 1.0;
  EXPECT_THROW(bad.validate(), Error);
}

TEST(SimConfig, JsonRoundTripAndUnknownKeys) {
  SimConfig cfg;
  cfg.n = 77;
  cfg.scenario = Scenario::single_snp;
  cfg.maf_low = 0.1;
  nlohmann::json j = cfg;
  const auto back = j.get<SimConfig>();
  EXPECT_EQ(back.n, 77u);
  EXPECT_EQ(back.scenario, Scenario::single_snp);
  EXPECT_EQ(back.maf_low, 0.1);
  j["bogus"] = 1;
  EXPECT_THROW(j.get<SimConfig>(), Error);
}

TEST(SimulateGenotypes, IndependentWhenRhoIsZero) {
  SimConfig cfg;
  cfg.n = 500;
  cfg.p = 40;
  cfg.within_block_r2 = 0.0;
  const auto g = simulate_genotypes(cfg).genotypes;
  double sum = 0;
  int pairs = 0;
  for (std::size_t a = 0; a < cfg.p; ++a)
    for (std::size_t b = a + 1; b < cfg.p; ++b) {
      sum += oracle::pearson_r2(col(g, a), col(g, b));
      ++pairs;
    }
  EXPECT_LE(sum / pairs, 3.0 / 500);
}

TEST(SimulateGenotypes, BlockLdNearTarget) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SimConfig cfg;
    cfg.n = 2000;
    cfg.p = 120;
    cfg.seed = seed;
    const auto sim = simulate_genotypes(cfg);
    const auto& g = sim.genotypes;
    std::vector<std::size_t> block(cfg.p);
    for (std::size_t b = 0; b < sim.block_starts.size(); ++b)
      for (std::size_t j = sim.block_starts[b]; j < cfg.p; ++j) block[j] = b;
    double within = 0, between = 0;
    int nw = 0, nb = 0;
    for (std::size_t a = 0; a < cfg.p; ++a)
      for (std::size_t b = a + 1; b < cfg.p; ++b) {
        const double r2 = oracle::pearson_r2(col(g, a), col(g, b));
        if (block[a] == block[b]) {
          within += r2;
          ++nw;
        } else {
          between += r2;
          ++nb;
        }
      }
    EXPECT_GE(within / nw, 0.6) << "seed " << seed;
    EXPECT_LE(within / nw, 0.95) << "seed " << seed;
    EXPECT_LE(between / nb, 0.05) << "seed " << seed;
  }
}

TEST(SimulateGenotypes, BlockSizesWithinJitter) {
  SimConfig cfg;
  cfg.p = 1000;
  cfg.n = 10;
  const auto sim = simulate_genotypes(cfg);
  ASSERT_EQ(sim.block_starts.front(), 0u);
  for (std::size_t b = 0; b + 1 < sim.block_starts.size(); ++b) {
    const auto size = sim.block_starts[b + 1] - sim.block_starts[b];
    EXPECT_GE(size, 15u);
    EXPECT_LE(size, 25u);
  }
}

TEST(SimulateGenotypes, FixedSeedIsBitIdentical) {
  SimConfig cfg;
  cfg.n = 50;
  cfg.p = 100;
  cfg.seed = 9;
  EXPECT_EQ(simulate_genotypes(cfg).genotypes.values(), simulate_genotypes(cfg).genotypes.values());
  auto other = cfg;
  other.seed = 10;
  EXPECT_NE(simulate_genotypes(cfg).genotypes.values(), simulate_genotypes(other).genotypes.values());
}

TEST(SimulatePhenotype, PureInterceptPrevalence) {
  const std::size_t n = 4000;
  const Eigen::MatrixXd x = unit_normal_column(n, 1);
  const auto half = simulate_phenotype(x, prevalence_intercept(0.5), 0.0, 3);
  EXPECT_LE(std::abs(mean_of(half) - 0.5), 3 / std::sqrt(double(n)));
  const auto fifth = simulate_phenotype(x, prevalence_intercept(0.2), 0.0, 4);
  EXPECT_LE(std::abs(mean_of(fifth) - 0.2), 3 * std::sqrt(0.16 / n));
  EXPECT_EQ(prevalence_intercept(0.2), std::log(0.25));
}

TEST(SimulatePhenotype, SaturatesForLargeBeta) {
  // Disagreement with the indicator is E[sigmoid(-beta |x|)] ~ 2 phi(0) ln 2 / beta
  // for a standard normal x: about 1.1% at beta = 50 and 0.28% at beta = 200.
  const std::size_t n = 20000;
  const Eigen::MatrixXd x = unit_normal_column(n, 2);
  for (double beta : {50.0, 200.0}) {
    const auto y = simulate_phenotype(x, 0.0, beta, 5);
    std::size_t agree = 0;
    for (std::size_t i = 0; i < n; ++i) agree += y.values[i] == (x(static_cast<Eigen::Index>(i), 0) > 0);
    const double expected = 2 * 0.3989422804014327 * std::log(2.0) / beta;
    const double miss = 1.0 - static_cast<double>(agree) / n;
    EXPECT_NEAR(miss, expected, 4 * std::sqrt(expected / n)) << "beta " << beta;
  }
  const auto y = simulate_phenotype(x, 0.0, 200.0, 6);
  std::size_t agree = 0;
  for (std::size_t i = 0; i < n; ++i) agree += y.values[i] == (x(static_cast<Eigen::Index>(i), 0) > 0);
  EXPECT_GE(static_cast<double>(agree) / n, 0.99);
}

TEST(SimulatePhenotype, Reproducible) {
  const Eigen::MatrixXd x = unit_normal_column(300, 3);
  EXPECT_EQ(simulate_phenotype(x, 0.1, 1.0, 8).values, simulate_phenotype(x, 0.1, 1.0, 8).values);
}

TEST(CalibrateBeta, BinaryPredictorReachesTarget) {
  Eigen::MatrixXd x(400, 1);
  for (Eigen::Index i = 0; i < 400; ++i) x(i, 0) = i % 2;
  const auto cal = calibrate_beta(x, 0.5, 0.05, 11);
  EXPECT_GT(cal.beta, 0.0);
  EXPECT_LE(cal.mse, 0.05);
  EXPECT_LE(cal.trace.size(), 60u);
}

TEST(CalibrateBeta, LooseTargetAndMonotonePath) {
  const Eigen::MatrixXd x = unit_normal_column(500, 4);
  const auto loose = calibrate_beta(x, 0.5, 0.25, 2);
  EXPECT_LE(loose.mse, 0.25);
  const auto cal = calibrate_beta(x, 0.5, 0.05, 3);
  EXPECT_LE(cal.mse, 0.05);
  auto path = cal.trace;
  std::sort(path.begin(), path.end());
  for (std::size_t k = 1; k < path.size(); ++k) EXPECT_LE(path[k].second, path[k - 1].second + 1e-12);
}

TEST(CalibrateBeta, RejectsNonPositiveTarget) {
  EXPECT_THROW(calibrate_beta(unit_normal_column(20, 1), 0.5, 0.0, 1), Error);
}

TEST(MakeCausal, SingleSnpDistinctBlocks) {
  SimConfig cfg;
  cfg.n = 100;
  cfg.p = 300;
  cfg.scenario = Scenario::single_snp;
  cfg.ell = 5;
  const auto sim = simulate_genotypes(cfg);
  const auto c = make_causal(cfg, sim.genotypes, sim.block_starts, 7);
  ASSERT_EQ(c.truth.causal_snps.size(), 5u);
  std::set<std::size_t> blocks;
  for (std::size_t k = 0; k < 5; ++k) {
    const auto j = c.truth.causal_snps[k];
    const auto b = std::upper_bound(sim.block_starts.begin(), sim.block_starts.end(), j) - sim.block_starts.begin();
    blocks.insert(static_cast<std::size_t>(b));
    EXPECT_EQ(c.x_tilde.col(static_cast<Eigen::Index>(k)), sim.genotypes.column_as_double(j));
  }
  EXPECT_EQ(blocks.size(), 5u);
  cfg.ell = 1;
  EXPECT_EQ(make_causal(cfg, sim.genotypes, sim.block_starts, 7).truth.causal_snps.size(), 1u);
}

TEST(MakeCausal, ClusSnpAggregatesRecordedSpans) {
  SimConfig cfg;
  cfg.n = 200;
  cfg.p = 400;
  cfg.ell = 3;
  const auto sim = simulate_genotypes(cfg);
  const auto hierarchy = causal_hierarchy(sim.genotypes, cfg.bandwidth);
  const auto c = make_causal(cfg, sim.genotypes, sim.block_starts, 5, &hierarchy);
  ASSERT_EQ(c.truth.causal_spans.size(), 3u);
  const auto spans = cut(hierarchy, 20).spans();
  for (std::size_t k = 0; k < 3; ++k) {
    const auto [a, b] = c.truth.causal_spans[k];
    EXPECT_NE(std::find(spans.begin(), spans.end(), c.truth.causal_spans[k]), spans.end());
    for (Eigen::Index i = 0; i < 200; ++i) {
      double s = 0;
      for (std::size_t j = a; j <= b; ++j) s += sim.genotypes.at(static_cast<std::size_t>(i), j);
      EXPECT_EQ(c.x_tilde(i, static_cast<Eigen::Index>(k)), s);
    }
  }
}

TEST(MakeCausal, ClusSnpSpansFollowTrueBlocks) {
  int aligned = 0, total = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SimConfig cfg;
    cfg.n = 500;
    cfg.p = 400;
    cfg.ell = 3;
    cfg.seed = seed;
    const auto sim = simulate_genotypes(cfg);
    const auto c = make_causal(cfg, sim.genotypes, sim.block_starts, seed);
    for (const auto& [a, b] : c.truth.causal_spans) {
      // Majority of the span lies in one true block.
      std::map<std::size_t, std::size_t> counts;
      for (std::size_t j = a; j <= b; ++j) {
        counts[static_cast<std::size_t>(std::upper_bound(sim.block_starts.begin(), sim.block_starts.end(), j) -
                                        sim.block_starts.begin())]++;
      }
      std::size_t top = 0;
      for (const auto& [blk, n] : counts) top = std::max(top, n);
      aligned += 2 * top > b - a + 1;
      ++total;
    }
  }
  EXPECT_GE(aligned, (8 * total + 9) / 10);
}

TEST(MakeCausal, TooManyUnitsIsAnError) {
  SimConfig cfg;
  cfg.n = 30;
  cfg.p = 40;
  cfg.scenario = Scenario::single_snp;
  cfg.ell = 10;
  const auto sim = simulate_genotypes(cfg);
  EXPECT_THROW(make_causal(cfg, sim.genotypes, sim.block_starts, 1), Error);
}

TEST(MaskToChip, CountsAndIdentity) {
  const auto g = fixture::random_matrix(5, 1000, 1);
  const auto all = mask_to_chip(g, 1.0, 3);
  EXPECT_EQ(all.genotypes.values(), g.values());
  const auto part = mask_to_chip(g, 0.4, 3);
  EXPECT_EQ(part.retained.size(), 400u);
  EXPECT_EQ(part.genotypes.p(), 400u);
  EXPECT_TRUE(std::is_sorted(part.retained.begin(), part.retained.end()));
  EXPECT_EQ(std::count(part.mapped.begin(), part.mapped.end(), true), 400);
}

TEST(MaskToChip, ChromosomeLosingAllSnpsIsAnError) {
  const auto g = fixture::random_matrix(5, 20, 1, {19});
  EXPECT_THROW(mask_to_chip(g, 0.05, 2), Error);
}

TEST(AnnotateMask, NearestMappedByBasePairs) {
  GroundTruth t;
  t.scenario = Scenario::single_snp;
  t.ell = 1;
  t.positions = {4500, 4800, 5000, 5300, 5600};
  t.chromosomes.assign(5, "1");
  t.snp_ids = {"a", "b", "c", "d", "e"};
  t.causal_snps = {2};
  annotate_mask(t, {true, true, false, true, true});
  EXPECT_EQ(t.nearest_mapped, std::vector<std::size_t>{1});
  // Equidistant neighbors resolve toward the smaller position.
  t.positions = {4500, 4800, 5000, 5200, 5600};
  annotate_mask(t, {true, true, false, true, true});
  EXPECT_EQ(t.nearest_mapped, std::vector<std::size_t>{1});
  t.positions = {4500, 4800, 5000, 5100, 5600};
  annotate_mask(t, {true, true, false, true, true});
  EXPECT_EQ(t.nearest_mapped, std::vector<std::size_t>{3});
}

TEST(SimulateStudy, DeterministicWithExactIntercept) {
  SimConfig cfg;
  cfg.n = 200;
  cfg.p = 300;
  cfg.replicates = 2;
  cfg.prevalence = 0.3;
  cfg.target_mse = 0.1;
  const auto a = simulate_study(cfg);
  const auto b = simulate_study(cfg);
  ASSERT_EQ(a.replicates.size(), 2u);
  EXPECT_EQ(a.chip.genotypes.values(), b.chip.genotypes.values());
  for (std::size_t r = 0; r < 2; ++r) {
    EXPECT_EQ(a.replicates[r].phenotype.values, b.replicates[r].phenotype.values);
    EXPECT_EQ(a.replicates[r].truth.beta, b.replicates[r].truth.beta);
    EXPECT_EQ(a.replicates[r].truth.beta0, std::log(0.3 / 0.7));
    EXPECT_EQ(a.replicates[r].truth.mapped_mask, a.chip.mapped);
  }
  const nlohmann::json j = a.replicates[0].truth;
  const auto back = j.get<GroundTruth>();
  EXPECT_EQ(back.causal_spans, a.replicates[0].truth.causal_spans);
  EXPECT_EQ(back.nearest_mapped, a.replicates[0].truth.nearest_mapped);
  EXPECT_EQ(back.mapped_mask, a.replicates[0].truth.mapped_mask);
  EXPECT_EQ(back.beta, a.replicates[0].truth.beta);
}
