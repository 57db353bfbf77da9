#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sasa/chac.hpp"
#include "sasa/genotype.hpp"
#include "json.hpp"

namespace sasa {

enum class Scenario { single_snp, clus_snp };

std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);

struct SimConfig {
  std::size_t n = 1000;
  std::size_t p = 5000;
  std::size_t block_size_mean = 20;
  std::size_t block_size_jitter = 5;
  double within_block_r2 = 0.8;
  double maf_low = 0.05;
  double maf_high = 0.5;
  Scenario scenario = Scenario::clus_snp;
  std::size_t ell = 1;
  double prevalence = 0.5;
  double chip_fraction = 0.4;
  double target_mse = 0.05;
  std::size_t replicates = 5;
  std::size_t bandwidth = 500;  // LD band for the causal-cluster hierarchy
  std::uint64_t seed = 1;

  void validate() const;
};

void to_json(nlohmann::json& j, const SimConfig& c);
void from_json(const nlohmann::json& j, SimConfig& c);

struct SimulatedGenotypes {
  GenotypeMatrix genotypes;
  std::vector<std::size_t> block_starts;  // first SNP index of every true block
};

/// Block-structured genotypes. Each block has a latent allele per haplotype
/// with frequency drawn from [maf_low, maf_high]; each SNP copies it with
/// probability q = within_block_r2^(1/4) and otherwise draws independently
/// at the same frequency, giving a population genotypic r^2 of
/// within_block_r2 inside blocks and independence across blocks.
SimulatedGenotypes simulate_genotypes(const SimConfig& cfg);

struct GroundTruth {
  Scenario scenario = Scenario::single_snp;
  std::size_t ell = 0;
  std::vector<std::size_t> causal_snps;                             // single_snp, full indices
  std::vector<std::pair<std::size_t, std::size_t>> causal_spans;    // clus_snp, full indices
  std::vector<std::size_t> block_starts;
  double beta0 = 0.0;
  double beta = 0.0;
  std::vector<bool> mapped_mask;             // per full-matrix SNP
  std::vector<std::size_t> nearest_mapped;   // per causal unit, full index of a crediting mapped SNP
  std::vector<std::string> snp_ids;          // full-matrix metadata
  std::vector<std::string> chromosomes;
  std::vector<std::int64_t> positions;

  std::size_t units() const;
};

void to_json(nlohmann::json& j, const GroundTruth& t);
void from_json(const nlohmann::json& j, GroundTruth& t);

/// ln(pi / (1 - pi)).
double prevalence_intercept(double prevalence);

/// Bernoulli draws under the logit model with a common coefficient; the
/// predictors are centered first.
Phenotype simulate_phenotype(const Eigen::MatrixXd& x_tilde, double beta0, double beta,
                             std::uint64_t seed);

struct Calibration {
  double beta = 0.0;
  double mse = 0.0;
  std::vector<std::pair<double, double>> trace;  // (beta, mean MSE) in visit order
};

/// Smallest common beta whose logistic fit on (x_tilde, y) has in-sample MSE
/// between y and the fitted probabilities <= target_mse, averaged over three
/// phenotype draws (common random numbers across beta). Doubling then
/// bisection, at most 60 evaluations; beta is capped at 1e4.
Calibration calibrate_beta(const Eigen::MatrixXd& x_tilde, double prevalence, double target_mse,
                           std::uint64_t seed);

/// Mean squared difference between y and the fitted probabilities of an
/// unpenalized logistic fit of y on (1, x_tilde).
double fitted_mse(const Eigen::MatrixXd& x_tilde, const Phenotype& y);

struct CausalDesign {
  Eigen::MatrixXd x_tilde;  // n x ell
  GroundTruth truth;
};

/// Picks the causal units. single_snp: ell polymorphic SNPs from distinct
/// true blocks. clus_snp: ell clusters of the constrained hierarchy of the
/// full matrix cut at round(P / 20), aggregated by summation.
/// `hierarchy` may pass a precomputed dendrogram of `full`.
CausalDesign make_causal(const SimConfig& cfg, const GenotypeMatrix& full,
                         const std::vector<std::size_t>& block_starts, std::uint64_t seed,
                         const Dendrogram* hierarchy = nullptr);

/// Constrained Ward hierarchy of the full simulated matrix.
Dendrogram causal_hierarchy(const GenotypeMatrix& full, std::size_t bandwidth);

struct ChipMask {
  GenotypeMatrix genotypes;
  std::vector<std::size_t> retained;  // full indices, ascending
  std::vector<bool> mapped;
};

/// Keeps round(fraction * P) uniformly chosen SNPs in genomic order. With a
/// ground truth, records the mask and the nearest mapped SNP (by base pairs,
/// ties toward the smaller position) of every causal unit.
ChipMask mask_to_chip(const GenotypeMatrix& full, double fraction, std::uint64_t seed,
                      GroundTruth* truth = nullptr);

/// Fills the mask-dependent fields of `truth`.
void annotate_mask(GroundTruth& truth, const std::vector<bool>& mapped);

struct Replicate {
  Phenotype phenotype;
  GroundTruth truth;
  Calibration calibration;
};

struct Study {
  SimulatedGenotypes full;
  ChipMask chip;
  std::vector<Replicate> replicates;
};

/// Full protocol: genotypes, one chip mask, then per replicate causal units,
/// beta calibration and a phenotype. Replicate r uses seeds derived from
/// cfg.seed + r.
Study simulate_study(const SimConfig& cfg);

}  // namespace sasa
