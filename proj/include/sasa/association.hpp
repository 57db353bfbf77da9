#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sasa/aggregate.hpp"
#include "sasa/genotype.hpp"

namespace sasa {

struct LrtResult {
  double statistic = 0.0;  // 2 (loglik_full - loglik_null), >= 0
  double p_value = 1.0;    // upper tail of chi-square with 1 df
  double effect = 0.0;     // fitted slope of the tested predictor
  bool separated = false;  // fitted probabilities saturated (quasi-complete separation)
};

/// Upper-tail probability of a chi-square(1) variate.
double chi_square_1df_sf(double statistic);

/// Null model (intercept + covariates) shared by every test on one phenotype.
class LrtContext {
 public:
  LrtContext(const Phenotype& y, const CovariateMatrix& cov);
  LrtResult test(const Eigen::VectorXd& x) const;
  double null_loglik() const { return null_loglik_; }

 private:
  Eigen::VectorXd y_;
  Eigen::MatrixXd null_design_;
  Eigen::VectorXd null_coef_;
  double null_loglik_ = 0.0;
};

/// Likelihood-ratio test of x on top of intercept + covariates.
LrtResult lrt_single(const Eigen::VectorXd& x, const Phenotype& y, const CovariateMatrix& cov);

struct BhResult {
  std::vector<bool> flags;
  double threshold = 0.0;  // largest rejected p-value, 0 when nothing is rejected
};

/// Benjamini-Hochberg step-up at FDR level phi.
BhResult bh_fdr(std::span<const double> pvalues, double phi);

/// Flags p <= alpha / m.
std::vector<bool> bonferroni(std::span<const double> pvalues, double alpha);

enum class Multiplicity { bh, bonferroni };

struct AssociationRecord {
  std::string id;
  std::string chromosome;
  std::int64_t pos_first = 0;
  std::int64_t pos_last = 0;
  std::size_t first_index = 0;  // SNP column span in the analyzed matrix
  std::size_t last_index = 0;
  bool tested = false;
  std::string skip_reason;
  double statistic = 0.0;
  double p_value = 1.0;
  double effect = 0.0;
  bool separated = false;
  bool significant = false;
};

struct AssociationResult {
  std::vector<AssociationRecord> records;
  double threshold = 0.0;  // realized p-value cutoff
  Multiplicity method = Multiplicity::bh;
  double level = 0.05;

  std::size_t tested() const;
  std::size_t significant() const;
};

/// Single-marker analysis: one LRT per SNP column.
AssociationResult run_sma(const GenotypeMatrix& g, const Phenotype& y, const CovariateMatrix& cov,
                          double level = 0.05, Multiplicity method = Multiplicity::bh);

/// Single aggregated-SNP analysis: one LRT per informative aggregated column.
/// `snps` supplies the genomic coordinates of the cluster spans.
AssociationResult run_sasa(const AggregatedMatrix& d, const std::vector<SnpMeta>& snps,
                           const Phenotype& y, const CovariateMatrix& cov, double level = 0.05,
                           Multiplicity method = Multiplicity::bh);

/// TSV `id  chrom  pos_first  pos_last  statistic  p  significant`.
void write_results(std::ostream& out, const AssociationResult& r);
AssociationResult read_results(std::istream& in);

}  // namespace sasa
