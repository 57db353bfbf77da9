#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sasa {

struct SnpMeta {
  std::string id;
  std::string chromosome;
  std::int64_t position = 0;
  std::size_t index = 0;
};

/// n x P additive genotype codes (minor-allele counts) stored column-major.
/// Missing calls are held as GenotypeMatrix::kMissing.
///
/// Construction validates the value domain, id uniqueness, and genomic order:
/// each chromosome occupies one contiguous run of columns with strictly
/// increasing positions.
class GenotypeMatrix {
 public:
  static constexpr std::int8_t kMissing = -1;

  GenotypeMatrix() = default;
  GenotypeMatrix(std::size_t n, std::vector<SnpMeta> snps, std::vector<std::int8_t> values);

  std::size_t n() const { return n_; }
  std::size_t p() const { return snps_.size(); }
  const std::vector<SnpMeta>& snps() const { return snps_; }
  const SnpMeta& snp(std::size_t j) const { return snps_[j]; }

  std::int8_t at(std::size_t i, std::size_t j) const { return values_[j * n_ + i]; }
  std::span<const std::int8_t> column(std::size_t j) const {
    return {values_.data() + j * n_, n_};
  }
  const std::vector<std::int8_t>& values() const { return values_; }

  bool is_complete() const;

  /// Column indices at which a new chromosome starts (first column excluded).
  std::vector<std::size_t> chromosome_barriers() const;
  std::size_t chromosome_count() const;

  GenotypeMatrix subset_rows(std::span<const std::size_t> rows) const;
  GenotypeMatrix subset_columns(std::span<const std::size_t> cols) const;

  /// Column j as doubles. Missing entries become NaN.
  Eigen::VectorXd column_as_double(std::size_t j) const;

 private:
  std::size_t n_ = 0;
  std::vector<SnpMeta> snps_;
  std::vector<std::int8_t> values_;
};

/// Binary case/control status (1 = case).
struct Phenotype {
  std::vector<int> values;

  Phenotype() = default;
  explicit Phenotype(std::vector<int> v);

  std::size_t size() const { return values.size(); }
  std::size_t cases() const;
  std::size_t controls() const { return size() - cases(); }
  bool both_classes() const { return cases() > 0 && controls() > 0; }
  Eigen::VectorXd as_vector() const;
  Phenotype subset(std::span<const std::size_t> rows) const;
};

/// n x C covariates; every column is centered on construction.
struct CovariateMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> labels;

  CovariateMatrix() = default;
  CovariateMatrix(Eigen::MatrixXd v, std::vector<std::string> l);
  static CovariateMatrix empty(std::size_t n);

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }
  CovariateMatrix subset(std::span<const std::size_t> rows) const;
};

// ---------------------------------------------------------------------------
// I/O

enum class GenotypeFormat { tsv, plink_raw };

/// Reads a genotype matrix. For tsv the first line holds SNP ids, the second
/// `chrom:pos` labels, and each further line one individual.
GenotypeMatrix load_genotypes(std::istream& in, GenotypeFormat format);

/// PLINK .raw with metadata taken from a companion .map/.bim stream. Without
/// one, SNPs are placed on chromosome "0" at their column ordinal.
struct PlinkRaw {
  GenotypeMatrix genotypes;
  std::vector<std::string> individual_ids;  // FID_IID
  std::vector<std::optional<int>> phenotype;  // raw PHENOTYPE column, NA -> nullopt
};
PlinkRaw load_plink_raw(std::istream& raw, std::istream* map = nullptr);

/// PLINK phenotype coding (1 = control, 2 = case) to {0,1}.
Phenotype plink_phenotype(const std::vector<std::optional<int>>& raw);

void write_genotypes(std::ostream& out, const GenotypeMatrix& g);

Phenotype load_phenotype(std::istream& in);
void write_phenotype(std::ostream& out, const Phenotype& y);

CovariateMatrix load_covariates(std::istream& in);
void write_covariates(std::ostream& out, const CovariateMatrix& c);

// ---------------------------------------------------------------------------
// Quality control

struct MonomorphicFilter {
  GenotypeMatrix matrix;
  std::vector<std::string> dropped;
};

/// Drops columns with zero variance after modal imputation.
MonomorphicFilter drop_monomorphic(const GenotypeMatrix& g);

/// Fills missing calls with the column's modal genotype (ties to the smaller
/// genotype).
GenotypeMatrix impute_most_frequent(const GenotypeMatrix& g);

/// Scores of the top-k principal components of the column-standardized
/// matrix. Components are sign-canonicalized so that the largest-magnitude
/// loading is positive.
CovariateMatrix pca_covariates(const GenotypeMatrix& g, std::size_t k = 5);

/// Column-standardized matrix (mean 0, sample variance 1). Throws on constant
/// columns and missing values.
Eigen::MatrixXd standardized_genotypes(const GenotypeMatrix& g);

}  // namespace sasa
