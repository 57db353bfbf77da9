#pragma once

#include <cstddef>
#include <iosfwd>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sasa/chac.hpp"
#include "sasa/genotype.hpp"

namespace sasa {

/// One aggregated-SNP column per contiguous cluster: the per-individual sum
/// of minor-allele counts over the cluster, optionally centered and scaled.
struct AggregatedMatrix {
  Eigen::MatrixXd values;                                    // n x G
  std::vector<std::pair<std::size_t, std::size_t>> spans;    // inclusive SNP indices
  std::vector<bool> degenerate;                              // constant before scaling
  bool standardized = false;
  Eigen::VectorXd means;  // per-column statistics used to standardize
  Eigen::VectorXd sds;

  std::size_t n() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t g() const { return static_cast<std::size_t>(values.cols()); }

  /// Non-degenerate column indices.
  std::vector<std::size_t> informative_columns() const;
};

/// Per-cluster sums of the genotype codes; exact integers stored as doubles.
AggregatedMatrix aggregate_raw(const GenotypeMatrix& g, const ClusterAssignment& a);

/// Centers each column and divides by its sample standard deviation (n - 1).
/// Constant columns become zeros and are flagged degenerate.
AggregatedMatrix standardize(AggregatedMatrix d);

/// Standardizes with statistics taken from another matrix (typically the
/// training rows), so held-out rows share the training scale.
AggregatedMatrix standardize_like(AggregatedMatrix d, const AggregatedMatrix& reference);

/// TSV with one header field `cluster_k:first-last` per column.
void write_aggregated(std::ostream& out, const AggregatedMatrix& d);

}  // namespace sasa
