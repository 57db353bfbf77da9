#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "sasa/ld.hpp"

namespace sasa {

/// One agglomeration step. Leaves are ids 0..p-1; step k creates id p + k.
/// `left` is the cluster covering the smaller SNP indices.
struct Merge {
  std::size_t left = 0;
  std::size_t right = 0;
  double height = 0.0;
  std::size_t size = 0;
};

/// Adjacency-constrained Ward dendrogram. With chromosome barriers it is a
/// forest of `trees()` trees holding p - trees() merges.
struct Dendrogram {
  std::size_t p = 0;
  std::vector<Merge> merges;
  std::vector<std::size_t> barriers;

  std::size_t trees() const { return p == 0 ? 0 : barriers.size() + 1; }
};

/// Contiguous clustering of p SNPs into g clusters; labels increase with
/// genomic position.
struct ClusterAssignment {
  std::vector<std::size_t> labels;
  std::size_t g = 0;

  /// Inclusive (first, last) SNP index of each cluster.
  std::vector<std::pair<std::size_t, std::size_t>> spans() const;
};

/// Greedy agglomeration: at each step merge the adjacent pair (not separated
/// by a barrier) with the smallest Ward cost; ties go to the pair whose left
/// cluster starts first. Costs follow the Lance-Williams Ward recurrence
/// initialized with d(i, j), with out-of-band pairs taking d = 1.
Dendrogram build(const LdDissimilarity& d, std::span<const std::size_t> barriers);

/// Undoes the last merges until exactly g clusters remain.
ClusterAssignment cut(const Dendrogram& t, std::size_t g);

/// Ward cost between two adjacent clusters given their sizes, the sums of
/// similarity 1 - d over unordered pairs inside each, and over cross pairs.
double ward_cost(double n_a, double n_b, double within_a, double within_b, double cross);

/// TSV `step  left  right  height  size` with a header line.
void write_dendrogram(std::ostream& out, const Dendrogram& t);
Dendrogram read_dendrogram(std::istream& in, std::size_t p, std::vector<std::size_t> barriers);

}  // namespace sasa
