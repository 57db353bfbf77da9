#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "sasa/genotype.hpp"

namespace sasa {

/// Banded LD dissimilarity d(j, j') = 1 - r^2(j, j') for |j - j'| <= bandwidth.
/// Pairs outside the band read as 1 and the diagonal as 0.
class LdDissimilarity {
 public:
  LdDissimilarity() = default;

  /// `band` is row-major p x bandwidth: band[j * bandwidth + (k - 1)] = d(j, j + k).
  /// Slots with j + k >= p are ignored.
  LdDissimilarity(std::size_t p, std::size_t bandwidth, std::vector<double> band);

  /// Band of a dense symmetric dissimilarity matrix.
  static LdDissimilarity from_dense(const Eigen::MatrixXd& d, std::size_t bandwidth);

  std::size_t p() const { return p_; }
  std::size_t bandwidth() const { return h_; }

  double operator()(std::size_t j, std::size_t j2) const {
    if (j == j2) return 0.0;
    if (j2 < j) std::swap(j, j2);
    const std::size_t k = j2 - j;
    return k > h_ ? 1.0 : band_[j * h_ + (k - 1)];
  }

 private:
  std::size_t p_ = 0;
  std::size_t h_ = 1;
  std::vector<double> band_;
};

/// Squared Pearson correlation of two complete, non-constant genotype columns.
double r_squared(const GenotypeMatrix& g, std::size_t j, std::size_t j2);

enum class ConstantColumnPolicy {
  error,              // throw naming the offending column
  max_dissimilarity,  // treat every pair involving the column as d = 1
};

/// Banded 1 - r^2. Pairs straddling a chromosome boundary are set to 1.
LdDissimilarity ld_band(const GenotypeMatrix& g, std::size_t bandwidth,
                        ConstantColumnPolicy policy = ConstantColumnPolicy::error);

/// Writes `j  j2  d` triples (j < j2 <= j + bandwidth) with a header line.
void write_ld_band(std::ostream& out, const LdDissimilarity& d);

}  // namespace sasa
