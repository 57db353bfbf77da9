#include "sasa/ld.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "sasa/error.hpp"
#include "text.hpp"

namespace sasa {

LdDissimilarity::LdDissimilarity(std::size_t p, std::size_t bandwidth, std::vector<double> band)
    : p_(p), h_(bandwidth), band_(std::move(band)) {
  if (h_ < 1) throw Error("LD bandwidth must be at least 1");
  if (band_.size() != p_ * h_) {
    throw Error("LD band has " + std::to_string(band_.size()) + " entries, expected " +
                std::to_string(p_ * h_));
  }
  for (auto& d : band_) {
    if (std::isnan(d)) throw Error("LD band contains NaN");
    if (d < -1e-12 || d > 1.0 + 1e-12) {
      throw Error("LD dissimilarity " + std::to_string(d) + " outside [0,1]");
    }
    d = std::clamp(d, 0.0, 1.0);
  }
}

LdDissimilarity LdDissimilarity::from_dense(const Eigen::MatrixXd& d, std::size_t bandwidth) {
  const auto p = static_cast<std::size_t>(d.rows());
  if (d.cols() != d.rows()) throw Error("dense dissimilarity must be square");
  std::vector<double> band(p * bandwidth, 1.0);
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t k = 1; k <= bandwidth && j + k < p; ++k) {
      band[j * bandwidth + (k - 1)] =
          d(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j + k));
    }
  }
  return LdDissimilarity(p, bandwidth, std::move(band));
}

namespace {

// Centered column scaled to unit Euclidean norm; empty when constant.
Eigen::VectorXd unit_column(const GenotypeMatrix& g, std::size_t j) {
  Eigen::VectorXd x = g.column_as_double(j);
  if (x.hasNaN()) throw Error("SNP '" + g.snp(j).id + "' has missing calls; impute first");
  x.array() -= x.mean();
  const double norm = x.norm();
  if (!(norm > 0.0)) return {};
  return x / norm;
}

}  // namespace

double r_squared(const GenotypeMatrix& g, std::size_t j, std::size_t j2) {
  const auto a = unit_column(g, j);
  const auto b = unit_column(g, j2);
  if (a.size() == 0 || b.size() == 0) {
    throw Error("r^2 undefined: SNP column " + std::to_string(a.size() == 0 ? j : j2) +
                " is constant");
  }
  const double r = a.dot(b);
  return std::clamp(r * r, 0.0, 1.0);
}

LdDissimilarity ld_band(const GenotypeMatrix& g, std::size_t bandwidth,
                        ConstantColumnPolicy policy) {
  if (bandwidth < 1) throw Error("LD bandwidth must be at least 1");
  const std::size_t p = g.p();
  const auto n = static_cast<Eigen::Index>(g.n());
  Eigen::MatrixXd z(n, static_cast<Eigen::Index>(p));
  std::vector<char> constant(p, 0);
  for (std::size_t j = 0; j < p; ++j) {
    auto u = unit_column(g, j);
    if (u.size() == 0) {
      if (policy == ConstantColumnPolicy::error) {
        throw Error("r^2 undefined: SNP '" + g.snp(j).id + "' (column " + std::to_string(j) +
                    ") is constant");
      }
      constant[j] = 1;
      z.col(static_cast<Eigen::Index>(j)).setZero();
    } else {
      z.col(static_cast<Eigen::Index>(j)) = u;
    }
  }

  std::vector<double> band(p * bandwidth, 1.0);
  const auto& snps = g.snps();
  // Row blocks of the band as one product each: rows [j0, j0 + b) against
  // columns [j0, j0 + b + bandwidth).
  constexpr std::size_t kBlock = 128;
  const std::size_t blocks = (p + kBlock - 1) / kBlock;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t bs = 0; bs < static_cast<std::ptrdiff_t>(blocks); ++bs) {
    const std::size_t j0 = static_cast<std::size_t>(bs) * kBlock;
    const std::size_t rows = std::min(kBlock, p - j0);
    const std::size_t cols = std::min(p - j0, rows + bandwidth);
    const Eigen::MatrixXd r =
        z.middleCols(static_cast<Eigen::Index>(j0), static_cast<Eigen::Index>(cols)).transpose() *
        z.middleCols(static_cast<Eigen::Index>(j0), static_cast<Eigen::Index>(rows));
    for (std::size_t a = 0; a < rows; ++a) {
      const std::size_t j = j0 + a;
      if (constant[j]) continue;
      for (std::size_t k = 1; k <= bandwidth && j + k < p; ++k) {
        if (constant[j + k] || snps[j + k].chromosome != snps[j].chromosome) continue;
        const double rr = r(static_cast<Eigen::Index>(a + k), static_cast<Eigen::Index>(a));
        band[j * bandwidth + (k - 1)] = std::clamp(1.0 - rr * rr, 0.0, 1.0);
      }
    }
  }
  return LdDissimilarity(p, bandwidth, std::move(band));
}

void write_ld_band(std::ostream& out, const LdDissimilarity& d) {
  out << "j\tj2\td\n";
  for (std::size_t j = 0; j < d.p(); ++j) {
    for (std::size_t k = 1; k <= d.bandwidth() && j + k < d.p(); ++k) {
      out << j << '\t' << j + k << '\t' << detail::format_double(d(j, j + k)) << '\n';
    }
  }
}

}  // namespace sasa
