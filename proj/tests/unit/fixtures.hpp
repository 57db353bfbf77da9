#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sasa/genotype.hpp"
#include "sasa/rng.hpp"

namespace fixture {

inline std::vector<sasa::SnpMeta> snps(std::size_t p, const std::vector<std::size_t>& barriers = {}) {
  std::vector<sasa::SnpMeta> out(p);
  std::size_t chrom = 1;
  for (std::size_t j = 0; j < p; ++j) {
    for (auto b : barriers) {
      if (b == j) ++chrom;
    }
    out[j].id = "rs" + std::to_string(j + 1);
    out[j].chromosome = std::to_string(chrom);
    out[j].position = 100 * static_cast<std::int64_t>(j + 1);
  }
  return out;
}

// rows[i][j] is individual i at SNP j; -1 marks a missing call.
inline sasa::GenotypeMatrix matrix(const std::vector<std::vector<int>>& rows,
                                   const std::vector<std::size_t>& barriers = {}) {
  const std::size_t n = rows.size();
  const std::size_t p = n ? rows[0].size() : 0;
  std::vector<std::int8_t> v(n * p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) v[j * n + i] = static_cast<std::int8_t>(rows[i][j]);
  return sasa::GenotypeMatrix(n, snps(p, barriers), std::move(v));
}

// Independent columns with allele frequency 0.3; no constant columns.
inline sasa::GenotypeMatrix random_matrix(std::size_t n, std::size_t p, std::uint64_t seed,
                                          const std::vector<std::size_t>& barriers = {}) {
  sasa::Rng rng(seed);
  std::vector<std::int8_t> v(n * p);
  for (std::size_t j = 0; j < p; ++j) {
    for (;;) {
      bool varies = false;
      for (std::size_t i = 0; i < n; ++i) {
        v[j * n + i] = static_cast<std::int8_t>(rng.bernoulli(0.3) + rng.bernoulli(0.3));
        varies = varies || v[j * n + i] != v[j * n];
      }
      if (varies) break;
    }
  }
  return sasa::GenotypeMatrix(n, snps(p, barriers), std::move(v));
}

inline sasa::Phenotype balanced_phenotype(std::size_t n, std::uint64_t seed) {
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = i < n / 2 ? 1 : 0;
  sasa::Rng rng(seed);
  rng.shuffle(std::span<int>(y));
  return sasa::Phenotype(std::move(y));
}

}  // namespace fixture
