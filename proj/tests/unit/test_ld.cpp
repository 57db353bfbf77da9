#include <gtest/gtest.h>

#include <sstream>

#include "../oracles.hpp"
#include "fixtures.hpp"
#include "sasa/error.hpp"
#include "sasa/ld.hpp"

using namespace sasa;

namespace {

std::vector<double> col(const GenotypeMatrix& g, std::size_t j) {
  const auto c = g.column(j);
  return std::vector<double>(c.begin(), c.end());
}

}  // namespace

TEST(RSquared, IdenticalAndRecodedColumns) {
  const auto g = fixture::matrix({{0, 0, 2}, {1, 1, 1}, {2, 2, 0}, {1, 1, 1}, {0, 0, 2}});
  EXPECT_NEAR(r_squared(g, 0, 1), 1.0, 1e-14);
  EXPECT_NEAR(r_squared(g, 0, 2), 1.0, 1e-14);
}

TEST(RSquared, MatchesDirectPearson) {
  const auto g = fixture::matrix({{0, 0}, {1, 1}, {2, 1}, {0, 1}});
  // By hand: sxy = 3/4, sxx = 11/4, syy = 3/4.
  EXPECT_NEAR(r_squared(g, 0, 1), oracle::pearson_r2({0, 1, 2, 0}, {0, 1, 1, 1}), 1e-12);
  EXPECT_NEAR(r_squared(g, 0, 1), 3.0 / 11.0, 1e-12);
}

TEST(RSquared, ConstantColumnIsAnError) {
  const auto g = fixture::matrix({{0, 1}, {1, 1}, {2, 1}});
  EXPECT_THROW(r_squared(g, 0, 1), Error);
  EXPECT_THROW(ld_band(g, 1), Error);
}

TEST(RSquared, SymmetricAndRecodingInvariant) {
  const auto g = fixture::random_matrix(30, 4, 5);
  std::vector<std::vector<int>> rows(30, std::vector<int>(2));
  for (std::size_t i = 0; i < 30; ++i) {
    rows[i][0] = g.at(i, 0);
    rows[i][1] = 2 - g.at(i, 1);
  }
  const auto flipped = fixture::matrix(rows);
  EXPECT_DOUBLE_EQ(r_squared(g, 0, 1), r_squared(g, 1, 0));
  EXPECT_NEAR(r_squared(g, 0, 1), r_squared(flipped, 0, 1), 1e-14);
}

TEST(LdBand, IdenticalColumnsGiveZeroDissimilarity) {
  const auto g = fixture::matrix({{0, 0, 0}, {1, 1, 1}, {2, 2, 2}});
  const auto d = ld_band(g, 2);
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b) EXPECT_NEAR(d(a, b), 0.0, 1e-12);
}

TEST(LdBand, CrossChromosomePairsAreMaximal) {
  const auto g = fixture::matrix({{0, 0, 0, 0}, {1, 1, 1, 1}, {2, 2, 2, 2}}, {2});
  const auto d = ld_band(g, 3);
  EXPECT_NEAR(d(0, 1), 0.0, 1e-12);
  EXPECT_NEAR(d(2, 3), 0.0, 1e-12);
  for (std::size_t a : {0, 1})
    for (std::size_t b : {2, 3}) EXPECT_EQ(d(a, b), 1.0);
}

TEST(LdBand, MatchesDensePairwiseOracle) {
  const auto g = fixture::random_matrix(60, 50, 9);
  const auto d = ld_band(g, 10);
  for (std::size_t a = 0; a < 50; ++a) {
    EXPECT_EQ(d(a, a), 0.0);
    for (std::size_t b = a + 1; b < 50; ++b) {
      const double expected = b - a <= 10 ? 1.0 - oracle::pearson_r2(col(g, a), col(g, b)) : 1.0;
      EXPECT_NEAR(d(a, b), expected, 1e-12) << a << "," << b;
      EXPECT_EQ(d(a, b), d(b, a));
      EXPECT_GE(d(a, b), 0.0);
      EXPECT_LE(d(a, b), 1.0);
    }
  }
}

TEST(LdBand, FullBandReproducesDenseMatrix) {
  const auto g = fixture::random_matrix(25, 12, 4);
  const auto d = ld_band(g, 11);
  for (std::size_t a = 0; a < 12; ++a)
    for (std::size_t b = a + 1; b < 12; ++b)
      EXPECT_NEAR(d(a, b), 1.0 - r_squared(g, a, b), 1e-12);
}

TEST(LdBand, ConstantColumnPolicyMaxDissimilarity) {
  const auto g = fixture::matrix({{0, 1, 0}, {1, 1, 1}, {2, 1, 2}});
  const auto d = ld_band(g, 2, ConstantColumnPolicy::max_dissimilarity);
  EXPECT_EQ(d(0, 1), 1.0);
  EXPECT_EQ(d(1, 2), 1.0);
  EXPECT_NEAR(d(0, 2), 0.0, 1e-12);
}

TEST(LdBand, DumpListsBandTriples) {
  const auto g = fixture::random_matrix(10, 4, 1);
  std::ostringstream out;
  write_ld_band(out, ld_band(g, 2));
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "j\tj2\td");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3 + 2);
}
