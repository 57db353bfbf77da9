#include "sasa/genotype.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <Eigen/SVD>

#include "sasa/error.hpp"
#include "text.hpp"

namespace sasa {

GenotypeMatrix::GenotypeMatrix(std::size_t n, std::vector<SnpMeta> snps,
                               std::vector<std::int8_t> values)
    : n_(n), snps_(std::move(snps)), values_(std::move(values)) {
  if (values_.size() != n_ * snps_.size()) {
    throw Error("genotype matrix: value count " + std::to_string(values_.size()) +
                " does not match " + std::to_string(n_) + " x " +
                std::to_string(snps_.size()));
  }
  for (std::size_t k = 0; k < values_.size(); ++k) {
    const auto v = values_[k];
    if (v != kMissing && (v < 0 || v > 2)) {
      throw Error("genotype matrix: value " + std::to_string(v) + " at row " +
                  std::to_string(k % std::max<std::size_t>(n_, 1)) + ", column " +
                  std::to_string(k / std::max<std::size_t>(n_, 1)) + " outside {0,1,2}");
    }
  }
  std::unordered_set<std::string> ids;
  std::unordered_set<std::string> closed_chroms;
  for (std::size_t j = 0; j < snps_.size(); ++j) {
    auto& s = snps_[j];
    s.index = j;
    if (!ids.insert(s.id).second) throw Error("duplicate SNP id '" + s.id + "'");
    if (s.position < 0) throw Error("negative position for SNP '" + s.id + "'");
    if (j > 0) {
      const auto& prev = snps_[j - 1];
      if (prev.chromosome == s.chromosome) {
        if (s.position <= prev.position) {
          throw Error("SNP '" + s.id + "' at " + s.chromosome + ":" +
                      std::to_string(s.position) + " is not after '" + prev.id + "' at " +
                      std::to_string(prev.position) + " on the same chromosome");
        }
      } else {
        closed_chroms.insert(prev.chromosome);
        if (closed_chroms.count(s.chromosome)) {
          throw Error("chromosome " + s.chromosome + " is not contiguous (SNP '" + s.id + "')");
        }
      }
    }
  }
}

bool GenotypeMatrix::is_complete() const {
  return std::none_of(values_.begin(), values_.end(), [](auto v) { return v == kMissing; });
}

std::vector<std::size_t> GenotypeMatrix::chromosome_barriers() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 1; j < snps_.size(); ++j) {
    if (snps_[j].chromosome != snps_[j - 1].chromosome) out.push_back(j);
  }
  return out;
}

std::size_t GenotypeMatrix::chromosome_count() const {
  return snps_.empty() ? 0 : chromosome_barriers().size() + 1;
}

GenotypeMatrix GenotypeMatrix::subset_rows(std::span<const std::size_t> rows) const {
  std::vector<std::int8_t> v(rows.size() * p());
  for (std::size_t j = 0; j < p(); ++j) {
    const auto col = column(j);
    for (std::size_t r = 0; r < rows.size(); ++r) v[j * rows.size() + r] = col[rows[r]];
  }
  return GenotypeMatrix(rows.size(), snps_, std::move(v));
}

GenotypeMatrix GenotypeMatrix::subset_columns(std::span<const std::size_t> cols) const {
  std::vector<std::int8_t> v;
  v.reserve(cols.size() * n_);
  std::vector<SnpMeta> meta;
  meta.reserve(cols.size());
  for (auto j : cols) {
    const auto col = column(j);
    v.insert(v.end(), col.begin(), col.end());
    meta.push_back(snps_[j]);
  }
  return GenotypeMatrix(n_, std::move(meta), std::move(v));
}

Eigen::VectorXd GenotypeMatrix::column_as_double(std::size_t j) const {
  Eigen::VectorXd x(n_);
  const auto col = column(j);
  for (std::size_t i = 0; i < n_; ++i) {
    x[i] = col[i] == kMissing ? std::nan("") : static_cast<double>(col[i]);
  }
  return x;
}

// ---------------------------------------------------------------------------

Phenotype::Phenotype(std::vector<int> v) : values(std::move(v)) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] != 0 && values[i] != 1) {
      throw Error("phenotype value " + std::to_string(values[i]) + " at individual " +
                  std::to_string(i) + " is not 0 or 1");
    }
  }
}

std::size_t Phenotype::cases() const {
  return static_cast<std::size_t>(std::count(values.begin(), values.end(), 1));
}

Eigen::VectorXd Phenotype::as_vector() const {
  Eigen::VectorXd y(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) y[i] = values[i];
  return y;
}

Phenotype Phenotype::subset(std::span<const std::size_t> rows) const {
  std::vector<int> v;
  v.reserve(rows.size());
  for (auto r : rows) v.push_back(values.at(r));
  return Phenotype(std::move(v));
}

CovariateMatrix::CovariateMatrix(Eigen::MatrixXd v, std::vector<std::string> l)
    : values(std::move(v)), labels(std::move(l)) {
  if (labels.size() != static_cast<std::size_t>(values.cols())) {
    throw Error("covariates: " + std::to_string(labels.size()) + " labels for " +
                std::to_string(values.cols()) + " columns");
  }
  if (values.rows() > 0) values.rowwise() -= values.colwise().mean();
}

CovariateMatrix CovariateMatrix::empty(std::size_t n) {
  return CovariateMatrix(Eigen::MatrixXd(static_cast<Eigen::Index>(n), 0), {});
}

CovariateMatrix CovariateMatrix::subset(std::span<const std::size_t> rows) const {
  Eigen::MatrixXd v(static_cast<Eigen::Index>(rows.size()), values.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    v.row(static_cast<Eigen::Index>(r)) = values.row(static_cast<Eigen::Index>(rows[r]));
  }
  return CovariateMatrix(std::move(v), labels);
}

// ---------------------------------------------------------------------------
// I/O

namespace {

std::int8_t parse_call(std::string_view tok, std::size_t line, std::size_t col) {
  if (tok == "0") return 0;
  if (tok == "1") return 1;
  if (tok == "2") return 2;
  if (tok == "NA") return GenotypeMatrix::kMissing;
  throw ParseError("line " + std::to_string(line) + ", column " + std::to_string(col + 1) +
                   ": genotype token '" + std::string(tok) + "' not in {0,1,2,NA}");
}

std::int64_t parse_position(std::string_view tok, std::size_t line) {
  std::int64_t v = 0;
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end || v < 0) {
    throw ParseError("line " + std::to_string(line) + ": bad position '" + std::string(tok) + "'");
  }
  return v;
}

GenotypeMatrix load_tsv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      if (!detail::trim(line).empty()) return true;
    }
    return false;
  };
  if (!next_line()) throw ParseError("genotype file is empty");
  std::vector<std::string> ids;
  for (auto tok : detail::split_ws(line)) ids.emplace_back(tok);
  if (!next_line()) throw ParseError("genotype file lacks the chrom:pos line");
  const auto loci = detail::split_ws(line);
  if (loci.size() != ids.size()) {
    throw ParseError("line " + std::to_string(lineno) + ": " + std::to_string(loci.size()) +
                     " chrom:pos labels for " + std::to_string(ids.size()) + " SNP ids");
  }
  std::vector<SnpMeta> snps(ids.size());
  for (std::size_t j = 0; j < ids.size(); ++j) {
    const auto colon = loci[j].rfind(':');
    if (colon == std::string_view::npos || colon == 0) {
      throw ParseError("line " + std::to_string(lineno) + ", column " + std::to_string(j + 1) +
                       ": expected chrom:pos, got '" + std::string(loci[j]) + "'");
    }
    snps[j].id = ids[j];
    snps[j].chromosome = std::string(loci[j].substr(0, colon));
    snps[j].position = parse_position(loci[j].substr(colon + 1), lineno);
  }

  std::vector<std::vector<std::int8_t>> rows;
  while (next_line()) {
    const auto toks = detail::split_ws(line);
    if (toks.size() != snps.size()) {
      throw ParseError("line " + std::to_string(lineno) + ": row has " +
                       std::to_string(toks.size()) + " tokens, expected " +
                       std::to_string(snps.size()));
    }
    std::vector<std::int8_t> row(toks.size());
    for (std::size_t j = 0; j < toks.size(); ++j) row[j] = parse_call(toks[j], lineno, j);
    rows.push_back(std::move(row));
  }
  const std::size_t n = rows.size();
  std::vector<std::int8_t> values(n * snps.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < snps.size(); ++j) values[j * n + i] = rows[i][j];
  }
  return GenotypeMatrix(n, std::move(snps), std::move(values));
}

}  // namespace

GenotypeMatrix load_genotypes(std::istream& in, GenotypeFormat format) {
  if (format == GenotypeFormat::tsv) return load_tsv(in);
  return load_plink_raw(in).genotypes;
}

PlinkRaw load_plink_raw(std::istream& raw, std::istream* map) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(raw, line)) throw ParseError("PLINK .raw file is empty");
  ++lineno;
  const auto header = detail::split_ws(line);
  static constexpr std::array<std::string_view, 6> kFixed = {"FID", "IID", "PAT",
                                                             "MAT", "SEX", "PHENOTYPE"};
  if (header.size() < kFixed.size() ||
      !std::equal(kFixed.begin(), kFixed.end(), header.begin())) {
    throw ParseError("PLINK .raw header must start with FID IID PAT MAT SEX PHENOTYPE");
  }
  const std::size_t p = header.size() - kFixed.size();

  std::vector<SnpMeta> snps(p);
  if (map != nullptr) {
    std::string mline;
    std::size_t j = 0, mlineno = 0;
    while (std::getline(*map, mline)) {
      ++mlineno;
      const auto t = detail::split_ws(mline);
      if (t.empty()) continue;
      if (t.size() != 4 && t.size() != 6) {
        throw ParseError("map line " + std::to_string(mlineno) + ": expected 4 or 6 fields");
      }
      if (j >= p) throw ParseError("map file lists more SNPs than the .raw header");
      snps[j].chromosome = std::string(t[0]);
      snps[j].id = std::string(t[1]);
      snps[j].position = parse_position(t[3], mlineno);
      ++j;
    }
    if (j != p) {
      throw ParseError("map file lists " + std::to_string(j) + " SNPs, .raw has " +
                       std::to_string(p));
    }
  } else {
    for (std::size_t j = 0; j < p; ++j) {
      snps[j].id = std::string(header[kFixed.size() + j]);
      snps[j].chromosome = "0";
      snps[j].position = static_cast<std::int64_t>(j);
    }
  }

  PlinkRaw out;
  std::vector<std::vector<std::int8_t>> rows;
  while (std::getline(raw, line)) {
    ++lineno;
    const auto toks = detail::split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() != header.size()) {
      throw ParseError("line " + std::to_string(lineno) + ": row has " +
                       std::to_string(toks.size()) + " tokens, expected " +
                       std::to_string(header.size()));
    }
    out.individual_ids.push_back(std::string(toks[0]) + "_" + std::string(toks[1]));
    const auto ph = toks[5];
    if (ph == "NA" || ph == "-9") {
      out.phenotype.emplace_back(std::nullopt);
    } else {
      int v = 0;
      auto [ptr, ec] = std::from_chars(ph.data(), ph.data() + ph.size(), v);
      if (ec != std::errc() || ptr != ph.data() + ph.size()) {
        throw ParseError("line " + std::to_string(lineno) + ": bad PHENOTYPE '" +
                         std::string(ph) + "'");
      }
      out.phenotype.emplace_back(v);
    }
    std::vector<std::int8_t> row(p);
    for (std::size_t j = 0; j < p; ++j) {
      row[j] = parse_call(toks[kFixed.size() + j], lineno, kFixed.size() + j);
    }
    rows.push_back(std::move(row));
  }
  const std::size_t n = rows.size();
  std::vector<std::int8_t> values(n * p);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) values[j * n + i] = rows[i][j];
  }
  out.genotypes = GenotypeMatrix(n, std::move(snps), std::move(values));
  return out;
}

Phenotype plink_phenotype(const std::vector<std::optional<int>>& raw) {
  std::vector<int> v(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!raw[i] || (*raw[i] != 1 && *raw[i] != 2)) {
      throw Error("PLINK phenotype at individual " + std::to_string(i) +
                  " is not 1 (control) or 2 (case)");
    }
    v[i] = *raw[i] - 1;
  }
  return Phenotype(std::move(v));
}

void write_genotypes(std::ostream& out, const GenotypeMatrix& g) {
  for (std::size_t j = 0; j < g.p(); ++j) out << (j ? "\t" : "") << g.snp(j).id;
  out << '\n';
  for (std::size_t j = 0; j < g.p(); ++j) {
    out << (j ? "\t" : "") << g.snp(j).chromosome << ':' << g.snp(j).position;
  }
  out << '\n';
  std::string row;
  for (std::size_t i = 0; i < g.n(); ++i) {
    row.clear();
    for (std::size_t j = 0; j < g.p(); ++j) {
      if (j) row += '\t';
      const auto v = g.at(i, j);
      if (v == GenotypeMatrix::kMissing) {
        row += "NA";
      } else {
        row += static_cast<char>('0' + v);
      }
    }
    out << row << '\n';
  }
}

Phenotype load_phenotype(std::istream& in) {
  std::vector<int> v;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = detail::trim(line);
    if (t.empty()) continue;
    if (t == "0") {
      v.push_back(0);
    } else if (t == "1") {
      v.push_back(1);
    } else {
      throw ParseError("phenotype line " + std::to_string(lineno) + ": '" + std::string(t) +
                       "' is not 0 or 1");
    }
  }
  return Phenotype(std::move(v));
}

void write_phenotype(std::ostream& out, const Phenotype& y) {
  for (int v : y.values) out << v << '\n';
}

CovariateMatrix load_covariates(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError("covariate file is empty");
  ++lineno;
  std::vector<std::string> labels;
  for (auto t : detail::split_ws(line)) labels.emplace_back(t);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    const auto toks = detail::split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() != labels.size()) {
      throw ParseError("covariate line " + std::to_string(lineno) + ": expected " +
                       std::to_string(labels.size()) + " values");
    }
    std::vector<double> r(toks.size());
    for (std::size_t c = 0; c < toks.size(); ++c) {
      r[c] = detail::parse_double(toks[c], "covariate line " + std::to_string(lineno));
    }
    rows.push_back(std::move(r));
  }
  Eigen::MatrixXd v(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < labels.size(); ++c) {
      v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
    }
  }
  return CovariateMatrix(std::move(v), std::move(labels));
}

void write_covariates(std::ostream& out, const CovariateMatrix& c) {
  for (std::size_t k = 0; k < c.labels.size(); ++k) out << (k ? "\t" : "") << c.labels[k];
  out << '\n';
  for (Eigen::Index i = 0; i < c.values.rows(); ++i) {
    for (Eigen::Index k = 0; k < c.values.cols(); ++k) {
      out << (k ? "\t" : "") << detail::format_double(c.values(i, k));
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Quality control

namespace {

std::array<std::size_t, 3> call_counts(std::span<const std::int8_t> col) {
  std::array<std::size_t, 3> counts{};
  for (auto v : col) {
    if (v != GenotypeMatrix::kMissing) ++counts[static_cast<std::size_t>(v)];
  }
  return counts;
}

std::int8_t modal_call(const std::array<std::size_t, 3>& counts) {
  // max_element returns the first maximum, which is the smaller genotype.
  return static_cast<std::int8_t>(std::max_element(counts.begin(), counts.end()) -
                                  counts.begin());
}

}  // namespace

GenotypeMatrix impute_most_frequent(const GenotypeMatrix& g) {
  std::vector<std::int8_t> v = g.values();
  for (std::size_t j = 0; j < g.p(); ++j) {
    const auto counts = call_counts(g.column(j));
    if (counts[0] + counts[1] + counts[2] == 0) {
      throw Error("cannot impute SNP '" + g.snp(j).id + "': every call is missing");
    }
    const auto mode = modal_call(counts);
    for (std::size_t i = 0; i < g.n(); ++i) {
      auto& x = v[j * g.n() + i];
      if (x == GenotypeMatrix::kMissing) x = mode;
    }
  }
  return GenotypeMatrix(g.n(), g.snps(), std::move(v));
}

MonomorphicFilter drop_monomorphic(const GenotypeMatrix& g) {
  MonomorphicFilter out;
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < g.p(); ++j) {
    auto counts = call_counts(g.column(j));
    const std::size_t observed = counts[0] + counts[1] + counts[2];
    if (observed > 0) {
      // Missing calls take the modal value, which adds no new genotype class.
      const auto classes = std::count_if(counts.begin(), counts.end(),
                                         [](std::size_t c) { return c > 0; });
      if (classes > 1) {
        keep.push_back(j);
        continue;
      }
    }
    out.dropped.push_back(g.snp(j).id);
  }
  if (keep.empty()) throw Error("every SNP is monomorphic; nothing left to analyze");
  out.matrix = g.subset_columns(keep);
  return out;
}

Eigen::MatrixXd standardized_genotypes(const GenotypeMatrix& g) {
  const auto n = static_cast<Eigen::Index>(g.n());
  Eigen::MatrixXd z(n, static_cast<Eigen::Index>(g.p()));
  for (std::size_t j = 0; j < g.p(); ++j) {
    Eigen::VectorXd x = g.column_as_double(j);
    if (x.hasNaN()) throw Error("SNP '" + g.snp(j).id + "' has missing calls; impute first");
    x.array() -= x.mean();
    const double ss = x.squaredNorm();
    if (!(ss > 0.0)) {
      throw Error("SNP '" + g.snp(j).id + "' (column " + std::to_string(j) +
                  ") is constant; run drop_monomorphic first");
    }
    z.col(static_cast<Eigen::Index>(j)) = x / std::sqrt(ss / static_cast<double>(n - 1));
  }
  return z;
}

CovariateMatrix pca_covariates(const GenotypeMatrix& g, std::size_t k) {
  if (k == 0) return CovariateMatrix::empty(g.n());
  if (g.n() < 2 || k > std::min(g.n() - 1, g.p())) {
    throw Error("requested " + std::to_string(k) + " principal components; at most min(n-1, P) = " +
                std::to_string(g.n() < 2 ? 0 : std::min(g.n() - 1, g.p())) + " are available");
  }
  const Eigen::MatrixXd z = standardized_genotypes(g);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(z, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto kk = static_cast<Eigen::Index>(k);
  Eigen::MatrixXd scores = svd.matrixU().leftCols(kk) * svd.singularValues().head(kk).asDiagonal();
  const Eigen::MatrixXd& v = svd.matrixV();
  std::vector<std::string> labels;
  for (Eigen::Index c = 0; c < kk; ++c) {
    Eigen::Index arg = 0;
    v.col(c).cwiseAbs().maxCoeff(&arg);
    if (v(arg, c) < 0) scores.col(c) = -scores.col(c);
    labels.push_back("PC" + std::to_string(c + 1));
  }
  return CovariateMatrix(std::move(scores), std::move(labels));
}

}  // namespace sasa
