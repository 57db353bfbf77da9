#include "sasa/association.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <numeric>
#include <ostream>

#include "sasa/error.hpp"
#include "sasa/logistic.hpp"
#include "text.hpp"

namespace sasa {

double chi_square_1df_sf(double statistic) {
  if (!(statistic > 0.0)) return 1.0;
  return std::erfc(std::sqrt(0.5 * statistic));
}

LrtContext::LrtContext(const Phenotype& y, const CovariateMatrix& cov) : y_(y.as_vector()) {
  if (!y.both_classes()) throw Error("association test needs both cases and controls");
  if (cov.rows() != y.size()) throw Error("covariate rows do not match phenotype length");
  const auto n = static_cast<Eigen::Index>(y.size());
  null_design_.resize(n, 1 + cov.values.cols());
  null_design_.col(0).setOnes();
  if (cov.values.cols() > 0) null_design_.rightCols(cov.values.cols()) = cov.values;
  const auto fit = fit_logistic(null_design_, y_, Eigen::VectorXd::Zero(null_design_.cols()));
  null_coef_ = fit.coef;
  null_loglik_ = fit.loglik;
}

LrtResult LrtContext::test(const Eigen::VectorXd& x) const {
  if (x.size() != y_.size()) throw Error("predictor length does not match phenotype length");
  if ((x.array() == x[0]).all()) throw Error("LRT predictor is constant");
  const Eigen::Index q = null_design_.cols();
  Eigen::MatrixXd design(null_design_.rows(), q + 1);
  design.leftCols(q) = null_design_;
  design.col(q) = x;
  Eigen::VectorXd start(q + 1);
  start.head(q) = null_coef_;
  start[q] = 0.0;
  const auto fit = fit_logistic(design, y_, Eigen::VectorXd::Zero(q + 1), {}, start);
  LrtResult r;
  r.statistic = std::max(0.0, 2.0 * (fit.loglik - null_loglik_));
  r.p_value = chi_square_1df_sf(r.statistic);
  r.effect = fit.coef[q];
  // Fitted probabilities within ~3e-7 of 0 or 1 only arise when the slope
  // is running off toward a separating direction.
  r.separated = fit.eta.cwiseAbs().maxCoeff() > 15.0;
  return r;
}

LrtResult lrt_single(const Eigen::VectorXd& x, const Phenotype& y, const CovariateMatrix& cov) {
  return LrtContext(y, cov).test(x);
}

BhResult bh_fdr(std::span<const double> pvalues, double phi) {
  if (pvalues.empty()) throw Error("BH procedure needs at least one p-value");
  const std::size_t m = pvalues.size();
  for (double p : pvalues) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error("p-value outside [0,1]");
  }
  std::vector<double> sorted(pvalues.begin(), pvalues.end());
  std::sort(sorted.begin(), sorted.end());
  BhResult r;
  bool any = false;
  for (std::size_t k = m; k >= 1 && !any; --k) {
    if (sorted[k - 1] <= static_cast<double>(k) * phi / static_cast<double>(m)) {
      r.threshold = sorted[k - 1];
      any = true;
    }
  }
  r.flags.resize(m);
  for (std::size_t i = 0; i < m; ++i) r.flags[i] = any && pvalues[i] <= r.threshold;
  return r;
}

std::vector<bool> bonferroni(std::span<const double> pvalues, double alpha) {
  if (pvalues.empty()) throw Error("Bonferroni correction needs at least one p-value");
  const double cutoff = alpha / static_cast<double>(pvalues.size());
  std::vector<bool> flags(pvalues.size());
  for (std::size_t i = 0; i < pvalues.size(); ++i) {
    if (!(pvalues[i] >= 0.0 && pvalues[i] <= 1.0)) throw Error("p-value outside [0,1]");
    flags[i] = pvalues[i] <= cutoff;
  }
  return flags;
}

std::size_t AssociationResult::tested() const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const auto& r) { return r.tested; }));
}

std::size_t AssociationResult::significant() const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const auto& r) { return r.significant; }));
}

namespace {

void apply_multiplicity(AssociationResult& res) {
  std::vector<double> p;
  std::vector<std::size_t> where;
  for (std::size_t k = 0; k < res.records.size(); ++k) {
    if (res.records[k].tested) {
      p.push_back(res.records[k].p_value);
      where.push_back(k);
    }
  }
  if (p.empty()) throw Error("no testable variables");
  std::vector<bool> flags;
  if (res.method == Multiplicity::bh) {
    auto bh = bh_fdr(p, res.level);
    flags = std::move(bh.flags);
    res.threshold = bh.threshold;
  } else {
    flags = bonferroni(p, res.level);
    res.threshold = res.level / static_cast<double>(p.size());
  }
  for (std::size_t k = 0; k < where.size(); ++k) res.records[where[k]].significant = flags[k];
}

void run_tests(AssociationResult& res, const LrtContext& ctx,
               const std::function<Eigen::VectorXd(std::size_t)>& column) {
  const auto m = static_cast<std::ptrdiff_t>(res.records.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t k = 0; k < m; ++k) {
    auto& rec = res.records[static_cast<std::size_t>(k)];
    if (!rec.skip_reason.empty()) continue;
    const Eigen::VectorXd x = column(static_cast<std::size_t>(k));
    if ((x.array() == x[0]).all()) {
      rec.skip_reason = "constant";
      continue;
    }
    const auto r = ctx.test(x);
    rec.tested = true;
    rec.statistic = r.statistic;
    rec.p_value = r.p_value;
    rec.effect = r.effect;
    rec.separated = r.separated;
  }
}

}  // namespace

AssociationResult run_sma(const GenotypeMatrix& g, const Phenotype& y, const CovariateMatrix& cov,
                          double level, Multiplicity method) {
  if (g.p() == 0 || g.n() == 0) throw Error("association needs a non-empty genotype matrix");
  if (y.size() != g.n()) throw Error("phenotype length does not match genotype rows");
  if (!g.is_complete()) throw Error("single-marker analysis requires complete genotypes");
  const LrtContext ctx(y, cov);
  AssociationResult res;
  res.method = method;
  res.level = level;
  res.records.resize(g.p());
  for (std::size_t j = 0; j < g.p(); ++j) {
    auto& rec = res.records[j];
    const auto& s = g.snp(j);
    rec.id = s.id;
    rec.chromosome = s.chromosome;
    rec.pos_first = rec.pos_last = s.position;
    rec.first_index = rec.last_index = j;
  }
  run_tests(res, ctx, [&](std::size_t j) { return g.column_as_double(j); });
  apply_multiplicity(res);
  return res;
}

AssociationResult run_sasa(const AggregatedMatrix& d, const std::vector<SnpMeta>& snps,
                           const Phenotype& y, const CovariateMatrix& cov, double level,
                           Multiplicity method) {
  if (d.g() == 0 || d.n() == 0) throw Error("association needs a non-empty aggregated matrix");
  if (y.size() != d.n()) throw Error("phenotype length does not match aggregated rows");
  const LrtContext ctx(y, cov);
  AssociationResult res;
  res.method = method;
  res.level = level;
  res.records.resize(d.g());
  for (std::size_t k = 0; k < d.g(); ++k) {
    auto& rec = res.records[k];
    const auto [first, last] = d.spans[k];
    if (last >= snps.size()) throw Error("cluster span exceeds the SNP list");
    rec.id = "cluster_" + std::to_string(k);
    rec.chromosome = snps[first].chromosome;
    rec.pos_first = snps[first].position;
    rec.pos_last = snps[last].position;
    rec.first_index = first;
    rec.last_index = last;
    if (d.degenerate[k]) rec.skip_reason = "degenerate";
  }
  run_tests(res, ctx, [&](std::size_t k) {
    return Eigen::VectorXd(d.values.col(static_cast<Eigen::Index>(k)));
  });
  apply_multiplicity(res);
  return res;
}

void write_results(std::ostream& out, const AssociationResult& r) {
  out << "id\tchrom\tpos_first\tpos_last\tstatistic\tp\tsignificant\n";
  for (const auto& rec : r.records) {
    out << rec.id << '\t' << rec.chromosome << '\t' << rec.pos_first << '\t' << rec.pos_last
        << '\t';
    if (rec.tested) {
      out << detail::format_double(rec.statistic) << '\t' << detail::format_double(rec.p_value);
    } else {
      out << "NA\tNA";
    }
    out << '\t' << (rec.significant ? 1 : 0) << '\n';
  }
}

AssociationResult read_results(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) ||
      detail::trim(line) != "id\tchrom\tpos_first\tpos_last\tstatistic\tp\tsignificant") {
    throw ParseError("results file lacks the expected header");
  }
  AssociationResult r;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split_tab(line);
    const std::string where = "results line " + std::to_string(lineno);
    if (f.size() != 7) throw ParseError(where + ": 7 fields expected");
    AssociationRecord rec;
    rec.id = std::string(f[0]);
    rec.chromosome = std::string(f[1]);
    rec.pos_first = static_cast<std::int64_t>(detail::parse_double(f[2], where));
    rec.pos_last = static_cast<std::int64_t>(detail::parse_double(f[3], where));
    rec.tested = f[5] != "NA";
    if (rec.tested) {
      rec.statistic = detail::parse_double(f[4], where);
      rec.p_value = detail::parse_double(f[5], where);
    }
    if (f[6] != "0" && f[6] != "1") throw ParseError(where + ": significant must be 0 or 1");
    rec.significant = f[6] == "1";
    r.records.push_back(std::move(rec));
  }
  return r;
}

}  // namespace sasa
