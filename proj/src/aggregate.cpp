#include "sasa/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "sasa/error.hpp"
#include "text.hpp"

namespace sasa {

std::vector<std::size_t> AggregatedMatrix::informative_columns() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < g(); ++k) {
    if (!degenerate[k]) out.push_back(k);
  }
  return out;
}

AggregatedMatrix aggregate_raw(const GenotypeMatrix& g, const ClusterAssignment& a) {
  if (a.labels.size() != g.p()) {
    throw Error("cluster assignment covers " + std::to_string(a.labels.size()) +
                " SNPs but the genotype matrix has " + std::to_string(g.p()));
  }
  if (!g.is_complete()) throw Error("aggregation requires a complete genotype matrix");
  AggregatedMatrix d;
  d.spans = a.spans();
  d.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(g.n()),
                                   static_cast<Eigen::Index>(a.g));
  d.degenerate.assign(a.g, false);
  for (std::size_t k = 0; k < a.g; ++k) {
    std::vector<int> sums(g.n(), 0);
    for (std::size_t j = d.spans[k].first; j <= d.spans[k].second; ++j) {
      const auto col = g.column(j);
      for (std::size_t i = 0; i < g.n(); ++i) sums[i] += col[i];
    }
    auto out = d.values.col(static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < g.n(); ++i) out[static_cast<Eigen::Index>(i)] = sums[i];
    d.degenerate[k] = (out.array() == out[0]).all();
  }
  return d;
}

namespace {

AggregatedMatrix apply_scaling(AggregatedMatrix d, const Eigen::VectorXd& means,
                               const Eigen::VectorXd& sds, const std::vector<bool>& degenerate) {
  for (std::size_t k = 0; k < d.g(); ++k) {
    const auto c = static_cast<Eigen::Index>(k);
    if (degenerate[k]) {
      d.values.col(c).setZero();
    } else {
      d.values.col(c) = (d.values.col(c).array() - means[c]) / sds[c];
    }
  }
  d.degenerate = degenerate;
  d.means = means;
  d.sds = sds;
  d.standardized = true;
  return d;
}

}  // namespace

AggregatedMatrix standardize(AggregatedMatrix d) {
  const auto g = static_cast<Eigen::Index>(d.g());
  Eigen::VectorXd means(g), sds(g);
  std::vector<bool> degenerate(d.g(), false);
  const double n = static_cast<double>(d.n());
  for (Eigen::Index c = 0; c < g; ++c) {
    const auto col = d.values.col(c);
    means[c] = n > 0 ? col.mean() : 0.0;
    const double ss = (col.array() - means[c]).square().sum();
    sds[c] = n > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    // Constant up to rounding relative to the column's magnitude.
    const double scale = std::max(1.0, col.cwiseAbs().maxCoeff());
    degenerate[static_cast<std::size_t>(c)] = !(sds[c] > 1e-12 * scale);
  }
  return apply_scaling(std::move(d), means, sds, degenerate);
}

AggregatedMatrix standardize_like(AggregatedMatrix d, const AggregatedMatrix& reference) {
  if (!reference.standardized || reference.g() != d.g()) {
    throw Error("reference matrix is not a standardized matrix with matching columns");
  }
  return apply_scaling(std::move(d), reference.means, reference.sds, reference.degenerate);
}

void write_aggregated(std::ostream& out, const AggregatedMatrix& d) {
  for (std::size_t k = 0; k < d.g(); ++k) {
    out << (k ? "\t" : "") << "cluster_" << k << ':' << d.spans[k].first << '-'
        << d.spans[k].second;
  }
  out << '\n';
  for (Eigen::Index i = 0; i < d.values.rows(); ++i) {
    for (Eigen::Index k = 0; k < d.values.cols(); ++k) {
      out << (k ? "\t" : "") << detail::format_double(d.values(i, k));
    }
    out << '\n';
  }
}

}  // namespace sasa
