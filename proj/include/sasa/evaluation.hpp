#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sasa/association.hpp"
#include "sasa/simulate.hpp"

namespace sasa {

enum class Method { sma, sasa };
enum class Unit { snp_level, cluster_level };

std::string to_string(Method m);
std::string to_string(Unit u);
Method method_from_string(const std::string& s);
Unit unit_from_string(const std::string& s);

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
  Unit unit = Unit::snp_level;

  std::size_t total() const { return tp + fp + tn + fn; }
};

/// Scores one association run against its ground truth.
///
/// Records are mapped onto the full simulated SNP set through chromosome and
/// base-pair coordinates; a record covers the mapped SNPs between pos_first
/// and pos_last. A causal unit is credited through the mapped SNPs of its
/// span, or through its nearest mapped SNP when it has none.
///
/// snp_level: units are tested SNPs (for SASA, the members of tested
/// clusters; a significant cluster makes all its members significant).
/// A significant SNP is a TP iff it credits a causal unit; fn counts
/// crediting SNPs left unflagged.
///
/// cluster_level (SASA only): units are tested clusters. A significant
/// cluster is a TP iff it shares a SNP with some unit's crediting set; fn
/// counts causal units not touched by any significant cluster.
ConfusionCounts match_results(const AssociationResult& res, const GroundTruth& truth,
                              Method method, Unit unit);

/// TP / (TP + FN); empty when the denominator is zero.
std::optional<double> recall(const ConfusionCounts& c);
/// TP / (TP + FP); empty when nothing was flagged.
std::optional<double> precision(const ConfusionCounts& c);

struct ScoreRow {
  std::string scenario;
  std::size_t ell = 0;
  Method method = Method::sma;
  Unit unit = Unit::snp_level;
  std::optional<double> recall;     // mean over replicates where defined
  std::optional<double> precision;
  std::size_t n_replicates = 0;
};

ScoreRow average_scores(const std::string& scenario, std::size_t ell, Method method, Unit unit,
                        const std::vector<ConfusionCounts>& replicates);

/// TSV `scenario  ell  method  unit  recall  precision  n_replicates`;
/// undefined values are written as NA.
void write_scores(std::ostream& out, const std::vector<ScoreRow>& rows);

}  // namespace sasa
