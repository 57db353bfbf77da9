#include "sasa/evaluation.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <set>
#include <utility>

#include "sasa/error.hpp"
#include "text.hpp"

namespace sasa {

std::string to_string(Method m) { return m == Method::sma ? "sma" : "sasa"; }
std::string to_string(Unit u) { return u == Unit::snp_level ? "snp_level" : "cluster_level"; }

Method method_from_string(const std::string& s) {
  if (s == "sma") return Method::sma;
  if (s == "sasa") return Method::sasa;
  throw Error("unknown method '" + s + "' (expected sma or sasa)");
}

Unit unit_from_string(const std::string& s) {
  if (s == "snp_level") return Unit::snp_level;
  if (s == "cluster_level") return Unit::cluster_level;
  throw Error("unknown unit '" + s + "' (expected snp_level or cluster_level)");
}

namespace {

// Full-matrix index range [first, last] per chromosome.
using ChromRanges = std::map<std::string, std::pair<std::size_t, std::size_t>>;

ChromRanges chromosome_ranges(const GroundTruth& t) {
  ChromRanges out;
  for (std::size_t j = 0; j < t.chromosomes.size(); ++j) {
    auto [it, inserted] = out.try_emplace(t.chromosomes[j], j, j);
    if (!inserted) it->second.second = j;
  }
  return out;
}

std::vector<std::size_t> members(const AssociationRecord& r, const GroundTruth& t,
                                 const ChromRanges& ranges) {
  const auto it = ranges.find(r.chromosome);
  if (it == ranges.end()) {
    throw Error("result '" + r.id + "' is on chromosome " + r.chromosome +
                ", absent from the ground truth");
  }
  const auto begin = t.positions.begin() + static_cast<std::ptrdiff_t>(it->second.first);
  const auto end = t.positions.begin() + static_cast<std::ptrdiff_t>(it->second.second + 1);
  const auto lo = std::lower_bound(begin, end, r.pos_first);
  if (lo == end || *lo != r.pos_first) {
    throw Error("result '" + r.id + "' starts at a position unknown to the ground truth");
  }
  std::vector<std::size_t> out;
  for (auto p = lo; p != end && *p <= r.pos_last; ++p) {
    const auto j = static_cast<std::size_t>(p - t.positions.begin());
    if (t.mapped_mask[j]) out.push_back(j);
  }
  if (out.empty()) throw Error("result '" + r.id + "' covers no mapped SNP");
  return out;
}

// Crediting SNPs per causal unit, all mapped.
std::vector<std::vector<std::size_t>> crediting_sets(const GroundTruth& t) {
  const std::size_t units = t.units();
  if (t.nearest_mapped.size() != units) {
    throw Error("ground truth lacks nearest-mapped annotations for its causal units");
  }
  std::vector<std::vector<std::size_t>> out(units);
  for (std::size_t u = 0; u < units; ++u) {
    if (t.scenario == Scenario::clus_snp) {
      const auto [a, b] = t.causal_spans[u];
      for (std::size_t j = a; j <= b; ++j) {
        if (t.mapped_mask[j]) out[u].push_back(j);
      }
    }
    if (out[u].empty()) out[u].push_back(t.nearest_mapped[u]);
  }
  return out;
}

}  // namespace

ConfusionCounts match_results(const AssociationResult& res, const GroundTruth& truth,
                              Method method, Unit unit) {
  if (method == Method::sma && unit == Unit::cluster_level) {
    throw Error("cluster_level scoring is undefined for single-marker results");
  }
  const auto ranges = chromosome_ranges(truth);
  const auto credit = crediting_sets(truth);
  ConfusionCounts c;
  c.unit = unit;

  if (unit == Unit::snp_level) {
    std::set<std::size_t> causal;
    for (const auto& set : credit) causal.insert(set.begin(), set.end());
    std::set<std::size_t> tested, flagged;
    for (const auto& r : res.records) {
      if (!r.tested) continue;
      const auto m = members(r, truth, ranges);
      if (method == Method::sma && m.size() != 1) {
        throw Error("single-marker result '" + r.id + "' spans several SNPs");
      }
      tested.insert(m.begin(), m.end());
      if (r.significant) flagged.insert(m.begin(), m.end());
    }
    for (auto j : flagged) (causal.count(j) ? c.tp : c.fp) += 1;
    for (auto j : causal) {
      if (tested.count(j) && !flagged.count(j)) ++c.fn;
    }
    c.tn = tested.size() - c.tp - c.fp - c.fn;
    return c;
  }

  std::size_t total = 0;
  std::vector<bool> credited(credit.size(), false);
  for (const auto& r : res.records) {
    if (!r.tested) continue;
    ++total;
    if (!r.significant) continue;
    const auto m = members(r, truth, ranges);
    bool hit = false;
    for (std::size_t u = 0; u < credit.size(); ++u) {
      const bool overlap = std::any_of(credit[u].begin(), credit[u].end(), [&](std::size_t j) {
        return std::binary_search(m.begin(), m.end(), j);
      });
      if (overlap) {
        credited[u] = true;
        hit = true;
      }
    }
    (hit ? c.tp : c.fp) += 1;
  }
  c.fn = static_cast<std::size_t>(std::count(credited.begin(), credited.end(), false));
  // Uncredited units sharing one cluster would otherwise push tn below zero.
  c.tn = total >= c.tp + c.fp + c.fn ? total - c.tp - c.fp - c.fn : 0;
  return c;
}

std::optional<double> recall(const ConfusionCounts& c) {
  if (c.tp + c.fn == 0) return std::nullopt;
  return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
}

std::optional<double> precision(const ConfusionCounts& c) {
  if (c.tp + c.fp == 0) return std::nullopt;
  return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
}

ScoreRow average_scores(const std::string& scenario, std::size_t ell, Method method, Unit unit,
                        const std::vector<ConfusionCounts>& replicates) {
  ScoreRow row{scenario, ell, method, unit, std::nullopt, std::nullopt, replicates.size()};
  auto mean = [&](auto fn) -> std::optional<double> {
    double sum = 0.0;
    std::size_t k = 0;
    for (const auto& c : replicates) {
      if (const auto v = fn(c)) {
        sum += *v;
        ++k;
      }
    }
    if (k == 0) return std::nullopt;
    return sum / static_cast<double>(k);
  };
  row.recall = mean(recall);
  row.precision = mean(precision);
  return row;
}

void write_scores(std::ostream& out, const std::vector<ScoreRow>& rows) {
  auto fmt = [](const std::optional<double>& v) {
    return v ? detail::format_double(*v) : std::string("NA");
  };
  out << "scenario\tell\tmethod\tunit\trecall\tprecision\tn_replicates\n";
  for (const auto& r : rows) {
    out << r.scenario << '\t' << r.ell << '\t' << to_string(r.method) << '\t'
        << to_string(r.unit) << '\t' << fmt(r.recall) << '\t' << fmt(r.precision) << '\t'
        << r.n_replicates << '\n';
  }
}

}  // namespace sasa
