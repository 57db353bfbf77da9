#include "sasa/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include "sasa/aggregate.hpp"
#include "sasa/error.hpp"
#include "sasa/ld.hpp"
#include "sasa/logistic.hpp"
#include "sasa/rng.hpp"

namespace sasa {

std::string to_string(Scenario s) { return s == Scenario::single_snp ? "singleSNP" : "clusSNP"; }

Scenario scenario_from_string(const std::string& s) {
  if (s == "singleSNP") return Scenario::single_snp;
  if (s == "clusSNP") return Scenario::clus_snp;
  throw Error("unknown scenario '" + s + "' (expected singleSNP or clusSNP)");
}

void SimConfig::validate() const {
  if (n < 2) throw Error("simulation needs at least 2 individuals");
  if (p < 1) throw Error("simulation needs at least 1 SNP");
  if (block_size_mean < 1) throw Error("block_size_mean must be at least 1");
  if (block_size_jitter >= block_size_mean) {
    throw Error("block_size_jitter must be smaller than block_size_mean");
  }
  if (!(within_block_r2 >= 0.0 && within_block_r2 < 1.0)) {
    throw Error("within_block_r2 must lie in [0, 1)");
  }
  if (!(maf_low > 0.0 && maf_low <= maf_high && maf_high <= 0.5)) {
    throw Error("maf range must satisfy 0 < low <= high <= 0.5");
  }
  if (ell < 1) throw Error("at least one causal unit is required");
  if (!(prevalence > 0.0 && prevalence < 1.0)) throw Error("prevalence must lie in (0, 1)");
  if (!(chip_fraction > 0.0 && chip_fraction <= 1.0)) {
    throw Error("chip_fraction must lie in (0, 1]");
  }
  if (!(target_mse > 0.0)) throw Error("target_mse must be positive");
  if (replicates < 1) throw Error("at least one replicate is required");
  if (bandwidth < 1) throw Error("bandwidth must be at least 1");
}

void to_json(nlohmann::json& j, const SimConfig& c) {
  j = nlohmann::json{{"n", c.n},
                     {"p", c.p},
                     {"block_size_mean", c.block_size_mean},
                     {"block_size_jitter", c.block_size_jitter},
                     {"within_block_r2", c.within_block_r2},
                     {"maf_range", {c.maf_low, c.maf_high}},
                     {"scenario", to_string(c.scenario)},
                     {"ell", c.ell},
                     {"prevalence", c.prevalence},
                     {"chip_fraction", c.chip_fraction},
                     {"target_mse", c.target_mse},
                     {"replicates", c.replicates},
                     {"bandwidth", c.bandwidth},
                     {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, SimConfig& c) {
  static const std::set<std::string> known = {
      "n", "p", "block_size_mean", "block_size_jitter", "within_block_r2", "maf_range",
      "scenario", "ell", "prevalence", "chip_fraction", "target_mse", "replicates",
      "bandwidth", "seed"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw Error("unknown simulation setting '" + key + "'");
  }
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("n", c.n);
  get("p", c.p);
  get("block_size_mean", c.block_size_mean);
  get("block_size_jitter", c.block_size_jitter);
  get("within_block_r2", c.within_block_r2);
  if (j.contains("maf_range")) {
    const auto& r = j.at("maf_range");
    if (!r.is_array() || r.size() != 2) throw Error("maf_range must be [low, high]");
    c.maf_low = r[0].get<double>();
    c.maf_high = r[1].get<double>();
  }
  if (j.contains("scenario")) c.scenario = scenario_from_string(j.at("scenario").get<std::string>());
  get("ell", c.ell);
  get("prevalence", c.prevalence);
  get("chip_fraction", c.chip_fraction);
  get("target_mse", c.target_mse);
  get("replicates", c.replicates);
  get("bandwidth", c.bandwidth);
  get("seed", c.seed);
}

std::size_t GroundTruth::units() const {
  return scenario == Scenario::single_snp ? causal_snps.size() : causal_spans.size();
}

void to_json(nlohmann::json& j, const GroundTruth& t) {
  nlohmann::json spans = nlohmann::json::array();
  for (const auto& [a, b] : t.causal_spans) spans.push_back({a, b});
  std::vector<int> mask(t.mapped_mask.begin(), t.mapped_mask.end());
  j = nlohmann::json{{"scenario", to_string(t.scenario)},
                     {"ell", t.ell},
                     {"causal_snps", t.causal_snps},
                     {"causal_spans", spans},
                     {"block_starts", t.block_starts},
                     {"beta0", t.beta0},
                     {"beta", t.beta},
                     {"mapped_mask", mask},
                     {"nearest_mapped", t.nearest_mapped},
                     {"snp_ids", t.snp_ids},
                     {"chromosomes", t.chromosomes},
                     {"positions", t.positions}};
}

void from_json(const nlohmann::json& j, GroundTruth& t) {
  t.scenario = scenario_from_string(j.at("scenario").get<std::string>());
  j.at("ell").get_to(t.ell);
  j.at("causal_snps").get_to(t.causal_snps);
  t.causal_spans.clear();
  for (const auto& s : j.at("causal_spans")) {
    t.causal_spans.emplace_back(s.at(0).get<std::size_t>(), s.at(1).get<std::size_t>());
  }
  j.at("block_starts").get_to(t.block_starts);
  j.at("beta0").get_to(t.beta0);
  j.at("beta").get_to(t.beta);
  const auto mask = j.at("mapped_mask").get<std::vector<int>>();
  t.mapped_mask.assign(mask.begin(), mask.end());
  j.at("nearest_mapped").get_to(t.nearest_mapped);
  j.at("snp_ids").get_to(t.snp_ids);
  j.at("chromosomes").get_to(t.chromosomes);
  j.at("positions").get_to(t.positions);
  const std::size_t p = t.positions.size();
  if (t.snp_ids.size() != p || t.chromosomes.size() != p || t.mapped_mask.size() != p) {
    throw Error("ground truth: per-SNP arrays have inconsistent lengths");
  }
}

double prevalence_intercept(double prevalence) {
  return std::log(prevalence / (1.0 - prevalence));
}

SimulatedGenotypes simulate_genotypes(const SimConfig& cfg) {
  cfg.validate();
  Rng rng(derive_seed(cfg.seed, 0));
  SimulatedGenotypes out;
  const double copy_prob = std::pow(cfg.within_block_r2, 0.25);

  std::vector<SnpMeta> snps(cfg.p);
  std::int64_t pos = 10000;
  for (std::size_t j = 0; j < cfg.p; ++j) {
    snps[j].id = "snp" + std::to_string(j + 1);
    snps[j].chromosome = "1";
    snps[j].position = pos;
    pos += 500 + static_cast<std::int64_t>(rng.below(1001));
  }

  std::vector<std::int8_t> values(cfg.n * cfg.p, 0);
  std::vector<char> latent(2 * cfg.n);
  std::size_t start = 0;
  while (start < cfg.p) {
    const std::size_t span = 2 * cfg.block_size_jitter + 1;
    const std::size_t size = cfg.block_size_mean - cfg.block_size_jitter + rng.below(span);
    const std::size_t end = std::min(cfg.p, start + size);
    out.block_starts.push_back(start);
    const double freq = cfg.maf_low + (cfg.maf_high - cfg.maf_low) * rng.uniform();
    for (auto& h : latent) h = rng.bernoulli(freq) ? 1 : 0;
    for (std::size_t j = start; j < end; ++j) {
      std::int8_t* col = values.data() + j * cfg.n;
      for (std::size_t i = 0; i < cfg.n; ++i) {
        int g = 0;
        for (int h = 0; h < 2; ++h) {
          const bool copy = rng.bernoulli(copy_prob);
          const bool allele = copy ? latent[2 * i + static_cast<std::size_t>(h)] != 0
                                   : rng.bernoulli(freq);
          g += allele ? 1 : 0;
        }
        col[i] = static_cast<std::int8_t>(g);
      }
    }
    start = end;
  }
  out.genotypes = GenotypeMatrix(cfg.n, std::move(snps), std::move(values));
  return out;
}

namespace {

Eigen::MatrixXd centered(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd c = x;
  if (c.rows() > 0) c.rowwise() -= c.colwise().mean();
  return c;
}

}  // namespace

Phenotype simulate_phenotype(const Eigen::MatrixXd& x_tilde, double beta0, double beta,
                             std::uint64_t seed) {
  const Eigen::VectorXd score = centered(x_tilde).rowwise().sum();
  Rng rng(seed);
  std::vector<int> y(static_cast<std::size_t>(score.size()));
  for (Eigen::Index i = 0; i < score.size(); ++i) {
    y[static_cast<std::size_t>(i)] = rng.bernoulli(inverse_logit(beta0 + beta * score[i])) ? 1 : 0;
  }
  return Phenotype(std::move(y));
}

double fitted_mse(const Eigen::MatrixXd& x_tilde, const Phenotype& y) {
  const auto n = static_cast<Eigen::Index>(y.size());
  if (x_tilde.rows() != n) throw Error("causal design rows do not match phenotype length");
  if (!y.both_classes()) return 0.0;  // a one-class response is fitted exactly
  Eigen::MatrixXd design(n, 1 + x_tilde.cols());
  design.col(0).setOnes();
  design.rightCols(x_tilde.cols()) = centered(x_tilde);
  const auto fit = fit_logistic(design, y.as_vector(), Eigen::VectorXd::Zero(design.cols()));
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = y.values[static_cast<std::size_t>(i)] - inverse_logit(fit.eta[i]);
    acc += r * r;
  }
  return acc / static_cast<double>(n);
}

Calibration calibrate_beta(const Eigen::MatrixXd& x_tilde, double prevalence, double target_mse,
                           std::uint64_t seed) {
  if (!(target_mse > 0.0)) throw Error("target_mse must be positive");
  if (!(prevalence > 0.0 && prevalence < 1.0)) throw Error("prevalence must lie in (0, 1)");
  constexpr int kDraws = 3;
  constexpr int kMaxSteps = 60;
  constexpr double kBetaCap = 1e4;
  const auto n = static_cast<std::size_t>(x_tilde.rows());
  const double beta0 = prevalence_intercept(prevalence);
  const Eigen::VectorXd score = centered(x_tilde).rowwise().sum();

  Rng rng(seed);
  std::vector<std::vector<double>> uniforms(kDraws, std::vector<double>(n));
  for (auto& u : uniforms) {
    for (auto& v : u) v = rng.uniform();
  }

  Calibration cal;
  auto evaluate = [&](double beta) {
    double total = 0.0;
    for (const auto& u : uniforms) {
      std::vector<int> y(n);
      for (std::size_t i = 0; i < n; ++i) {
        y[i] = u[i] < inverse_logit(beta0 + beta * score[static_cast<Eigen::Index>(i)]) ? 1 : 0;
      }
      total += fitted_mse(x_tilde, Phenotype(std::move(y)));
    }
    const double mse = total / kDraws;
    cal.trace.emplace_back(beta, mse);
    return mse;
  };

  double mse = evaluate(0.0);
  if (mse <= target_mse) {
    cal.beta = 0.0;
    cal.mse = mse;
    return cal;
  }
  double sd = std::sqrt((score.array() - score.mean()).square().sum() /
                        std::max<double>(1.0, static_cast<double>(n) - 1.0));
  double lo = 0.0;
  double hi = sd > 0 ? 0.25 / sd : 1.0;
  double hi_mse = evaluate(hi);
  while (hi_mse > target_mse) {
    if (hi >= kBetaCap || static_cast<int>(cal.trace.size()) >= kMaxSteps) {
      throw Error("target MSE " + std::to_string(target_mse) + " unreachable with beta <= 1e4 " +
                  "(reached " + std::to_string(hi_mse) + "); use a larger target_mse");
    }
    lo = hi;
    hi = std::min(2.0 * hi, kBetaCap);
    hi_mse = evaluate(hi);
  }
  while (static_cast<int>(cal.trace.size()) < kMaxSteps && hi - lo > 1e-3 * hi) {
    const double mid = 0.5 * (lo + hi);
    const double m = evaluate(mid);
    if (m <= target_mse) {
      hi = mid;
      hi_mse = m;
    } else {
      lo = mid;
    }
  }
  cal.beta = hi;
  cal.mse = hi_mse;
  return cal;
}

Dendrogram causal_hierarchy(const GenotypeMatrix& full, std::size_t bandwidth) {
  const auto d = ld_band(full, bandwidth, ConstantColumnPolicy::max_dissimilarity);
  return build(d, full.chromosome_barriers());
}

CausalDesign make_causal(const SimConfig& cfg, const GenotypeMatrix& full,
                         const std::vector<std::size_t>& block_starts, std::uint64_t seed,
                         const Dendrogram* hierarchy) {
  cfg.validate();
  if (full.n() != cfg.n || full.p() != cfg.p) {
    throw Error("genotype matrix does not match the simulation configuration");
  }
  Rng rng(seed);
  CausalDesign out;
  auto& t = out.truth;
  t.scenario = cfg.scenario;
  t.ell = cfg.ell;
  t.block_starts = block_starts;
  t.beta0 = prevalence_intercept(cfg.prevalence);
  for (const auto& s : full.snps()) {
    t.snp_ids.push_back(s.id);
    t.chromosomes.push_back(s.chromosome);
    t.positions.push_back(s.position);
  }
  const auto n = static_cast<Eigen::Index>(cfg.n);
  out.x_tilde.resize(n, static_cast<Eigen::Index>(cfg.ell));

  if (cfg.scenario == Scenario::single_snp) {
    if (cfg.ell > block_starts.size()) {
      throw Error("ell = " + std::to_string(cfg.ell) + " exceeds the " +
                  std::to_string(block_starts.size()) + " available blocks");
    }
    std::vector<char> polymorphic(cfg.p);
    std::size_t n_poly = 0;
    for (std::size_t j = 0; j < cfg.p; ++j) {
      const auto col = full.column(j);
      polymorphic[j] = std::any_of(col.begin(), col.end(), [&](auto v) { return v != col[0]; });
      n_poly += polymorphic[j] ? 1 : 0;
    }
    std::set<std::size_t> used_blocks;
    std::size_t attempts = 0;
    while (t.causal_snps.size() < cfg.ell) {
      if (++attempts > 100 * cfg.p + 1000) {
        throw Error("could not find " + std::to_string(cfg.ell) +
                    " polymorphic causal SNPs in distinct blocks");
      }
      const auto j = static_cast<std::size_t>(rng.below(cfg.p));
      if (!polymorphic[j]) continue;
      const auto block = static_cast<std::size_t>(
          std::upper_bound(block_starts.begin(), block_starts.end(), j) - block_starts.begin() - 1);
      if (!used_blocks.insert(block).second) continue;
      t.causal_snps.push_back(j);
    }
    (void)n_poly;
    std::sort(t.causal_snps.begin(), t.causal_snps.end());
    for (std::size_t k = 0; k < cfg.ell; ++k) {
      out.x_tilde.col(static_cast<Eigen::Index>(k)) = full.column_as_double(t.causal_snps[k]);
    }
  } else {
    Dendrogram local;
    if (hierarchy == nullptr) {
      local = causal_hierarchy(full, cfg.bandwidth);
      hierarchy = &local;
    }
    const std::size_t g = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(static_cast<double>(cfg.p) / 20.0)),
        hierarchy->trees(), cfg.p);
    const auto agg = aggregate_raw(full, cut(*hierarchy, g));
    const auto usable = agg.informative_columns();
    if (cfg.ell > usable.size()) {
      throw Error("ell = " + std::to_string(cfg.ell) + " exceeds the " +
                  std::to_string(usable.size()) + " available clusters");
    }
    std::vector<std::size_t> pick = usable;
    for (std::size_t k = 0; k < cfg.ell; ++k) {
      std::swap(pick[k], pick[k + rng.below(pick.size() - k)]);
    }
    pick.resize(cfg.ell);
    std::sort(pick.begin(), pick.end());
    for (std::size_t k = 0; k < cfg.ell; ++k) {
      t.causal_spans.push_back(agg.spans[pick[k]]);
      out.x_tilde.col(static_cast<Eigen::Index>(k)) =
          agg.values.col(static_cast<Eigen::Index>(pick[k]));
    }
  }
  annotate_mask(t, std::vector<bool>(cfg.p, true));
  return out;
}

namespace {

// Mapped SNP nearest in base pairs to SNP j on the same chromosome; ties to
// the smaller position.
std::size_t nearest_mapped_snp(const GroundTruth& t, const std::vector<bool>& mapped,
                               std::size_t j) {
  if (mapped[j]) return j;
  std::size_t best = static_cast<std::size_t>(-1);
  std::int64_t best_dist = std::numeric_limits<std::int64_t>::max();
  // Scan outward; positions increase with index within a chromosome.
  for (std::size_t k = j; k-- > 0;) {
    if (t.chromosomes[k] != t.chromosomes[j]) break;
    if (mapped[k]) {
      best = k;
      best_dist = t.positions[j] - t.positions[k];
      break;
    }
  }
  for (std::size_t k = j + 1; k < mapped.size(); ++k) {
    if (t.chromosomes[k] != t.chromosomes[j]) break;
    if (mapped[k]) {
      if (t.positions[k] - t.positions[j] < best_dist) best = k;
      break;
    }
  }
  if (best == static_cast<std::size_t>(-1)) {
    throw Error("chromosome " + t.chromosomes[j] + " has no mapped SNP");
  }
  return best;
}

}  // namespace

void annotate_mask(GroundTruth& t, const std::vector<bool>& mapped) {
  if (mapped.size() != t.positions.size()) throw Error("mask length does not match the SNP count");
  t.mapped_mask = mapped;
  t.nearest_mapped.clear();
  if (t.scenario == Scenario::single_snp) {
    for (auto j : t.causal_snps) t.nearest_mapped.push_back(nearest_mapped_snp(t, mapped, j));
    return;
  }
  for (const auto& [a, b] : t.causal_spans) {
    std::size_t credit = static_cast<std::size_t>(-1);
    for (std::size_t j = a; j <= b; ++j) {
      if (mapped[j]) {
        credit = j;
        break;
      }
    }
    if (credit == static_cast<std::size_t>(-1)) {
      // No mapped SNP inside the span: closest mapped SNP to either end.
      const auto left = nearest_mapped_snp(t, mapped, a);
      const auto right = nearest_mapped_snp(t, mapped, b);
      const auto dist = [&](std::size_t k) {
        return k < a ? t.positions[a] - t.positions[k] : t.positions[k] - t.positions[b];
      };
      credit = dist(right) < dist(left) ? right : left;
    }
    t.nearest_mapped.push_back(credit);
  }
}

ChipMask mask_to_chip(const GenotypeMatrix& full, double fraction, std::uint64_t seed,
                      GroundTruth* truth) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw Error("chip fraction must lie in (0, 1]");
  const std::size_t p = full.p();
  const auto keep = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(p)));
  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t k = 0; k < keep && k + 1 < p; ++k) {
    std::swap(order[k], order[k + rng.below(p - k)]);
  }
  ChipMask out;
  out.retained.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep));
  std::sort(out.retained.begin(), out.retained.end());
  out.mapped.assign(p, false);
  for (auto j : out.retained) out.mapped[j] = true;

  std::set<std::string> chroms, kept;
  for (std::size_t j = 0; j < p; ++j) {
    chroms.insert(full.snp(j).chromosome);
    if (out.mapped[j]) kept.insert(full.snp(j).chromosome);
  }
  if (kept.size() != chroms.size()) {
    throw Error("chip fraction " + std::to_string(fraction) +
                " leaves a chromosome without any mapped SNP");
  }
  out.genotypes = full.subset_columns(out.retained);
  if (truth != nullptr) annotate_mask(*truth, out.mapped);
  return out;
}

Study simulate_study(const SimConfig& cfg) {
  cfg.validate();
  Study s;
  s.full = simulate_genotypes(cfg);
  s.chip = mask_to_chip(s.full.genotypes, cfg.chip_fraction, derive_seed(cfg.seed, 1));
  Dendrogram hierarchy;
  if (cfg.scenario == Scenario::clus_snp) {
    hierarchy = causal_hierarchy(s.full.genotypes, cfg.bandwidth);
  }
  for (std::size_t r = 0; r < cfg.replicates; ++r) {
    const std::uint64_t base = cfg.seed + r;
    Replicate rep;
    auto design = make_causal(cfg, s.full.genotypes, s.full.block_starts, derive_seed(base, 2),
                              cfg.scenario == Scenario::clus_snp ? &hierarchy : nullptr);
    rep.calibration =
        calibrate_beta(design.x_tilde, cfg.prevalence, cfg.target_mse, derive_seed(base, 3));
    rep.truth = std::move(design.truth);
    rep.truth.beta = rep.calibration.beta;
    annotate_mask(rep.truth, s.chip.mapped);
    rep.phenotype = simulate_phenotype(design.x_tilde, rep.truth.beta0, rep.truth.beta,
                                       derive_seed(base, 4));
    s.replicates.push_back(std::move(rep));
  }
  return s;
}

}  // namespace sasa
