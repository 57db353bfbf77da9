#include <omp.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "json_config.hpp"
#include "manifest.hpp"
#include "sasa/aggregate.hpp"
#include "sasa/association.hpp"
#include "sasa/chac.hpp"
#include "sasa/cutlevel.hpp"
#include "sasa/error.hpp"
#include "sasa/evaluation.hpp"
#include "sasa/genotype.hpp"
#include "sasa/ld.hpp"
#include "sasa/rng.hpp"
#include "sasa/simulate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using sasa::Error;
using sasa::cli::Manifest;

struct Globals {
  std::uint64_t seed = 1;
  int threads = 0;
  std::string out_dir = ".";
  std::vector<std::string> argv;
};

std::ifstream open_input(const std::string& path) {
  if (!fs::is_regular_file(path)) throw Error("input file not found: " + path);
  std::ifstream in(path);
  if (!in) throw Error("cannot open input file: " + path);
  return in;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void close_output(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw Error("failed writing " + path.string());
}

/// Re-reads a written TSV: exact header, consistent field count, optional
/// row count.
void validate_tsv(const fs::path& path, const std::string& header,
                  std::optional<std::size_t> rows = std::nullopt) {
  std::ifstream in(path);
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw Error("output " + path.string() + " has an unexpected header");
  }
  const auto fields = std::count(header.begin(), header.end(), '\t');
  std::size_t count = 0;
  while (std::getline(in, line)) {
    ++count;
    if (std::count(line.begin(), line.end(), '\t') != fields) {
      throw Error("output " + path.string() + " line " + std::to_string(count + 1) +
                  " has the wrong number of fields");
    }
  }
  if (rows && count != *rows) {
    throw Error("output " + path.string() + " has " + std::to_string(count) + " rows, expected " +
                std::to_string(*rows));
  }
}

void write_json(const fs::path& path, const json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
  close_output(out, path);
  std::ifstream back(path);
  if (json::parse(back).is_discarded()) throw Error("output " + path.string() + " is not valid JSON");
}

// ---------------------------------------------------------------------------
// Shared analysis inputs

struct InputOptions {
  std::string genotypes;
  std::string format = "tsv";
  std::string map;
  std::string phenotype;
  std::string covariates;
  std::size_t pcs = 0;

  void add_to(CLI::App* app, bool needs_phenotype) {
    app->add_option("--genotypes", genotypes, "Genotype file (tsv or PLINK .raw)")->required();
    app->add_option("--format", format, "Genotype format")
        ->check(CLI::IsMember({"tsv", "plink_raw"}))
        ->capture_default_str();
    app->add_option("--map", map, "PLINK .map/.bim companion file");
    if (needs_phenotype) {
      app->add_option("--phenotype", phenotype,
                      "Phenotype file (defaults to the PLINK PHENOTYPE column)");
      app->add_option("--covariates", covariates, "Covariate TSV");
      app->add_option("--pcs", pcs, "Principal components added as covariates")
          ->capture_default_str();
    }
  }

  json snapshot() const {
    return {{"genotypes", genotypes}, {"format", format}, {"map", map},
            {"phenotype", phenotype}, {"covariates", covariates}, {"pcs", pcs}};
  }
};

struct AnalysisData {
  sasa::GenotypeMatrix raw;
  sasa::GenotypeMatrix analyzed;  // imputed, monomorphic columns dropped
  std::vector<std::string> dropped;
  sasa::Phenotype y;
  sasa::CovariateMatrix cov;
  bool imputed = false;
};

AnalysisData load_analysis(const InputOptions& o, bool needs_phenotype, Manifest& m) {
  AnalysisData d;
  std::optional<sasa::Phenotype> plink_y;
  {
    auto in = open_input(o.genotypes);
    m.add_input("genotypes", o.genotypes);
    if (o.format == "tsv") {
      if (!o.map.empty()) throw Error("--map only applies to plink_raw input");
      d.raw = sasa::load_genotypes(in, sasa::GenotypeFormat::tsv);
    } else {
      std::optional<std::ifstream> map_in;
      if (!o.map.empty()) {
        map_in.emplace(open_input(o.map));
        m.add_input("map", o.map);
      }
      auto raw = sasa::load_plink_raw(in, map_in ? &*map_in : nullptr);
      d.raw = std::move(raw.genotypes);
      if (needs_phenotype && o.phenotype.empty()) plink_y = sasa::plink_phenotype(raw.phenotype);
    }
  }
  d.imputed = !d.raw.is_complete();
  auto filtered = sasa::drop_monomorphic(d.imputed ? sasa::impute_most_frequent(d.raw) : d.raw);
  d.analyzed = std::move(filtered.matrix);
  d.dropped = std::move(filtered.dropped);
  if (d.analyzed.p() == 0) throw Error("no polymorphic SNPs in " + o.genotypes);
  if (!needs_phenotype) return d;

  if (!o.phenotype.empty()) {
    auto in = open_input(o.phenotype);
    m.add_input("phenotype", o.phenotype);
    d.y = sasa::load_phenotype(in);
  } else if (plink_y) {
    d.y = *plink_y;
  } else {
    throw Error("--phenotype is required for tsv genotypes");
  }
  if (d.y.size() != d.analyzed.n()) {
    throw Error("phenotype has " + std::to_string(d.y.size()) + " rows but genotypes have " +
                std::to_string(d.analyzed.n()));
  }

  Eigen::MatrixXd values(static_cast<Eigen::Index>(d.analyzed.n()), 0);
  std::vector<std::string> labels;
  if (!o.covariates.empty()) {
    auto in = open_input(o.covariates);
    m.add_input("covariates", o.covariates);
    const auto c = sasa::load_covariates(in);
    if (c.rows() != d.analyzed.n()) throw Error("covariate rows do not match genotype rows");
    values = c.values;
    labels = c.labels;
  }
  if (o.pcs > 0) {
    const auto pc = sasa::pca_covariates(d.analyzed, o.pcs);
    Eigen::MatrixXd both(values.rows(), values.cols() + pc.values.cols());
    both << values, pc.values;
    values = std::move(both);
    labels.insert(labels.end(), pc.labels.begin(), pc.labels.end());
  }
  d.cov = labels.empty() ? sasa::CovariateMatrix::empty(d.analyzed.n())
                         : sasa::CovariateMatrix(std::move(values), std::move(labels));
  return d;
}

void record_qc(Manifest& m, const AnalysisData& d) {
  m.results()["individuals"] = d.analyzed.n();
  m.results()["snps_input"] = d.raw.p();
  m.results()["snps_analyzed"] = d.analyzed.p();
  m.results()["imputed_missing_calls"] = d.imputed;
  m.results()["dropped_monomorphic"] = d.dropped;
}

Manifest new_manifest(const std::string& command, const Globals& g) {
  Manifest m(command, g.out_dir);
  m.config()["argv"] = g.argv;
  m.config()["threads"] = g.threads;
  m.seeds()["seed"] = g.seed;
  return m;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOptions {
  sasa::SimConfig cfg;
  std::string scenario = "clusSNP";
  std::vector<double> maf_range = {0.05, 0.5};
};

void cmd_simulate(const SimulateOptions& o, const Globals& g) {
  sasa::SimConfig cfg = o.cfg;
  cfg.scenario = sasa::scenario_from_string(o.scenario);
  cfg.maf_low = o.maf_range.at(0);
  cfg.maf_high = o.maf_range.at(1);
  cfg.seed = g.seed;
  cfg.validate();

  const auto study = sasa::simulate_study(cfg);
  const fs::path dir = g.out_dir;
  auto m = new_manifest("simulate", g);
  m.config()["simulation"] = cfg;
  m.seeds()["genotypes"] = sasa::derive_seed(cfg.seed, 0);
  m.seeds()["chip_mask"] = sasa::derive_seed(cfg.seed, 1);

  {
    const auto path = dir / "genotypes.tsv";
    auto out = open_output(path);
    sasa::write_genotypes(out, study.chip.genotypes);
    close_output(out, path);
    std::ifstream back(path);
    const auto reread = sasa::load_genotypes(back, sasa::GenotypeFormat::tsv);
    if (reread.n() != cfg.n || reread.p() != study.chip.genotypes.p()) {
      throw Error("output " + path.string() + " does not round-trip");
    }
    m.add_output("genotypes.tsv");
  }
  json reps = json::array();
  for (std::size_t r = 0; r < study.replicates.size(); ++r) {
    const auto& rep = study.replicates[r];
    const std::string tag = "_r" + std::to_string(r + 1);
    const auto pheno = "phenotype" + tag + ".txt";
    const auto truth = "truth" + tag + ".json";
    {
      auto out = open_output(dir / pheno);
      sasa::write_phenotype(out, rep.phenotype);
      close_output(out, dir / pheno);
      std::ifstream back(dir / pheno);
      if (sasa::load_phenotype(back).size() != cfg.n) {
        throw Error("output " + (dir / pheno).string() + " does not round-trip");
      }
    }
    write_json(dir / truth, json(rep.truth));
    m.add_output(pheno);
    m.add_output(truth);
    const std::uint64_t base = cfg.seed + r;
    reps.push_back({{"replicate", r + 1},
                    {"seeds",
                     {{"causal", sasa::derive_seed(base, 2)},
                      {"calibration", sasa::derive_seed(base, 3)},
                      {"phenotype", sasa::derive_seed(base, 4)}}},
                    {"beta0", rep.truth.beta0},
                    {"beta", rep.calibration.beta},
                    {"calibration_mse", rep.calibration.mse},
                    {"cases", rep.phenotype.cases()}});
  }
  m.results()["replicates"] = reps;
  m.results()["snps_full"] = cfg.p;
  m.results()["snps_chip"] = study.chip.genotypes.p();
  m.results()["true_blocks"] = study.full.block_starts.size();
  m.write();
}

// ---------------------------------------------------------------------------
// cluster

struct ClusterOptions {
  InputOptions input;
  std::size_t bandwidth = 500;
};

void cmd_cluster(const ClusterOptions& o, const Globals& g) {
  auto m = new_manifest("cluster", g);
  m.config()["input"] = o.input.snapshot();
  m.config()["bandwidth"] = o.bandwidth;
  const auto data = load_analysis(o.input, false, m);
  const auto& x = data.analyzed;
  const auto tree = sasa::build(sasa::ld_band(x, o.bandwidth), x.chromosome_barriers());

  const fs::path path = fs::path(g.out_dir) / "dendrogram.tsv";
  auto out = open_output(path);
  sasa::write_dendrogram(out, tree);
  close_output(out, path);
  validate_tsv(path, "step\tleft\tright\theight\tsize", tree.merges.size());
  m.add_output("dendrogram.tsv");

  record_qc(m, data);
  json ids = json::array();
  for (const auto& s : x.snps()) ids.push_back(s.id);
  m.results()["leaf_ids"] = ids;
  m.results()["chromosome_barriers"] = x.chromosome_barriers();
  m.write();
}

// ---------------------------------------------------------------------------
// cutlevel

struct CutLevelCliOptions {
  InputOptions input;
  std::vector<std::size_t> grid;
  double split_fraction = 2.0 / 3.0;
  std::vector<double> lambdas = sasa::CutLevelOptions{}.lambdas;
  std::size_t inner_folds = 5;
  std::size_t bandwidth = 500;

  void add_to(CLI::App* app) {
    input.add_to(app, true);
    app->add_option("--grid", grid, "Candidate cluster counts (default: geometric grid)");
    app->add_option("--split-fraction", split_fraction, "Training share of each class")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    app->add_option("--lambdas", lambdas, "Ridge penalty candidates")->capture_default_str();
    app->add_option("--inner-folds", inner_folds, "Inner cross-validation folds")
        ->capture_default_str();
    app->add_option("--bandwidth", bandwidth, "LD band width in SNPs")->capture_default_str();
  }

  sasa::CutLevelOptions to_options(std::uint64_t seed) const {
    sasa::CutLevelOptions c;
    c.grid = grid;
    c.split_fraction = split_fraction;
    c.seed = seed;
    c.bandwidth = bandwidth;
    c.lambdas = lambdas;
    c.inner_folds = inner_folds;
    return c;
  }

  json snapshot() const {
    return {{"input", input.snapshot()},    {"grid", grid},
            {"split_fraction", split_fraction}, {"lambdas", lambdas},
            {"inner_folds", inner_folds},   {"bandwidth", bandwidth}};
  }
};

json levels_json(const sasa::CutLevelResult& r) {
  json levels = json::array();
  for (const auto& c : r.candidates) {
    levels.push_back({{"G", c.g}, {"auc", c.auc}, {"lambda", c.lambda}, {"inner_auc", c.inner_auc}});
  }
  return levels;
}

void cmd_cutlevel(const CutLevelCliOptions& o, const Globals& g) {
  auto m = new_manifest("cutlevel", g);
  m.config()["analysis"] = o.snapshot();
  const auto data = load_analysis(o.input, true, m);
  const auto run = sasa::select_cut_level(data.analyzed, data.y, data.cov, o.to_options(g.seed));

  const fs::path path = fs::path(g.out_dir) / "auc_curve.tsv";
  auto out = open_output(path);
  sasa::write_auc_curve(out, run.result);
  close_output(out, path);
  validate_tsv(path, "G\tauc", run.result.candidates.size());
  m.add_output("auc_curve.tsv");

  m.seeds()["split"] = run.result.split.seed;
  record_qc(m, data);
  m.results()["best_level"] = run.result.best_level;
  m.results()["levels"] = levels_json(run.result);
  m.results()["train_rows"] = run.result.split.train.size();
  m.results()["test_rows"] = run.result.split.test.size();
  m.write();
}

// ---------------------------------------------------------------------------
// assoc

struct AssocOptions {
  CutLevelCliOptions cut;
  std::string mode = "sasa";
  double phi = 0.05;
  std::string correction = "bh";
  std::string cutlevel_manifest;
};

void cmd_assoc(const AssocOptions& o, const Globals& g) {
  auto m = new_manifest("assoc", g);
  m.config()["analysis"] = o.cut.snapshot();
  m.config()["mode"] = o.mode;
  m.config()["phi"] = o.phi;
  m.config()["correction"] = o.correction;
  m.config()["cutlevel_manifest"] = o.cutlevel_manifest;
  const auto data = load_analysis(o.cut.input, true, m);
  const auto method =
      o.correction == "bh" ? sasa::Multiplicity::bh : sasa::Multiplicity::bonferroni;

  sasa::AssociationResult res;
  if (o.mode == "sma") {
    res = sasa::run_sma(data.analyzed, data.y, data.cov, o.phi, method);
  } else {
    auto opts = o.cut.to_options(g.seed);
    if (!o.cutlevel_manifest.empty()) {
      // Reuse the chosen level: same split seed, a single level and lambda.
      auto in = open_input(o.cutlevel_manifest);
      m.add_manifest_input("cutlevel_manifest", o.cutlevel_manifest);
      const auto prior = json::parse(in);
      const auto best = prior.at("results").at("best_level").get<std::size_t>();
      opts.seed = prior.at("seeds").at("seed").get<std::uint64_t>();
      opts.grid = {best};
      for (const auto& level : prior.at("results").at("levels")) {
        if (level.at("G").get<std::size_t>() == best) {
          opts.lambdas = {level.at("lambda").get<double>()};
        }
      }
      m.seeds()["seed"] = opts.seed;
    }
    const auto run = sasa::select_cut_level(data.analyzed, data.y, data.cov, opts);
    res = sasa::run_sasa(run.best, data.analyzed.snps(), data.y, data.cov, o.phi, method);
    m.seeds()["split"] = run.result.split.seed;
    m.results()["best_level"] = run.result.best_level;
    m.results()["levels"] = levels_json(run.result);
  }

  const fs::path dir = g.out_dir;
  {
    auto out = open_output(dir / "results.tsv");
    sasa::write_results(out, res);
    close_output(out, dir / "results.tsv");
    validate_tsv(dir / "results.tsv", "id\tchrom\tpos_first\tpos_last\tstatistic\tp\tsignificant",
                 res.records.size());
    m.add_output("results.tsv");
  }
  std::size_t separated = 0;
  json skipped = json::object();
  for (const auto& r : res.records) {
    if (r.separated) ++separated;
    if (!r.skip_reason.empty()) skipped[r.skip_reason] = skipped.value(r.skip_reason, 0) + 1;
  }
  const json summary = {{"mode", o.mode},
                        {"correction", o.correction},
                        {"level", o.phi},
                        {"records", res.records.size()},
                        {"tested", res.tested()},
                        {"significant", res.significant()},
                        {"threshold", res.threshold},
                        {"separated", separated},
                        {"skipped", skipped},
                        {"covariates", data.cov.labels}};
  write_json(dir / "summary.json", summary);
  m.add_output("summary.json");
  record_qc(m, data);
  m.write();
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateOptions {
  std::vector<std::string> results;
  std::vector<std::string> truths;
  std::string method = "sasa";
  std::vector<std::string> units;
};

void cmd_evaluate(const EvaluateOptions& o, const Globals& g) {
  if (o.results.size() != o.truths.size()) {
    throw Error("--results and --truth must be given the same number of times");
  }
  auto m = new_manifest("evaluate", g);
  const auto method = sasa::method_from_string(o.method);
  std::vector<std::string> unit_names = o.units;
  if (unit_names.empty()) {
    unit_names = {"snp_level"};
    if (method == sasa::Method::sasa) unit_names.push_back("cluster_level");
  }
  m.config()["method"] = o.method;
  m.config()["units"] = unit_names;
  m.config()["results"] = o.results;
  m.config()["truth"] = o.truths;

  std::vector<sasa::AssociationResult> results;
  std::vector<sasa::GroundTruth> truths;
  for (std::size_t k = 0; k < o.results.size(); ++k) {
    auto rin = open_input(o.results[k]);
    auto tin = open_input(o.truths[k]);
    m.add_input("results", o.results[k]);
    m.add_input("truth", o.truths[k]);
    results.push_back(sasa::read_results(rin));
    truths.push_back(json::parse(tin).get<sasa::GroundTruth>());
    if (truths.back().scenario != truths.front().scenario || truths.back().ell != truths.front().ell) {
      throw Error("ground truths mix scenarios or causal counts: " + o.truths[k]);
    }
  }

  std::vector<sasa::ScoreRow> rows;
  json counts = json::array();
  for (const auto& name : unit_names) {
    const auto unit = sasa::unit_from_string(name);
    std::vector<sasa::ConfusionCounts> per;
    for (std::size_t k = 0; k < results.size(); ++k) {
      per.push_back(sasa::match_results(results[k], truths[k], method, unit));
      const auto& c = per.back();
      counts.push_back({{"replicate", k + 1}, {"unit", name}, {"tp", c.tp}, {"fp", c.fp},
                        {"tn", c.tn}, {"fn", c.fn}});
    }
    rows.push_back(sasa::average_scores(sasa::to_string(truths.front().scenario),
                                        truths.front().ell, method, unit, per));
  }

  const fs::path path = fs::path(g.out_dir) / "scores.tsv";
  auto out = open_output(path);
  sasa::write_scores(out, rows);
  close_output(out, path);
  validate_tsv(path, "scenario\tell\tmethod\tunit\trecall\tprecision\tn_replicates", rows.size());
  m.add_output("scores.tsv");
  m.results()["confusion"] = counts;
  m.write();
}

/// Subcommand named on the command line, used as the default config section.
std::string find_subcommand(int argc, char** argv, const std::set<std::string>& names) {
  for (int i = 1; i < argc; ++i) {
    if (names.count(argv[i])) return argv[i];
  }
  return {};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Supervised adjacency-constrained SNP aggregation for association studies"};
  app.require_subcommand(1);
  app.allow_config_extras(CLI::config_extras_mode::error);

  Globals g;
  g.argv.assign(argv, argv + argc);
  app.add_option("--seed", g.seed, "Base random seed")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker thread cap (0: runtime default)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--out-dir", g.out_dir, "Output directory")->capture_default_str();
  const std::set<std::string> commands = {"simulate", "cluster", "cutlevel", "assoc", "evaluate"};
  app.config_formatter(
      std::make_shared<sasa::cli::JsonConfig>(find_subcommand(argc, argv, commands)));
  app.set_config("--config", "", "JSON config; keys mirror long option names");

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate a genotype/phenotype bundle");
  simulate->add_option("--n", sim.cfg.n, "Individuals")->capture_default_str();
  simulate->add_option("--p", sim.cfg.p, "SNPs before masking")->capture_default_str();
  simulate->add_option("--block-size-mean", sim.cfg.block_size_mean)->capture_default_str();
  simulate->add_option("--block-size-jitter", sim.cfg.block_size_jitter)->capture_default_str();
  simulate->add_option("--within-block-r2", sim.cfg.within_block_r2)->capture_default_str();
  simulate->add_option("--maf-range", sim.maf_range, "Minor allele frequency range")
      ->expected(2)
      ->capture_default_str();
  simulate->add_option("--scenario", sim.scenario)
      ->check(CLI::IsMember({"singleSNP", "clusSNP"}))
      ->capture_default_str();
  simulate->add_option("--ell", sim.cfg.ell, "Causal units")->capture_default_str();
  simulate->add_option("--prevalence", sim.cfg.prevalence)->capture_default_str();
  simulate->add_option("--chip-fraction", sim.cfg.chip_fraction)->capture_default_str();
  simulate->add_option("--target-mse", sim.cfg.target_mse)->capture_default_str();
  simulate->add_option("--replicates", sim.cfg.replicates)->capture_default_str();
  simulate->add_option("--bandwidth", sim.cfg.bandwidth)->capture_default_str();

  ClusterOptions clu;
  auto* cluster = app.add_subcommand("cluster", "Build the constrained Ward dendrogram");
  clu.input.add_to(cluster, false);
  cluster->add_option("--bandwidth", clu.bandwidth, "LD band width in SNPs")->capture_default_str();

  CutLevelCliOptions cut;
  auto* cutlevel = app.add_subcommand("cutlevel", "Select the cut level by held-out AUC");
  cut.add_to(cutlevel);

  AssocOptions as;
  auto* assoc = app.add_subcommand("assoc", "Association testing (single SNPs or clusters)");
  as.cut.add_to(assoc);
  assoc->add_option("--mode", as.mode)->check(CLI::IsMember({"sma", "sasa"}))->capture_default_str();
  assoc->add_option("--phi", as.phi, "FDR or family-wise level")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  assoc->add_option("--correction", as.correction)
      ->check(CLI::IsMember({"bh", "bonferroni"}))
      ->capture_default_str();
  assoc->add_option("--cutlevel-manifest", as.cutlevel_manifest,
                    "Reuse the level chosen by a cutlevel run");

  EvaluateOptions ev;
  auto* evaluate = app.add_subcommand("evaluate", "Score results against ground truth");
  evaluate->add_option("--results", ev.results, "results.tsv (repeatable)")->required();
  evaluate->add_option("--truth", ev.truths, "truth JSON, paired with --results")->required();
  evaluate->add_option("--method", ev.method)
      ->check(CLI::IsMember({"sma", "sasa"}))
      ->capture_default_str();
  evaluate->add_option("--unit", ev.units)->check(CLI::IsMember({"snp_level", "cluster_level"}));

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (g.threads > 0) omp_set_num_threads(g.threads);
    fs::create_directories(g.out_dir);
    if (*simulate) cmd_simulate(sim, g);
    if (*cluster) cmd_cluster(clu, g);
    if (*cutlevel) cmd_cutlevel(cut, g);
    if (*assoc) cmd_assoc(as, g);
    if (*evaluate) cmd_evaluate(ev, g);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
