#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "amc/analysis.hpp"
#include "amc/channel.hpp"
#include "amc/classifier.hpp"
#include "amc/distributions.hpp"
#include "amc/signals.hpp"

namespace amc {

enum class ClassifierId { CmaRck, ZfRck, C63 };

const char* classifier_name(ClassifierId id);
ClassifierId classifier_from_name(const std::string& name);

struct ExperimentConfig {
  ModClass mod_class = ModClass::Qam;
  std::vector<int> levels{4, 16, 64};
  ChannelModel channel = ChannelModel::Ch1;
  std::vector<cxd> custom_taps;  // used when channel == Custom
  std::vector<double> snr_grid_db{0, 5, 10, 15, 20};
  int equalizer_length = 20;  // L
  int updates = 200;          // M
  double mu = 1e-4;
  int realizations = 500;
  std::uint64_t master_seed = 1;
  std::vector<ClassifierId> classifiers{ClassifierId::CmaRck};
  std::string output_path = "results.csv";
  double zf_tolerance = 1e-4;
  bool parallel = true;
};

// Throws std::invalid_argument on inconsistent configs (e.g. C63 with PSK).
void validate(const ExperimentConfig& cfg);

struct ConfusionRow {
  ChannelModel channel;
  ModClass mod_class;
  double snr_db;
  ClassifierId classifier;
  int true_level;
  int predicted_level;
  long count;
};

struct SummaryRow {
  ClassifierId classifier;
  double snr_db;
  double pc;
  double ci_halfwidth;  // Wilson 95% interval halfwidth
  long n;
};

struct ExperimentResult {
  std::vector<ConfusionRow> rows;
  std::vector<SummaryRow> summary;
};

// Monte Carlo sweep: per realization draw a channel and a true level, send
// M*L symbols (plus warm-up prefix), and run every configured classifier on
// the identical received block. Per-realization seeds derive from the master
// seed and the realization index, so output is byte-identical for any worker
// count. True levels are assigned in round-robin order so per-level counts
// split evenly.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const TableSet& tables);

std::string results_to_csv(const ExperimentResult& res);
std::string summary_to_csv(const ExperimentResult& res);
std::string metadata_json(const ExperimentConfig& cfg);

struct Fig1Config {
  std::vector<cxd> taps{cxd{1.0, 0.0}, cxd{0.0, 0.0}, cxd{0.9, 0.0}};  // ch-3
  int level = 16;             // QAM order
  int equalizer_length = 20;  // L
  int zf_length = 90;         // L_zf
  double mu = 1e-4;
  int outputs = 10000;  // equalized outputs (CMA updates)
  std::vector<double> snrs_db{0.0, 20.0};
  std::uint64_t seed = 1;
};

struct Fig1Point {
  double snr_db;
  double sup_full;     // sup |ECDF(|y_eq|) - CDF(|s+eps|)|, full sigma2_eps
  double sup_no_isi;   // same with the residual-ISI term removed
  double sigma2_full;
  double sigma2_no_isi;
};

struct Fig1Curve {
  double snr_db;
  std::string name;  // "empirical" / "model_full" / "model_no_isi"
  std::vector<double> tau;
  std::vector<double> value;
};

struct Fig1Result {
  std::vector<Fig1Point> points;
  std::vector<Fig1Curve> curves;
};

Fig1Result run_fig1(const Fig1Config& cfg);
std::string fig1_to_csv(const Fig1Result& res);

// On-disk cache of CDF/testpoint tables, keyed by level set and grid.
std::string table_cache_key(ModClass mod, const std::vector<int>& levels, const TableGrid& grid);
void save_table_set(const TableSet& set, const std::string& dir);
TableSet load_table_set(ModClass mod, const std::vector<int>& levels, const TableGrid& grid,
                        const std::string& dir);
// Loads from cache_root when present, otherwise builds (and caches unless
// cache_root is empty). allow_build=false turns a missing cache into an error.
TableSet load_or_build_tables(ModClass mod, const std::vector<int>& levels, const TableGrid& grid,
                              const std::string& cache_root, bool rebuild = false,
                              bool allow_build = true, bool parallel = true);

// "min:step:max" (inclusive) or a single value; throws on empty grids.
std::vector<double> parse_snr_spec(const std::string& spec);
std::vector<int> parse_levels(const std::string& spec);
std::vector<ClassifierId> parse_classifiers(const std::string& spec);

int cli_main(int argc, char** argv);

}  // namespace amc
