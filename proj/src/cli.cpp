#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "amc/harness.hpp"

namespace amc {

namespace {

void write_file_or_throw(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

std::string summary_path_for(const std::string& out_path) {
  const auto dot = out_path.rfind('.');
  if (dot == std::string::npos) return out_path + ".summary.csv";
  return out_path.substr(0, dot) + ".summary" + out_path.substr(dot);
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Blind modulation-level classification experiments (CMA-rcK and baselines)"};

  std::string channel = "ch1";
  std::string mod = "qam";
  std::string levels_spec;
  std::string snr_spec = "0:5:20";
  std::string classifiers_spec = "cma-rck";
  std::string out_path = "results.csv";
  std::string cache_dir = "tables_cache";
  std::string dump_cdf_path;
  int realizations = 500;
  int eq_length = 20;
  int updates = 200;
  double mu = 1e-4;
  double lzf_tolerance = 1e-4;
  std::uint64_t seed = 1;
  bool fig1 = false;
  bool rebuild_tables = false;
  bool no_build = false;
  bool serial = false;
  bool meta = false;

  app.add_option("--channel", channel, "ch1 | ch2 | ch3 | path to a taps file ('re im' per line)");
  app.add_option("--mod", mod, "qam | psk");
  app.add_option("--levels", levels_spec, "candidate orders, e.g. 4,16,64 (default per --mod)");
  app.add_option("--snr", snr_spec, "SNR grid in dB: min:step:max or one value");
  app.add_option("--classifiers", classifiers_spec, "subset of cma-rck,zf-rck,c63");
  app.add_option("--realizations", realizations, "Monte Carlo realizations per SNR point");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--out", out_path, "confusion CSV output path");
  app.add_option("--L", eq_length, "equalizer length");
  app.add_option("--M", updates, "CMA tap updates / equalized outputs");
  app.add_option("--mu", mu, "CMA step size");
  app.add_option("--lzf-tolerance", lzf_tolerance, "ZF truncation tolerance");
  app.add_option("--cache-dir", cache_dir, "table cache directory ('' disables caching)");
  app.add_option("--dump-cdf", dump_cdf_path, "also dump the CDF tables to this directory");
  app.add_flag("--fig1", fig1, "run the CDF-match experiment instead of a sweep");
  app.add_flag("--rebuild-tables", rebuild_tables, "ignore any cached tables");
  app.add_flag("--no-build", no_build, "fail if the table cache is missing");
  app.add_flag("--serial", serial, "disable OpenMP worker parallelism");
  app.add_flag("--meta", meta, "write a JSON config sidecar next to --out");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (fig1) {
      Fig1Config cfg;
      cfg.equalizer_length = eq_length;
      cfg.mu = mu;
      cfg.seed = seed;
      if (channel != "ch3" && channel != "ch1" && channel != "ch2") {
        cfg.taps = load_channel_file(channel).taps;
      } else if (channel != "ch3") {
        throw std::invalid_argument("--fig1 wants ch3 or a custom taps file");
      }
      const Fig1Result res = run_fig1(cfg);
      write_file_or_throw(out_path, fig1_to_csv(res));
      for (const auto& p : res.points)
        std::printf("snr %5.1f dB: sup|ECDF-CDF| full=%.4f no-isi=%.4f (sigma2 %.5f / %.5f)\n",
                    p.snr_db, p.sup_full, p.sup_no_isi, p.sigma2_full, p.sigma2_no_isi);
      std::printf("curves written to %s\n", out_path.c_str());
      return 0;
    }

    ExperimentConfig cfg;
    cfg.mod_class = mod_class_from_name(mod);
    cfg.levels = levels_spec.empty()
                     ? (cfg.mod_class == ModClass::Qam ? std::vector<int>{4, 16, 64}
                                                       : std::vector<int>{2, 4, 8})
                     : parse_levels(levels_spec);
    if (channel == "ch1") {
      cfg.channel = ChannelModel::Ch1;
    } else if (channel == "ch2") {
      cfg.channel = ChannelModel::Ch2;
    } else if (channel == "ch3") {
      cfg.channel = ChannelModel::Ch3;
    } else {
      cfg.channel = ChannelModel::Custom;
      cfg.custom_taps = load_channel_file(channel).taps;
    }
    cfg.snr_grid_db = parse_snr_spec(snr_spec);
    cfg.classifiers = parse_classifiers(classifiers_spec);
    cfg.realizations = realizations;
    cfg.master_seed = seed;
    cfg.equalizer_length = eq_length;
    cfg.updates = updates;
    cfg.mu = mu;
    cfg.zf_tolerance = lzf_tolerance;
    cfg.parallel = !serial;
    cfg.output_path = out_path;
    validate(cfg);

    const TableSet tables = load_or_build_tables(cfg.mod_class, cfg.levels, TableGrid{}, cache_dir,
                                                 rebuild_tables, !no_build, cfg.parallel);
    if (!dump_cdf_path.empty()) save_table_set(tables, dump_cdf_path);

    const ExperimentResult res = run_experiment(cfg, tables);
    write_file_or_throw(out_path, results_to_csv(res));
    write_file_or_throw(summary_path_for(out_path), summary_to_csv(res));
    if (meta) write_file_or_throw(out_path + ".meta.json", metadata_json(cfg));

    for (const auto& s : res.summary)
      std::printf("%-8s snr %5.1f dB: Pc = %.4f +- %.4f (n=%ld)\n", classifier_name(s.classifier),
                  s.snr_db, s.pc, s.ci_halfwidth, s.n);
    std::printf("results written to %s\n", out_path.c_str());
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace amc
