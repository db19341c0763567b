#include "amc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "amc/rng.hpp"

namespace amc {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

const char* classifier_name(ClassifierId id) {
  switch (id) {
    case ClassifierId::CmaRck: return "cma-rck";
    case ClassifierId::ZfRck: return "zf-rck";
    default: return "c63";
  }
}

ClassifierId classifier_from_name(const std::string& name) {
  if (name == "cma-rck") return ClassifierId::CmaRck;
  if (name == "zf-rck") return ClassifierId::ZfRck;
  if (name == "c63") return ClassifierId::C63;
  throw std::invalid_argument("unknown classifier: " + name);
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.levels.empty()) throw std::invalid_argument("config: empty level set");
  if (!std::is_sorted(cfg.levels.begin(), cfg.levels.end()))
    throw std::invalid_argument("config: levels must be ascending");
  if (cfg.snr_grid_db.empty()) throw std::invalid_argument("config: empty SNR grid");
  if (cfg.realizations < 1) throw std::invalid_argument("config: realizations must be >= 1");
  if (cfg.equalizer_length < 1 || cfg.updates < 1 || cfg.mu <= 0.0)
    throw std::invalid_argument("config: bad equalizer parameters");
  if (cfg.classifiers.empty()) throw std::invalid_argument("config: no classifiers selected");
  if (cfg.mod_class == ModClass::Psk)
    for (auto c : cfg.classifiers)
      if (c == ClassifierId::C63)
        throw std::invalid_argument("config: cumulant baseline unsupported for PSK levels");
  if (cfg.channel == ChannelModel::Custom && cfg.custom_taps.empty())
    throw std::invalid_argument("config: custom channel without taps");
}

namespace {

struct RealizationOutcome {
  int true_level = 0;
  int predicted[3] = {0, 0, 0};  // indexed by position in cfg.classifiers
};

RealizationOutcome run_one_realization(const ExperimentConfig& cfg, double snr_db,
                                       const std::vector<Constellation>& constellations,
                                       const TableSet& tables, int realization_index) {
  Rng rng(derive_seed(cfg.master_seed, static_cast<std::uint64_t>(realization_index)));

  ChannelRealization h;
  if (cfg.channel == ChannelModel::Custom) {
    h.taps = cfg.custom_taps;
    h.model_id = ChannelModel::Custom;
  } else {
    h = sample_channel(cfg.channel, rng);
  }

  const int level_idx = realization_index % static_cast<int>(constellations.size());
  const Constellation& c = constellations[level_idx];

  const std::size_t n_samples =
      static_cast<std::size_t>(cfg.updates) * cfg.equalizer_length + h.length() - 1;
  const std::vector<cxd> symbols = draw_symbols(c, n_samples, rng);
  const double sigma2_v = noise_var_for_snr_db(snr_db);
  const ReceivedBlock block = transmit(symbols, h, NoiseSpec{sigma2_v}, rng);

  const CmaConfig cma_cfg{cfg.equalizer_length, cfg.mu, cfg.updates, {}};
  const ZfOptions zf_opt{cfg.zf_tolerance, 512, std::nullopt, cfg.equalizer_length};

  RealizationOutcome out;
  out.true_level = c.order;
  for (std::size_t ci = 0; ci < cfg.classifiers.size(); ++ci) {
    switch (cfg.classifiers[ci]) {
      case ClassifierId::CmaRck: {
        const EqualizerRun run = cma_run(block.x, sigma2_v, cma_cfg);
        out.predicted[ci] = rck_classify(run.y_eq, tables.kind, run.gamma_hat, tables).chosen_level;
        break;
      }
      case ClassifierId::ZfRck:
        out.predicted[ci] =
            zf_rck_classify(block.x, h, sigma2_v, cma_cfg, tables, zf_opt).chosen_level;
        break;
      case ClassifierId::C63:
        out.predicted[ci] = cumulant_classify(block.x, constellations).chosen_level;
        break;
    }
  }
  return out;
}

double wilson_halfwidth(double p, long n) {
  if (n <= 0) return 0.0;
  const double z = 1.959963984540054;
  const double z2n = z * z / static_cast<double>(n);
  return z / (1.0 + z2n) *
         std::sqrt(p * (1.0 - p) / static_cast<double>(n) + z2n / (4.0 * static_cast<double>(n)));
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const TableSet& tables) {
  validate(cfg);
  if (tables.levels != cfg.levels || tables.mod_class != cfg.mod_class)
    throw std::invalid_argument("run_experiment: table set does not match the config levels");

  std::vector<Constellation> constellations;
  constellations.reserve(cfg.levels.size());
  for (int order : cfg.levels) constellations.push_back(build_constellation(cfg.mod_class, order));

  const int n_snr = static_cast<int>(cfg.snr_grid_db.size());
  const int n_real = cfg.realizations;
  std::vector<RealizationOutcome> outcomes(static_cast<std::size_t>(n_snr) * n_real);

  // Outcome slots are pre-assigned; any iteration order gives the same table.
  for (int si = 0; si < n_snr; ++si) {
    const double snr_db = cfg.snr_grid_db[si];
#pragma omp parallel for schedule(dynamic, 8) if (cfg.parallel)
    for (int r = 0; r < n_real; ++r) {
      outcomes[static_cast<std::size_t>(si) * n_real + r] =
          run_one_realization(cfg, snr_db, constellations, tables, r);
    }
  }

  // key: (snr index, classifier index, true level, predicted level)
  std::map<std::tuple<int, int, int, int>, long> counts;
  for (int si = 0; si < n_snr; ++si)
    for (int r = 0; r < n_real; ++r) {
      const auto& o = outcomes[static_cast<std::size_t>(si) * n_real + r];
      for (std::size_t ci = 0; ci < cfg.classifiers.size(); ++ci)
        ++counts[{si, static_cast<int>(ci), o.true_level, o.predicted[ci]}];
    }

  ExperimentResult res;
  for (const auto& [key, count] : counts) {
    const auto [si, ci, true_level, predicted] = key;
    res.rows.push_back({cfg.channel, cfg.mod_class, cfg.snr_grid_db[si], cfg.classifiers[ci],
                        true_level, predicted, count});
  }
  std::sort(res.rows.begin(), res.rows.end(), [](const ConfusionRow& a, const ConfusionRow& b) {
    return std::tuple(a.snr_db, classifier_name(a.classifier), a.true_level, a.predicted_level) <
           std::tuple(b.snr_db, classifier_name(b.classifier), b.true_level, b.predicted_level);
  });

  for (std::size_t ci = 0; ci < cfg.classifiers.size(); ++ci) {
    for (int si = 0; si < n_snr; ++si) {
      long correct = 0, total = 0;
      for (const auto& [key, count] : counts) {
        const auto [ksi, kci, true_level, predicted] = key;
        if (ksi != si || kci != static_cast<int>(ci)) continue;
        total += count;
        if (true_level == predicted) correct += count;
      }
      const double pc = total > 0 ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
      res.summary.push_back(
          {cfg.classifiers[ci], cfg.snr_grid_db[si], pc, wilson_halfwidth(pc, total), total});
    }
  }
  std::sort(res.summary.begin(), res.summary.end(), [](const SummaryRow& a, const SummaryRow& b) {
    return std::tuple(std::string(classifier_name(a.classifier)), a.snr_db) <
           std::tuple(std::string(classifier_name(b.classifier)), b.snr_db);
  });
  return res;
}

std::string results_to_csv(const ExperimentResult& res) {
  std::ostringstream out;
  out << "channel_model,mod_class,snr_db,classifier,true_level,predicted_level,count\n";
  for (const auto& r : res.rows)
    out << channel_model_name(r.channel) << ',' << mod_class_name(r.mod_class) << ','
        << fmt_short(r.snr_db) << ',' << classifier_name(r.classifier) << ',' << r.true_level
        << ',' << r.predicted_level << ',' << r.count << '\n';
  return out.str();
}

std::string summary_to_csv(const ExperimentResult& res) {
  std::ostringstream out;
  out << "classifier,snr_db,pc,ci_halfwidth,n\n";
  for (const auto& s : res.summary)
    out << classifier_name(s.classifier) << ',' << fmt_short(s.snr_db) << ',' << fmt_double(s.pc)
        << ',' << fmt_double(s.ci_halfwidth) << ',' << s.n << '\n';
  return out.str();
}

std::string metadata_json(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "{\n";
  out << "  \"version\": \"amc 0.1.0\",\n";
  out << "  \"mod_class\": \"" << mod_class_name(cfg.mod_class) << "\",\n";
  out << "  \"levels\": [";
  for (std::size_t i = 0; i < cfg.levels.size(); ++i)
    out << (i ? "," : "") << cfg.levels[i];
  out << "],\n";
  out << "  \"channel\": \"" << channel_model_name(cfg.channel) << "\",\n";
  out << "  \"snr_db\": [";
  for (std::size_t i = 0; i < cfg.snr_grid_db.size(); ++i)
    out << (i ? "," : "") << fmt_short(cfg.snr_grid_db[i]);
  out << "],\n";
  out << "  \"snr_definition\": \"snr = 1/noise_variance at unit transmit power\",\n";
  out << "  \"equalizer_length\": " << cfg.equalizer_length << ",\n";
  out << "  \"updates\": " << cfg.updates << ",\n";
  out << "  \"mu\": " << fmt_double(cfg.mu) << ",\n";
  out << "  \"realizations\": " << cfg.realizations << ",\n";
  out << "  \"master_seed\": " << cfg.master_seed << ",\n";
  out << "  \"classifiers\": [";
  for (std::size_t i = 0; i < cfg.classifiers.size(); ++i)
    out << (i ? "," : "") << '"' << classifier_name(cfg.classifiers[i]) << '"';
  out << "]\n}\n";
  return out.str();
}

Fig1Result run_fig1(const Fig1Config& cfg) {
  ChannelRealization h;
  h.taps = cfg.taps;
  h.model_id = ChannelModel::Custom;

  const Constellation c = build_constellation(ModClass::Qam, cfg.level);
  const ZfOptions zf_opt{0.0, cfg.zf_length, cfg.zf_length, cfg.zf_length};

  Fig1Result res;
  for (double snr_db : cfg.snrs_db) {
    const double sigma2_v = noise_var_for_snr_db(snr_db);
    const VarianceBreakdown vb = error_variance(c, cfg.mu, h, cfg.equalizer_length, sigma2_v, zf_opt);
    const double sigma2_no_isi = vb.total - vb.residual_isi;

    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(std::lround(snr_db * 100.0)) + 17));
    const std::size_t n_samples =
        static_cast<std::size_t>(cfg.outputs) * cfg.equalizer_length + h.length() - 1;
    const std::vector<cxd> symbols = draw_symbols(c, n_samples, rng);
    const ReceivedBlock block = transmit(symbols, h, NoiseSpec{sigma2_v}, rng);
    const CmaConfig cma_cfg{cfg.equalizer_length, cfg.mu, cfg.outputs, {}};
    const EqualizerRun run = cma_run(block.x, sigma2_v, cma_cfg);

    std::vector<double> mags = extract_feature(run.y_eq, FeatureKind::Magnitude);
    std::sort(mags.begin(), mags.end());
    const auto ks_distance = [&](double sigma2) {
      double d = 0.0;
      const double n = static_cast<double>(mags.size());
      for (std::size_t i = 0; i < mags.size(); ++i) {
        const double f = magnitude_mixture_cdf(c, sigma2, mags[i]);
        d = std::max(d, std::max(f - static_cast<double>(i) / n,
                                 static_cast<double>(i + 1) / n - f));
      }
      return d;
    };
    res.points.push_back({snr_db, ks_distance(vb.total), ks_distance(sigma2_no_isi), vb.total,
                          sigma2_no_isi});

    // Tabulated curves for plotting.
    const double upper = c.max_magnitude() + 5.0 * std::sqrt(std::max(vb.total, sigma2_no_isi));
    const int n_grid = 512;
    Fig1Curve emp{snr_db, "empirical", {}, {}};
    Fig1Curve full{snr_db, "model_full", {}, {}};
    Fig1Curve no_isi{snr_db, "model_no_isi", {}, {}};
    for (int j = 0; j < n_grid; ++j) {
      const double tau = upper * j / (n_grid - 1);
      emp.tau.push_back(tau);
      emp.value.push_back(ecdf_at(mags, tau));
      full.tau.push_back(tau);
      full.value.push_back(magnitude_mixture_cdf(c, vb.total, tau));
      no_isi.tau.push_back(tau);
      no_isi.value.push_back(magnitude_mixture_cdf(c, sigma2_no_isi, tau));
    }
    res.curves.push_back(std::move(emp));
    res.curves.push_back(std::move(full));
    res.curves.push_back(std::move(no_isi));
  }
  return res;
}

std::string fig1_to_csv(const Fig1Result& res) {
  std::ostringstream out;
  out << "snr_db,curve,tau,value\n";
  for (const auto& c : res.curves)
    for (std::size_t j = 0; j < c.tau.size(); ++j)
      out << fmt_short(c.snr_db) << ',' << c.name << ',' << fmt_double(c.tau[j]) << ','
          << fmt_double(c.value[j]) << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// Table cache

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string snr_tag(double snr_db) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%+05.1f", snr_db);
  std::string s(buf);
  for (auto& ch : s)
    if (ch == '.') ch = 'p';
  return s;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

}  // namespace

std::string table_cache_key(ModClass mod, const std::vector<int>& levels, const TableGrid& grid) {
  std::ostringstream tag;
  tag << mod_class_name(mod);
  for (int l : levels) tag << '_' << l;
  std::ostringstream full;
  full << tag.str() << '|' << grid.snr_min_db << '|' << grid.snr_max_db << '|' << grid.snr_step_db
       << '|' << grid.grid_size << "|v1";
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(full.str())));
  return tag.str() + "_" + buf;
}

void save_table_set(const TableSet& set, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  for (int si = 0; si < set.grid.size(); ++si) {
    const double snr_db = set.grid.snr_at(si);
    for (std::size_t li = 0; li < set.levels.size(); ++li) {
      const auto& t = set.cdfs[si][li];
      std::ostringstream out;
      out << mod_class_name(set.mod_class) << ',' << t.level << ',' << fmt_short(snr_db) << ','
          << feature_kind_name(t.kind) << ',' << t.method << '\n';
      for (std::size_t j = 0; j < t.grid.size(); ++j)
        out << fmt_double(t.grid[j]) << ',' << fmt_double(t.values[j]) << '\n';
      write_text_file(dir + "/cdf_" + std::to_string(t.level) + "_snr" + snr_tag(snr_db) + ".csv",
                      out.str());
    }
    std::ostringstream out;
    out << mod_class_name(set.mod_class) << ",0," << fmt_short(snr_db) << ','
        << feature_kind_name(set.kind) << ",testpoints\n";
    for (const auto& e : set.testpoints[si].entries)
      out << e.level_l << ',' << e.level_p << ',' << e.delta << ',' << fmt_double(e.tau) << '\n';
    write_text_file(dir + "/testpoints_snr" + snr_tag(snr_db) + ".csv", out.str());
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

TableSet load_table_set(ModClass mod, const std::vector<int>& levels, const TableGrid& grid,
                        const std::string& dir) {
  TableSet set;
  set.mod_class = mod;
  set.kind = feature_kind_for(mod);
  set.levels = levels;
  set.grid = grid;
  const int n_snr = grid.size();
  set.cdfs.resize(n_snr);
  set.testpoints.resize(n_snr);

  for (int si = 0; si < n_snr; ++si) {
    const double snr_db = grid.snr_at(si);
    for (int level : levels) {
      const std::string path =
          dir + "/cdf_" + std::to_string(level) + "_snr" + snr_tag(snr_db) + ".csv";
      std::ifstream in(path);
      if (!in) throw std::runtime_error("missing table cache file: " + path);
      std::string line;
      if (!std::getline(in, line)) throw std::runtime_error("empty table cache file: " + path);
      FeatureCdfTable t;
      t.level = level;
      t.snr_db = snr_db;
      t.kind = set.kind;
      const auto header = split_csv_line(line);
      t.method = header.size() > 4 ? header[4] : "cached";
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 2) throw std::runtime_error("bad table cache row in " + path);
        t.grid.push_back(std::stod(fields[0]));
        t.values.push_back(std::stod(fields[1]));
      }
      set.cdfs[si].push_back(std::move(t));
    }
    const std::string tp_path = dir + "/testpoints_snr" + snr_tag(snr_db) + ".csv";
    std::ifstream in(tp_path);
    if (!in) throw std::runtime_error("missing table cache file: " + tp_path);
    std::string line;
    std::getline(in, line);
    TestpointTable tp;
    tp.snr_db = snr_db;
    tp.kind = set.kind;
    tp.levels = levels;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto fields = split_csv_line(line);
      if (fields.size() != 4) throw std::runtime_error("bad testpoint row in " + tp_path);
      tp.entries.push_back(
          {std::stoi(fields[0]), std::stoi(fields[1]), std::stoi(fields[2]), std::stod(fields[3])});
    }
    set.testpoints[si] = std::move(tp);
  }
  return set;
}

TableSet load_or_build_tables(ModClass mod, const std::vector<int>& levels, const TableGrid& grid,
                              const std::string& cache_root, bool rebuild, bool allow_build,
                              bool parallel) {
  namespace fs = std::filesystem;
  const bool use_cache = !cache_root.empty();
  const std::string dir =
      use_cache ? cache_root + "/" + table_cache_key(mod, levels, grid) : std::string();

  if (use_cache && !rebuild && fs::exists(dir)) {
    try {
      return load_table_set(mod, levels, grid, dir);
    } catch (const std::exception&) {
      // Stale or partial cache: fall through and rebuild.
    }
  }
  if (!allow_build)
    throw std::runtime_error("table cache missing and building is disabled (--no-build)");

  std::vector<Constellation> cs;
  cs.reserve(levels.size());
  for (int order : levels) cs.push_back(build_constellation(mod, order));
  TableSet set = build_table_set(cs, grid, parallel);
  if (use_cache) save_table_set(set, dir);
  return set;
}

std::vector<double> parse_snr_spec(const std::string& spec) {
  std::vector<double> out;
  const auto c1 = spec.find(':');
  if (c1 == std::string::npos) {
    out.push_back(std::stod(spec));
    return out;
  }
  const auto c2 = spec.find(':', c1 + 1);
  if (c2 == std::string::npos) throw std::invalid_argument("bad SNR spec (want min:step:max): " + spec);
  const double lo = std::stod(spec.substr(0, c1));
  const double step = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
  const double hi = std::stod(spec.substr(c2 + 1));
  if (step <= 0.0) throw std::invalid_argument("bad SNR spec (step must be > 0): " + spec);
  for (double v = lo; v <= hi + 1e-9; v += step) out.push_back(v);
  if (out.empty()) throw std::invalid_argument("empty SNR grid: " + spec);
  return out;
}

std::vector<int> parse_levels(const std::string& spec) {
  std::vector<int> out;
  std::istringstream in(spec);
  std::string tok;
  while (std::getline(in, tok, ','))
    if (!tok.empty()) out.push_back(std::stoi(tok));
  if (out.empty()) throw std::invalid_argument("empty level list: " + spec);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<ClassifierId> parse_classifiers(const std::string& spec) {
  std::vector<ClassifierId> out;
  std::istringstream in(spec);
  std::string tok;
  while (std::getline(in, tok, ','))
    if (!tok.empty()) out.push_back(classifier_from_name(tok));
  if (out.empty()) throw std::invalid_argument("empty classifier list: " + spec);
  return out;
}

}  // namespace amc
