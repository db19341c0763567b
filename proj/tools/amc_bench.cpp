// Timing comparison of the serial reference paths against the OpenMP ones.
// The parallel loops must also be bit-identical to the serial ones; that is
// checked here and again in the test suite.

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "amc/harness.hpp"

namespace {

using clock_type = std::chrono::steady_clock;

template <typename F>
double time_ms(F&& fn) {
  const auto t0 = clock_type::now();
  fn();
  const auto t1 = clock_type::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

void report(const char* name, double serial_ms, double parallel_ms, bool equal) {
  std::printf("%-22s serial %8.1f ms   openmp %8.1f ms   speedup %.2fx   equal:%s\n", name,
              serial_ms, parallel_ms, serial_ms / parallel_ms, equal ? "yes" : "NO");
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP; both columns run serially\n");
#endif

  using namespace amc;

  // CDF table construction over a reduced SNR grid.
  {
    std::vector<Constellation> cs{build_constellation(ModClass::Qam, 4),
                                  build_constellation(ModClass::Qam, 16),
                                  build_constellation(ModClass::Qam, 64)};
    const TableGrid grid{0.0, 20.0, 2.0, 4096};
    TableSet serial_set, parallel_set;
    const double ts = time_ms([&] { serial_set = build_table_set(cs, grid, false); });
    const double tp = time_ms([&] { parallel_set = build_table_set(cs, grid, true); });
    bool equal = true;
    for (int si = 0; si < grid.size() && equal; ++si)
      for (std::size_t li = 0; li < cs.size() && equal; ++li)
        equal = serial_set.cdfs[si][li].values == parallel_set.cdfs[si][li].values;
    report("qam table build", ts, tp, equal);

    // Monte Carlo sweep.
    ExperimentConfig cfg;
    cfg.channel = ChannelModel::Ch1;
    cfg.snr_grid_db = {20.0};
    cfg.realizations = 300;
    cfg.classifiers = {ClassifierId::CmaRck, ClassifierId::C63};
    cfg.master_seed = 7;
    const TableGrid full_grid{};
    const TableSet tables = load_or_build_tables(ModClass::Qam, cfg.levels, full_grid, "", false,
                                                 true, true);
    ExperimentResult rs, rp;
    cfg.parallel = false;
    const double es = time_ms([&] { rs = run_experiment(cfg, tables); });
    cfg.parallel = true;
    const double ep = time_ms([&] { rp = run_experiment(cfg, tables); });
    report("ch1 sweep (300 real)", es, ep, results_to_csv(rs) == results_to_csv(rp));

    // Semi-analytic Pc batches.
    Rng rng(3);
    const ChannelRealization h = sample_channel(ChannelModel::Ch3, rng);
    const std::vector<double> priors{1.0 / 3, 1.0 / 3, 1.0 / 3};
    AnalyticPcResult as, ap;
    const double ps = time_ms([&] {
      as = analytic_pc(h, cs, noise_var_for_snr_db(20.0), 1e-4, 20, tables, priors, 2000, 200, 5,
                       false);
    });
    const double pp = time_ms([&] {
      ap = analytic_pc(h, cs, noise_var_for_snr_db(20.0), 1e-4, 20, tables, priors, 2000, 200, 5,
                       true);
    });
    report("analytic pc (2000)", ps, pp, as.pc == ap.pc);
  }
  return 0;
}
